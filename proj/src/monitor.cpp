#include "ifdetect/monitor.hpp"

#include <cassert>
#include <cmath>
#include <limits>

namespace ifd {

MovingChart::MovingChart(const GaussianModel& model, const ChartConfig& cfg)
    : model_(&model), cfg_(cfg), limit_(control_limit(model, cfg)) {
    buffer_ = Mat::Zero(model.dim, cfg.window);
    sum_ = Vec::Zero(model.dim);
    comp_ = Vec::Zero(model.dim);
}

void MovingChart::accumulate(double sign, const Eigen::Ref<const Vec>& v) {
    for (long i = 0; i < v.size(); ++i) {
        const double y = sign * v[i] - comp_[i];
        const double t = sum_[i] + y;
        comp_[i] = (t - sum_[i]) - y;
        sum_[i] = t;
    }
}

std::optional<StepResult> MovingChart::step(const Eigen::Ref<const Vec>& sample) {
    if (sample.size() != model_->dim)
        throw DimensionMismatch("sample has dimension " + std::to_string(sample.size()) +
                                ", chart expects " + std::to_string(model_->dim));

    const long w = cfg_.window;
    const long slot = steps_ % w;
    if (steps_ >= w) accumulate(-1.0, buffer_.col(slot));
    buffer_.col(slot) = sample;
    accumulate(+1.0, sample);
    ++steps_;

    if ((steps_ & 0xffff) == 0) {
        Vec exact = buffer_.rowwise().sum();
        assert((sum_ - exact).cwiseAbs().maxCoeff() <=
               1e-9 * std::max(1.0, exact.cwiseAbs().maxCoeff()));
        sum_ = exact;
        comp_.setZero();
    }

    if (steps_ < w) return std::nullopt;
    const Vec mean = sum_ / double(w);
    const double t2 = hotelling_t2(*model_, mean);
    return StepResult{t2, t2 > limit_};
}

AlarmSequence extract_alarms(const std::vector<bool>& flags, long first_index) {
    AlarmSequence seq;
    bool active = false;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        const long k = first_index + long(i);
        if (flags[i] && !active) {
            seq.intervals.push_back(AlarmInterval{k, std::nullopt});
            active = true;
        } else if (!flags[i] && active) {
            seq.intervals.back().end = k;
            active = false;
        }
    }
    return seq;
}

void validate_interleaving(const AlarmSequence& seq) {
    long prev_end = std::numeric_limits<long>::min();
    for (std::size_t i = 0; i < seq.intervals.size(); ++i) {
        const auto& iv = seq.intervals[i];
        if (iv.start <= prev_end)
            throw InconsistentAlarms("alarm interval " + std::to_string(i) +
                                     " does not interleave");
        if (!iv.closed()) {
            if (i + 1 != seq.intervals.size())
                throw InconsistentAlarms("open alarm interval before the end of the sequence");
            break;
        }
        if (*iv.end <= iv.start)
            throw InconsistentAlarms("alarm interval " + std::to_string(i) + " is empty");
        prev_end = *iv.end;
    }
}

}  // namespace ifd
