#pragma once

#include <optional>
#include <vector>

#include "ifdetect/stat_core.hpp"

namespace ifd {

struct StepResult {
    double t2;
    bool alarm;
};

/// One alarm interval: raised at `start`, back below the limit at `end`
/// (half-open [start, end)). A missing `end` means the alarm was still
/// active when the stream ended.
struct AlarmInterval {
    long start = 0;
    std::optional<long> end;

    bool closed() const { return end.has_value(); }
    long length() const { return closed() ? *end - start : -1; }
};

/// Ordered alarm on/off times of one chart. Intervals interleave strictly:
/// end(i-1) < start(i) < end(i).
struct AlarmSequence {
    std::vector<AlarmInterval> intervals;

    bool empty() const { return intervals.empty(); }
    std::size_t size() const { return intervals.size(); }
};

/// Online moving-average T^2 chart over one stream (single writer).
/// Emits nothing during the W-1 sample warm-up, then the statistic on the
/// latest W samples and the alarm flag (strictly above the limit; a tie
/// counts as normal). The running window sum uses compensated summation
/// and is re-anchored by exact recomputation every 2^16 steps.
class MovingChart {
public:
    MovingChart(const GaussianModel& model, const ChartConfig& cfg);

    std::optional<StepResult> step(const Eigen::Ref<const Vec>& sample);

    long steps_seen() const { return steps_; }
    double limit() const { return limit_; }
    const ChartConfig& config() const { return cfg_; }

private:
    const GaussianModel* model_;
    ChartConfig cfg_;
    double limit_;
    Mat buffer_;  // p x W ring buffer
    Vec sum_;
    Vec comp_;  // Kahan compensation
    long steps_ = 0;

    void accumulate(double sign, const Eigen::Ref<const Vec>& v);
};

/// Turns a flag series (first flag at time `first_index`) into alarm
/// intervals. A trailing run of raised flags is reported open.
AlarmSequence extract_alarms(const std::vector<bool>& flags, long first_index);

void validate_interleaving(const AlarmSequence& seq);

}  // namespace ifd
