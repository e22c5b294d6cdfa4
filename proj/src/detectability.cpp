#include "ifdetect/detectability.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace ifd {

namespace detail {

namespace {
constexpr double kSlack = 1e-9;
}

long ceil_with_slack(double x) { return long(std::ceil(x - kSlack)); }

long strict_floor(double x) { return long(std::floor(x - kSlack)); }

}  // namespace detail

namespace {

double delta_sq_single(const GaussianModel& model, double alpha) {
    return control_limit(model, ChartConfig{alpha, 1});
}

// 2 * delta_W = 2 * delta * sqrt((N+W) / (W (N+1))), the appearance
// threshold of the per-window condition.
double two_delta_w(double delta_sq, long n, long w) {
    return 2.0 * std::sqrt(delta_sq * (double(n) + double(w)) / (double(w) * (double(n) + 1.0)));
}

// (N+1) / (4 delta^2) * shift^2, the scale-free strength of the fault.
double fault_strength(double delta_sq, long n, double shift) {
    return (double(n) + 1.0) / (4.0 * delta_sq) * shift * shift;
}

long mu_delay_from(double delta_sq, long n, double shift, long w) {
    const double raw =
        std::sqrt(double(w) * (double(n) + double(w)) / (double(n) + 1.0)) *
        2.0 * std::sqrt(delta_sq) / shift;
    return detail::ceil_with_slack(raw) - 1;
}

}  // namespace

void validate_if_params(const IFParams& p) {
    if (p.direction.size() < 1) throw DimensionMismatch("fault direction is empty");
    if (!(p.magnitude > 0.0)) throw std::domain_error("fault magnitude must be positive");
    if (p.tau_on < 1 || p.tau_off_prev < 1 || p.tau_off_next < 1)
        throw std::domain_error("fault durations must be >= 1 sampling interval");
}

double whitened_shift(const GaussianModel& model, const Eigen::Ref<const Vec>& direction,
                      double magnitude) {
    if (direction.size() != model.dim)
        throw DimensionMismatch("fault direction has dimension " +
                                std::to_string(direction.size()) + ", model expects " +
                                std::to_string(model.dim));
    const Vec v = direction * magnitude;
    return std::sqrt(std::max(0.0, v.dot(model.cov_inv * v)));
}

double whitened_shift(const GaussianModel& model, const IFParams& p) {
    return whitened_shift(model, p.direction, p.magnitude);
}

bool disappearance_detectable(long window, long tau_off) {
    if (window < 1 || tau_off < 1) throw std::domain_error("window and tau_off must be >= 1");
    return window <= tau_off;
}

bool appearance_detectable(const GaussianModel& model, const IFParams& p,
                           const ChartConfig& cfg) {
    validate_if_params(p);
    validate_chart_config(cfg);
    const long w = cfg.window;
    if (w > p.tau_off_prev)
        throw WindowExceedsPrevQuiet("window " + std::to_string(w) +
                                     " exceeds the preceding inactive duration " +
                                     std::to_string(p.tau_off_prev));
    const double shift = whitened_shift(model, p);
    const double threshold = two_delta_w(delta_sq_single(model, cfg.alpha), model.n_train, w);
    if (w <= std::min(p.tau_off_prev, p.tau_on)) return shift > threshold;
    // tau_on < W <= tau_off_prev: only tau_on of the W samples are faulty.
    return shift * double(p.tau_on) / double(w) > threshold;
}

bool if_detectable(const GaussianModel& model, const IFParams& p, double alpha) {
    validate_if_params(p);
    const double d2 = delta_sq_single(model, alpha);
    const double strength = fault_strength(d2, model.n_train, whitened_shift(model, p));
    const long tau_min = std::min({p.tau_off_prev, p.tau_on, p.tau_off_next});
    return strength - 1.0 > double(model.n_train) / double(tau_min);
}

WindowInterval admissible_windows(const GaussianModel& model, const IFParams& p, double alpha,
                                  bool* hi_is_boundary) {
    validate_if_params(p);
    if (hi_is_boundary) *hi_is_boundary = false;

    const long n = model.n_train;
    const double d2 = delta_sq_single(model, alpha);
    const double strength = fault_strength(d2, n, whitened_shift(model, p));
    if (!(strength > 1.0)) return {};  // even a permanent fault is undetectable

    const long lo = std::max(long(1), detail::ceil_with_slack(double(n) / (strength - 1.0)));

    // Root of the diluted-window quadratic; windows above 1/root would
    // leave too few faulty samples in the window.
    const double half_n = double(n) / (2.0 * double(p.tau_on));
    const double root =
        (half_n + std::sqrt(half_n * half_n + strength)) / (double(p.tau_on) * strength);
    const long quiet_min = std::min(p.tau_off_prev, p.tau_off_next);

    long hi;
    if (root * double(quiet_min) >= 1.0) {
        hi = detail::strict_floor(1.0 / root);
    } else {
        hi = quiet_min;
        if (hi_is_boundary) *hi_is_boundary = true;
    }

    if (lo > hi) return {};
    return {lo, hi};
}

WindowDelays alarm_delays(const GaussianModel& model, const IFParams& p, long window,
                          double alpha) {
    const WindowInterval ok = admissible_windows(model, p, alpha);
    if (!ok.contains(window))
        throw NotDetectableWithW("window " + std::to_string(window) +
                                 " is outside the admissible range [" + std::to_string(ok.lo) +
                                 ", " + std::to_string(ok.hi) + "]");
    const double d2 = delta_sq_single(model, alpha);
    WindowDelays d;
    d.window = window;
    d.mu_delay = mu_delay_from(d2, model.n_train, whitened_shift(model, p), window);
    d.nu_delay = window - 1;
    d.k_doublestar_offset = d.nu_delay - d.mu_delay;
    assert(d.mu_delay <= std::min(window, p.tau_on) - 1);
    return d;
}

PfDetectability pf_detectable(const GaussianModel& model, const Eigen::Ref<const Vec>& direction,
                              double magnitude, double alpha) {
    if (!(magnitude > 0.0)) throw std::domain_error("fault magnitude must be positive");
    const long n = model.n_train;
    const double d2 = delta_sq_single(model, alpha);
    const double strength = fault_strength(d2, n, whitened_shift(model, direction, magnitude));
    PfDetectability r;
    r.detectable = strength - 1.0 > 0.0;
    if (r.detectable)
        r.min_window = std::max(long(1), detail::ceil_with_slack(double(n) / (strength - 1.0)));
    return r;
}

long pf_mu_delay(const GaussianModel& model, const Eigen::Ref<const Vec>& direction,
                 double magnitude, double alpha, long window) {
    if (window < 1) throw std::domain_error("window must be >= 1");
    const double d2 = delta_sq_single(model, alpha);
    return mu_delay_from(d2, model.n_train, whitened_shift(model, direction, magnitude), window);
}

long optimal_window_star(const GaussianModel& model, const Eigen::Ref<const Vec>& direction,
                         double magnitude, double alpha) {
    const long n = model.n_train;
    const double d2 = delta_sq_single(model, alpha);
    const double strength = fault_strength(d2, n, whitened_shift(model, direction, magnitude));
    if (!(strength - 1.0 > 0.0))
        throw NotPFDetectable("fault strength too small for any window length");
    return std::max(long(1), detail::ceil_with_slack(double(n) / (strength - 1.0)));
}

long optimal_window_sharp(long tau_off_prev, long tau_on, long tau_off_next) {
    if (tau_on < 1 || tau_off_prev < 1 || tau_off_next < 1)
        throw std::domain_error("fault durations must be >= 1 sampling interval");
    return std::min({tau_off_prev, tau_on, tau_off_next});
}

DetectabilityReport analyze(const GaussianModel& model, const IFParams& p, double alpha) {
    DetectabilityReport rep;
    rep.detectable = if_detectable(model, p, alpha);
    rep.admissible = admissible_windows(model, p, alpha, &rep.hi_is_boundary);
    rep.w_sharp = optimal_window_sharp(p.tau_off_prev, p.tau_on, p.tau_off_next);
    const PfDetectability pf = pf_detectable(model, p.direction, p.magnitude, alpha);
    if (pf.detectable) rep.w_star = pf.min_window;
    for (long w = rep.admissible.lo; !rep.admissible.empty() && w <= rep.admissible.hi; ++w)
        rep.delays.push_back(alarm_delays(model, p, w, alpha));
    return rep;
}

}  // namespace ifd
