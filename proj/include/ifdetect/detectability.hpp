#pragma once

#include <optional>
#include <vector>

#include "ifdetect/stat_core.hpp"

namespace ifd {

/// Parameters of one intermittent-fault episode: direction, magnitude and
/// the surrounding durations in sampling intervals. Durations must be
/// pre-integerized by the caller. `is_lower_bound` marks that magnitude
/// and durations are lower bounds rather than exact values, in which case
/// every verdict below is conservative.
struct IFParams {
    Vec direction;
    double magnitude = 0.0;
    long tau_on = 1;        // active duration of this episode
    long tau_off_prev = 1;  // inactive duration before it
    long tau_off_next = 1;  // inactive duration after it
    bool is_lower_bound = false;
};

/// Closed integer interval [lo, hi]; empty when lo > hi.
struct WindowInterval {
    long lo = 1;
    long hi = 0;

    bool empty() const { return lo > hi; }
    bool contains(long w) const { return w >= lo && w <= hi; }
    long count() const { return empty() ? 0 : hi - lo + 1; }
};

/// Guaranteed alarm delays of one window length: the appearance delay,
/// the disappearance delay W-1, and their difference (the guaranteed
/// alarm extension past the true disappearance).
struct WindowDelays {
    long window = 0;
    long mu_delay = 0;
    long nu_delay = 0;
    long k_doublestar_offset = 0;  // nu_delay - mu_delay
};

struct DetectabilityReport {
    bool detectable = false;
    WindowInterval admissible;
    /// True when the upper edge was admitted through the non-strict branch
    /// of the window inequality (the boundary W = min of the inactive
    /// durations).
    bool hi_is_boundary = false;
    std::vector<WindowDelays> delays;  // one entry per admissible window
    std::optional<long> w_star;        // undefined when the PF condition fails
    long w_sharp = 0;
};

struct PfDetectability {
    bool detectable = false;
    long min_window = 0;  // smallest window satisfying the range inequality
};

void validate_if_params(const IFParams& p);

/// Mahalanobis length of the fault step, sqrt((xi f)^T S^-1 (xi f)); the
/// scalar every detectability condition consumes.
double whitened_shift(const GaussianModel& model, const Eigen::Ref<const Vec>& direction,
                      double magnitude);
double whitened_shift(const GaussianModel& model, const IFParams& p);

/// Disappearance is guaranteed detectable iff W <= tau_off.
bool disappearance_detectable(long window, long tau_off);

/// Appearance detectability with window W = cfg.window. Requires
/// W <= tau_off_prev (throws WindowExceedsPrevQuiet otherwise). For
/// W <= min(tau_off_prev, tau_on) the full fault must clear twice the
/// per-window limit radius; for tau_on < W <= tau_off_prev the fault
/// effect is diluted by tau_on/W.
bool appearance_detectable(const GaussianModel& model, const IFParams& p,
                           const ChartConfig& cfg);

/// Necessary and sufficient condition for the episode to be guaranteed
/// detectable by some window length.
bool if_detectable(const GaussianModel& model, const IFParams& p, double alpha);

/// All window lengths for which the episode is guaranteed detectable;
/// empty iff if_detectable is false. `hi_is_boundary`, when non-null,
/// receives the non-strict-branch marker.
WindowInterval admissible_windows(const GaussianModel& model, const IFParams& p, double alpha,
                                  bool* hi_is_boundary = nullptr);

/// Guaranteed alarm delays for an admissible window; throws
/// NotDetectableWithW otherwise.
WindowDelays alarm_delays(const GaussianModel& model, const IFParams& p, long window,
                          double alpha);

/// Permanent-fault specialization (durations -> infinity).
PfDetectability pf_detectable(const GaussianModel& model, const Eigen::Ref<const Vec>& direction,
                              double magnitude, double alpha);

/// Guaranteed appearance delay of a permanent fault for a given window.
long pf_mu_delay(const GaussianModel& model, const Eigen::Ref<const Vec>& direction,
                 double magnitude, double alpha, long window);

/// Smallest window making any episode with this direction and magnitude
/// guaranteed detectable (and the delay-optimal one among those). Throws
/// NotPFDetectable when no window works.
long optimal_window_star(const GaussianModel& model, const Eigen::Ref<const Vec>& direction,
                         double magnitude, double alpha);

/// Duration-optimal window: the minimum of the surrounding durations.
long optimal_window_sharp(long tau_off_prev, long tau_on, long tau_off_next);

/// Full report: verdict, admissible interval, per-window delays and the
/// two optimal windows.
DetectabilityReport analyze(const GaussianModel& model, const IFParams& p, double alpha);

namespace detail {

/// Ceiling with 1e-9 slack absorbed first, so values a hair below an
/// integer (representation error) round to it and exact integers stay.
long ceil_with_slack(double x);

/// Largest integer strictly below x, with the same slack convention.
long strict_floor(double x);

}  // namespace detail

}  // namespace ifd
