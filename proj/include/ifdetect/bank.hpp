#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ifdetect/detectability.hpp"
#include "ifdetect/monitor.hpp"

namespace ifd {

enum class CleaningOrder { CompensateThenExclude, ExcludeThenCompensate };

/// Guaranteed minimum alarm durations of one window (appearance alarm,
/// the gap after this episode, the gap after the previous episode).
/// Anything shorter is a false or missing alarm.
struct MinAlarmDurations {
    long min_app = 1;
    long min_disapp = 1;
    long min_prev_disapp = 1;
};

MinAlarmDurations min_alarm_durations(const WindowDelays& delays, const IFParams& p);

/// Alarm sequences of the whole bank, as consumed by the cleaning steps.
struct BankState {
    std::vector<long> windows;  // ascending; the last one is the duration-optimal chart
    std::map<long, long> first_index;  // per window, the first monitored instant
    std::map<long, AlarmSequence> alarms;
    std::map<long, MinAlarmDurations> bounds;
};

/// Missing-alarms compensation: merges inter-alarm gaps that are shorter
/// than the guaranteed disappearance duration, then gaps that intersect
/// no gap of some other chart. Repeats to fixpoint; returns whether
/// anything changed.
bool compensate_missing(BankState& state);

/// False-alarms exclusion: deletes closed alarms shorter than the
/// guaranteed appearance duration, then alarms that intersect no alarm of
/// some other chart. Open trailing alarms are held pending. Repeats to
/// fixpoint; returns whether anything changed.
bool exclude_false(BankState& state);

struct IntervalPair {
    std::optional<long> mu_lo, mu_hi, nu_lo, nu_hi;
};

/// Appearance/disappearance bounds contributed by one chart whose alarms
/// `i..l` (inclusive indices into the cleaned sequence) belong to the
/// episode. Missing neighbours yield partially bounded intervals. Throws
/// InconsistentAlarms when a computed lower bound exceeds its upper bound.
IntervalPair infer_times(const AlarmSequence& cleaned, std::size_t i, std::size_t l,
                         const WindowDelays& delays);

/// Coordinate-wise intersection of per-window inferences. Throws
/// InconsistentAlarms when the intersection is empty.
IntervalPair intersect_inferences(const std::vector<IntervalPair>& per_window);

struct WindowAudit {
    std::vector<AlarmInterval> alarms;  // cleaned alarms attributed to the episode
    IntervalPair inference;
};

struct EpisodeInference {
    long q = 0;
    bool confirmed = false;
    std::optional<long> mu_lo, mu_hi, nu_lo, nu_hi;
    std::map<long, WindowAudit> per_window;
    std::vector<std::string> flags;
};

struct BankConfig {
    std::vector<long> windows;  // ascending, typically W* .. W#
    double alpha = 0.01;
    IFParams params;  // exact values or lower bounds
    // Exclusion before compensation keeps clusters of short spurious
    // alarms from being merged into episode-length ones; the switch
    // restores the opposite order when missing alarms dominate.
    CleaningOrder order = CleaningOrder::ExcludeThenCompensate;
    int max_cleaning_passes = 100;
};

struct BankReport {
    std::vector<long> windows;
    double alpha = 0.0;
    std::map<long, WindowDelays> delays;
    std::map<long, AlarmSequence> raw_alarms;
    std::map<long, AlarmSequence> cleaned_alarms;
    std::vector<EpisodeInference> episodes;
    std::vector<std::string> flags;
    int cleaning_passes = 0;
};

/// Runs every chart over the stream, cleans the alarm sequences, confirms
/// episodes from the largest window's surviving alarms and infers each
/// episode's appearance/disappearance interval. Inconsistencies are
/// flagged per episode without aborting the run. Deterministic given
/// stream and config.
BankReport run(const GaussianModel& model, const BankConfig& cfg,
               const Eigen::Ref<const Mat>& stream);

}  // namespace ifd
