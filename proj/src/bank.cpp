#include "ifdetect/bank.hpp"

#include <algorithm>
#include <limits>

namespace ifd {

namespace {

constexpr long kOpenEnd = std::numeric_limits<long>::max() / 4;

struct Span {
    long lo;
    long hi;  // half-open [lo, hi)
};

bool overlaps(const Span& a, const Span& b) { return a.lo < b.hi && b.lo < a.hi; }

long end_or_open(const AlarmInterval& iv) { return iv.closed() ? *iv.end : kOpenEnd; }

std::vector<Span> alarm_spans(const AlarmSequence& seq) {
    std::vector<Span> out;
    for (const auto& iv : seq.intervals) out.push_back({iv.start, end_or_open(iv)});
    return out;
}

// Fault-free spans of one chart, including the leading span before the
// first alarm and the open trailing span after the last closed alarm.
std::vector<Span> gap_spans(const AlarmSequence& seq, long first_index) {
    std::vector<Span> out;
    long cursor = first_index;
    for (const auto& iv : seq.intervals) {
        if (cursor < iv.start) out.push_back({cursor, iv.start});
        if (!iv.closed()) return out;
        cursor = *iv.end;
    }
    out.push_back({cursor, kOpenEnd});
    return out;
}

bool intersects_any(const Span& s, const std::vector<Span>& others) {
    for (const auto& o : others)
        if (overlaps(s, o)) return true;
    return false;
}

// Fuse alarm idx-1 and idx (drop the gap between them).
void merge_gap(AlarmSequence& seq, std::size_t idx) {
    seq.intervals[idx - 1].end = seq.intervals[idx].end;
    seq.intervals.erase(seq.intervals.begin() + long(idx));
}

std::optional<long> opt_min(std::optional<long> a, std::optional<long> b) {
    if (!a) return b;
    if (!b) return a;
    return std::min(*a, *b);
}

std::optional<long> opt_max(std::optional<long> a, std::optional<long> b) {
    if (!a) return b;
    if (!b) return a;
    return std::max(*a, *b);
}

}  // namespace

MinAlarmDurations min_alarm_durations(const WindowDelays& delays, const IFParams& p) {
    validate_if_params(p);
    MinAlarmDurations d;
    d.min_app = std::max({p.tau_on + delays.nu_delay - 2 * delays.mu_delay,
                          delays.window - delays.mu_delay, p.tau_on - delays.mu_delay, long(1)});
    d.min_disapp = std::max(p.tau_off_next - delays.nu_delay, long(1));
    d.min_prev_disapp = std::max(p.tau_off_prev - delays.nu_delay, long(1));
    return d;
}

bool compensate_missing(BankState& state) {
    bool changed_ever = false;
    bool changed = true;
    while (changed) {
        changed = false;
        // step 1: gaps shorter than the guaranteed disappearance duration
        for (long w : state.windows) {
            auto& seq = state.alarms.at(w);
            const long bound = state.bounds.at(w).min_disapp;
            for (std::size_t i = 1; i < seq.intervals.size(); ++i) {
                const long gap = seq.intervals[i].start - *seq.intervals[i - 1].end;
                if (gap < bound) {
                    merge_gap(seq, i);
                    changed = true;
                    break;
                }
            }
            if (changed) break;
        }
        if (changed) {
            changed_ever = true;
            continue;
        }
        // step 2: gaps with no counterpart in some other chart
        for (long w : state.windows) {
            auto& seq = state.alarms.at(w);
            for (std::size_t i = 1; i < seq.intervals.size() && !changed; ++i) {
                const Span gap{*seq.intervals[i - 1].end, seq.intervals[i].start};
                for (long other : state.windows) {
                    if (other == w) continue;
                    if (!intersects_any(gap, gap_spans(state.alarms.at(other),
                                                       state.first_index.at(other)))) {
                        merge_gap(seq, i);
                        changed = true;
                        break;
                    }
                }
            }
            if (changed) break;
        }
        changed_ever |= changed;
    }
    return changed_ever;
}

bool exclude_false(BankState& state) {
    bool changed_ever = false;
    bool changed = true;
    while (changed) {
        changed = false;
        // step 3: closed alarms shorter than the guaranteed appearance duration
        for (long w : state.windows) {
            auto& seq = state.alarms.at(w);
            const long bound = state.bounds.at(w).min_app;
            for (std::size_t i = 0; i < seq.intervals.size(); ++i) {
                if (!seq.intervals[i].closed()) continue;
                if (seq.intervals[i].length() < bound) {
                    seq.intervals.erase(seq.intervals.begin() + long(i));
                    changed = true;
                    break;
                }
            }
            if (changed) break;
        }
        if (changed) {
            changed_ever = true;
            continue;
        }
        // step 4: closed alarms with no counterpart in some other chart
        for (long w : state.windows) {
            auto& seq = state.alarms.at(w);
            for (std::size_t i = 0; i < seq.intervals.size() && !changed; ++i) {
                if (!seq.intervals[i].closed()) continue;
                const Span alarm{seq.intervals[i].start, *seq.intervals[i].end};
                for (long other : state.windows) {
                    if (other == w) continue;
                    if (!intersects_any(alarm, alarm_spans(state.alarms.at(other)))) {
                        seq.intervals.erase(seq.intervals.begin() + long(i));
                        changed = true;
                        break;
                    }
                }
            }
            if (changed) break;
        }
        changed_ever |= changed;
    }
    return changed_ever;
}

IntervalPair infer_times(const AlarmSequence& cleaned, std::size_t i, std::size_t l,
                         const WindowDelays& delays) {
    if (i >= cleaned.intervals.size() || l >= cleaned.intervals.size() || i > l)
        throw std::out_of_range("alarm indices out of range");
    const AlarmInterval& first = cleaned.intervals[i];
    const AlarmInterval& last = cleaned.intervals[l];
    const std::optional<long> prev_gap_end =
        i > 0 ? cleaned.intervals[i - 1].end : std::nullopt;
    const std::optional<long> next_start = l + 1 < cleaned.intervals.size()
                                               ? std::optional<long>(cleaned.intervals[l + 1].start)
                                               : std::nullopt;
    const long mu_d = delays.mu_delay;
    const long nu_d = delays.nu_delay;
    const long w = delays.window;

    IntervalPair r;
    r.mu_lo = first.start - mu_d;
    if (prev_gap_end) r.mu_lo = opt_max(r.mu_lo, *prev_gap_end + 1);
    r.mu_hi = first.start;  // the alarm bounding the gap before the episode
    if (first.closed()) r.mu_hi = opt_min(r.mu_hi, *first.end - mu_d - 1);

    r.nu_lo = first.start + 1 + std::max(mu_d - nu_d, long(0));
    if (last.closed()) r.nu_lo = opt_max(r.nu_lo, *last.end - nu_d);
    if (first.closed()) r.nu_hi = *first.end + std::min(mu_d - nu_d, long(0));
    if (next_start) r.nu_hi = opt_min(r.nu_hi, *next_start - w);

    if ((r.mu_lo && r.mu_hi && *r.mu_lo > *r.mu_hi) ||
        (r.nu_lo && r.nu_hi && *r.nu_lo > *r.nu_hi))
        throw InconsistentAlarms("window " + std::to_string(w) +
                                 " alarm evidence contradicts the delay bounds");
    return r;
}

IntervalPair intersect_inferences(const std::vector<IntervalPair>& per_window) {
    IntervalPair r;
    for (const auto& p : per_window) {
        r.mu_lo = opt_max(r.mu_lo, p.mu_lo);
        r.mu_hi = opt_min(r.mu_hi, p.mu_hi);
        r.nu_lo = opt_max(r.nu_lo, p.nu_lo);
        r.nu_hi = opt_min(r.nu_hi, p.nu_hi);
    }
    if ((r.mu_lo && r.mu_hi && *r.mu_lo > *r.mu_hi) ||
        (r.nu_lo && r.nu_hi && *r.nu_lo > *r.nu_hi))
        throw InconsistentAlarms("intersection of per-window inferences is empty");
    return r;
}

BankReport run(const GaussianModel& model, const BankConfig& cfg,
               const Eigen::Ref<const Mat>& stream) {
    if (cfg.windows.empty())
        throw InvalidWindowSet("bank configured with an empty window set");
    if (!std::is_sorted(cfg.windows.begin(), cfg.windows.end()) ||
        std::adjacent_find(cfg.windows.begin(), cfg.windows.end()) != cfg.windows.end())
        throw InvalidWindowSet("bank windows must be strictly ascending");

    BankReport rep;
    rep.windows = cfg.windows;
    rep.alpha = cfg.alpha;

    BankState state;
    state.windows = cfg.windows;
    std::map<long, MovingChart> charts;
    for (long w : cfg.windows) {
        rep.delays[w] = alarm_delays(model, cfg.params, w, cfg.alpha);
        state.bounds[w] = min_alarm_durations(rep.delays[w], cfg.params);
        state.first_index[w] = w;
        charts.emplace(w, MovingChart(model, ChartConfig{cfg.alpha, w}));
    }

    std::map<long, std::vector<bool>> flags;
    for (long k = 0; k < stream.rows(); ++k) {
        const Vec sample = stream.row(k).transpose();
        for (long w : cfg.windows) {
            const auto res = charts.at(w).step(sample);
            if (res) flags[w].push_back(res->alarm);
        }
    }
    for (long w : cfg.windows) {
        rep.raw_alarms[w] = extract_alarms(flags[w], w);
        state.alarms[w] = rep.raw_alarms[w];
    }

    // Alternate the two cleaning stages until a joint fixpoint.
    bool changed = true;
    while (changed && rep.cleaning_passes < cfg.max_cleaning_passes) {
        ++rep.cleaning_passes;
        if (cfg.order == CleaningOrder::CompensateThenExclude) {
            changed = compensate_missing(state);
            changed |= exclude_false(state);
        } else {
            changed = exclude_false(state);
            changed |= compensate_missing(state);
        }
    }
    if (changed) rep.flags.push_back("cleaning_cap_exceeded");
    rep.cleaned_alarms = state.alarms;

    // Episodes are the surviving alarms of the largest window's chart.
    const long w_sharp = cfg.windows.back();
    const auto& anchor = state.alarms.at(w_sharp).intervals;
    for (std::size_t e = 0; e < anchor.size(); ++e) {
        EpisodeInference epi;
        epi.q = long(e) + 1;
        epi.confirmed = anchor[e].closed();
        if (!epi.confirmed) epi.flags.push_back("unconfirmed");
        if (e == 0 && anchor[e].start == state.first_index.at(w_sharp))
            epi.flags.push_back("stream_start");

        const Span span{anchor[e].start, end_or_open(anchor[e])};
        std::vector<IntervalPair> contributions;
        for (long w : cfg.windows) {
            const auto& seq = state.alarms.at(w);
            std::size_t i = seq.intervals.size(), l = 0;
            for (std::size_t a = 0; a < seq.intervals.size(); ++a) {
                const Span s{seq.intervals[a].start, end_or_open(seq.intervals[a])};
                if (overlaps(span, s)) {
                    i = std::min(i, a);
                    l = std::max(l, a);
                }
            }
            if (i == seq.intervals.size()) {
                epi.flags.push_back("no_alarm_in_window_" + std::to_string(w));
                epi.flags.push_back("inconsistent");
                continue;
            }
            // Confirmation needs the full evidence of Theorem 8's bounds:
            // a still-open alarm in any chart leaves the episode pending.
            if (!seq.intervals[l].closed() && epi.confirmed) {
                epi.confirmed = false;
                epi.flags.push_back("unconfirmed");
            }
            WindowAudit audit;
            for (std::size_t a = i; a <= l; ++a) audit.alarms.push_back(seq.intervals[a]);
            try {
                audit.inference = infer_times(seq, i, l, rep.delays.at(w));
                contributions.push_back(audit.inference);
            } catch (const InconsistentAlarms&) {
                epi.flags.push_back("inconsistent");
            }
            epi.per_window[w] = std::move(audit);
        }
        try {
            const IntervalPair final = intersect_inferences(contributions);
            epi.mu_lo = final.mu_lo;
            epi.mu_hi = final.mu_hi;
            epi.nu_lo = final.nu_lo;
            epi.nu_hi = final.nu_hi;
        } catch (const InconsistentAlarms&) {
            epi.flags.push_back("inconsistent");
        }
        rep.episodes.push_back(std::move(epi));
    }
    return rep;
}

}  // namespace ifd
