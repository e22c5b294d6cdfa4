#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ifdetect/detectability.hpp"
#include "ifdetect/monitor.hpp"
#include "support/oracles.hpp"

using namespace ifd;

namespace {

GaussianModel example_model(long n_train = 5000) {
    Vec mean(2);
    mean << 6.0, 4.0;
    Mat cov(2, 2);
    cov << 3.0, 2.6, 2.6, 4.0;
    return model_from_moments(mean, cov, n_train);
}

Vec example_xi() {
    Vec xi(2);
    xi << 0.2425, 0.9701;
    return xi;
}

IFParams example_params(double f = 4.0, long tau = 10) {
    return IFParams{example_xi(), f, tau, tau, tau, true};
}

// Largest magnitude whose whitened shift is <= the given threshold in
// floating point; keeps boundary tests deterministic.
double magnitude_at_threshold(const GaussianModel& m, const Vec& xi, double threshold) {
    double f = threshold / whitened_shift(m, xi, 1.0) * (1.0 - 5e-14);
    while (whitened_shift(m, xi, f) > threshold) f = std::nextafter(f, 0.0);
    return f;
}

}  // namespace

TEST_CASE("whitened shift: identity, example covariance, zero fault") {
    const GaussianModel iso = model_from_moments(Vec::Zero(2), Mat::Identity(2, 2), 100);
    Vec v(2);
    v << 3, 4;
    CHECK(whitened_shift(iso, v, 1.0) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(whitened_shift(iso, v, 0.0) == doctest::Approx(0.0));

    const GaussianModel m = example_model();
    const double s = whitened_shift(m, example_xi(), 4.0);
    CHECK(s * s == doctest::Approx(5.603697496183).epsilon(1e-9));
    CHECK(s == doctest::Approx(2.367213022984).epsilon(1e-9));
    // agrees with the cofactor-inverse quadratic form
    CHECK(s * s ==
          doctest::Approx(oracle::quadratic_form(m.cov_hat, Vec(example_xi() * 4.0)))
              .epsilon(1e-12));

    CHECK_THROWS_AS(whitened_shift(m, Vec::Zero(3), 1.0), DimensionMismatch);
}

TEST_CASE("disappearance detectability boundary") {
    CHECK(disappearance_detectable(7, 10));
    CHECK_FALSE(disappearance_detectable(11, 10));
    CHECK(disappearance_detectable(10, 10));
}

TEST_CASE("appearance detectability on the numerical example") {
    const GaussianModel m = example_model();
    CHECK(appearance_detectable(m, example_params(), {0.01, 7}));
    CHECK_FALSE(appearance_detectable(m, example_params(), {0.01, 2}));
    CHECK_THROWS_AS(appearance_detectable(m, example_params(), {0.01, 11}),
                    WindowExceedsPrevQuiet);
}

TEST_CASE("appearance condition is strict at the boundary") {
    const GaussianModel m = example_model();
    const double d2 = control_limit(m, {0.01, 1});
    for (long w : {1L, 3L, 7L}) {
        const double two_delta_w =
            2.0 * std::sqrt(d2 * (5000.0 + w) / (w * 5001.0));
        const double f = magnitude_at_threshold(m, example_xi(), two_delta_w);
        IFParams p = example_params(f, 1000);
        CHECK_FALSE(appearance_detectable(m, p, {0.01, w}));

        // worst-case window mean from the contraposition construction
        const Vec mean_at_worst = m.mean_hat + example_xi() * f / 2.0;
        CHECK(hotelling_t2(m, mean_at_worst) <= control_limit(m, {0.01, w}));
    }
}

TEST_CASE("if_detectable reproduces the example arithmetic") {
    const GaussianModel m = example_model();
    CHECK(if_detectable(m, example_params(), 0.01));

    const double d2 = control_limit(m, {0.01, 1});
    const double shift = whitened_shift(m, example_params());
    const double lhs = 5001.0 / (4.0 * d2) * shift * shift - 1.0;
    CHECK(lhs == doctest::Approx(758.6646355).epsilon(1e-6));
    CHECK(lhs > 5000.0 / 10.0);

    CHECK_FALSE(if_detectable(m, example_params(0.1), 0.01));
}

TEST_CASE("if_detectable reduces to the permanent-fault condition for huge durations") {
    const GaussianModel m = example_model();
    for (double f : {0.05, 0.15, 0.5, 4.0}) {
        IFParams p = example_params(f, 1000000);
        const PfDetectability pf = pf_detectable(m, p.direction, f, 0.01);
        CHECK(if_detectable(m, p, 0.01) == pf.detectable);
    }
}

TEST_CASE("admissible windows of the numerical example are [7, 10]") {
    const GaussianModel m = example_model();
    bool boundary = false;
    const WindowInterval w = admissible_windows(m, example_params(), 0.01, &boundary);
    CHECK(w.lo == 7);
    CHECK(w.hi == 10);
    CHECK(boundary);  // upper edge sits at min(tau_off_prev, tau_off_next)
}

TEST_CASE("admissible windows of a reactor-scale four-variable case are [5, 10]") {
    Mat cov = Mat::Identity(4, 4);
    cov(3, 3) = 4.0 / 3.0;  // conditional variance of the faulty sensor
    const GaussianModel m = model_from_moments(Vec::Zero(4), cov, 5000);
    Vec e4 = Vec::Zero(4);
    e4[3] = 1.0;
    const IFParams p{e4, 4.0, 10, 10, 10, true};
    const WindowInterval w = admissible_windows(m, p, 0.01);
    CHECK(w.lo == 5);
    CHECK(w.hi == 10);
}

TEST_CASE("undetectable faults get an empty interval") {
    const GaussianModel m = example_model();
    const WindowInterval w = admissible_windows(m, example_params(0.1), 0.01);
    CHECK(w.empty());
    CHECK(w.count() == 0);
}

TEST_CASE("alarm delays for the numerical example") {
    const GaussianModel m = example_model();
    const IFParams p = example_params();
    const long expected_mu[] = {6, 7, 7, 8};
    for (long w = 7; w <= 10; ++w) {
        const WindowDelays d = alarm_delays(m, p, w, 0.01);
        CHECK(d.mu_delay == expected_mu[w - 7]);
        CHECK(d.nu_delay == w - 1);
        CHECK(d.k_doublestar_offset == d.nu_delay - d.mu_delay);
    }
    CHECK_THROWS_AS(alarm_delays(m, p, 6, 0.01), NotDetectableWithW);
    CHECK_THROWS_AS(alarm_delays(m, p, 11, 0.01), NotDetectableWithW);
}

TEST_CASE("appearance delay is non-decreasing in W") {
    const GaussianModel m = example_model();
    const IFParams p = example_params();
    long prev = -1;
    for (long w = 7; w <= 10; ++w) {
        const WindowDelays d = alarm_delays(m, p, w, 0.01);
        CHECK(d.mu_delay >= prev);
        prev = d.mu_delay;
    }
}

TEST_CASE("permanent-fault specialization") {
    const GaussianModel m = example_model();
    const PfDetectability pf = pf_detectable(m, example_xi(), 4.0, 0.01);
    CHECK(pf.detectable);
    CHECK(pf.min_window == 7);  // (A-1)/N = 0.1517 -> W >= 7
    CHECK(pf_mu_delay(m, example_xi(), 4.0, 0.01, 7) == 6);

    // boundary: whitened shift^2 = 4 delta^2 / (N+1) exactly
    const double d2 = control_limit(m, {0.01, 1});
    const double f = magnitude_at_threshold(m, example_xi(),
                                            std::sqrt(4.0 * d2 / 5001.0));
    CHECK_FALSE(pf_detectable(m, example_xi(), f, 0.01).detectable);
}

TEST_CASE("optimal window lengths") {
    const GaussianModel m = example_model();
    CHECK(optimal_window_star(m, example_xi(), 4.0, 0.01) == 7);
    CHECK(optimal_window_star(m, example_xi(), 4.0, 0.01) ==
          admissible_windows(m, example_params(), 0.01).lo);
    CHECK(optimal_window_star(m, example_xi(), 100.0, 0.01) == 1);
    CHECK_THROWS_AS(optimal_window_star(m, example_xi(), 0.1, 0.01), NotPFDetectable);

    CHECK(optimal_window_sharp(10, 10, 10) == 10);
    CHECK(optimal_window_sharp(3, 9, 5) == 3);
    CHECK(optimal_window_sharp(1, 1, 1) == 1);
}

TEST_CASE("analyze builds a coherent report") {
    const GaussianModel m = example_model();
    const DetectabilityReport rep = analyze(m, example_params(), 0.01);
    CHECK(rep.detectable);
    CHECK(rep.admissible.lo == 7);
    CHECK(rep.admissible.hi == 10);
    CHECK(rep.w_sharp == 10);
    REQUIRE(rep.w_star.has_value());
    CHECK(*rep.w_star == 7);
    CHECK(rep.delays.size() == 4);
    CHECK(rep.admissible.contains(rep.w_sharp));  // Theorem-3 invariant
}

namespace {

struct RandomCase {
    GaussianModel model;
    IFParams params;
    double alpha;
};

RandomCase draw_case(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const long n = 40 + long(u01(rng) * 1960.0);
    const double rho = -0.85 + 1.7 * u01(rng);
    Mat cov(2, 2);
    const double s1 = 0.5 + 3.0 * u01(rng);
    const double s2 = 0.5 + 3.0 * u01(rng);
    cov << s1 * s1, rho * s1 * s2, rho * s1 * s2, s2 * s2;
    RandomCase c{model_from_moments(Vec::Zero(2), cov, n), IFParams{}, 0.0};
    c.alpha = 0.002 + 0.15 * u01(rng);

    const double angle = 2.0 * M_PI * u01(rng);
    Vec xi(2);
    xi << std::cos(angle), std::sin(angle);
    // place the fault strength around the detectability knee
    const double d2 = control_limit(c.model, {c.alpha, 1});
    const double target_excess = double(n) * std::pow(10.0, -1.5 + 2.0 * u01(rng));
    const double shift2 = (1.0 + target_excess) * 4.0 * d2 / double(n + 1);
    const double f = std::sqrt(shift2) / whitened_shift(c.model, xi, 1.0);

    std::uniform_int_distribution<long> tau(1, 40);
    c.params = IFParams{xi, f, tau(rng), tau(rng), tau(rng), false};
    return c;
}

}  // namespace

TEST_CASE("Theorem-1 equivalence: per-window conditions vs the interval") {
    std::mt19937_64 rng(20250809);
    for (int rep = 0; rep < 2000; ++rep) {
        const RandomCase c = draw_case(rng);
        const WindowInterval interval = admissible_windows(c.model, c.params, c.alpha);
        const long w_max = std::max({c.params.tau_off_prev, c.params.tau_on,
                                     c.params.tau_off_next}) +
                           3;
        for (long w = 1; w <= w_max; ++w) {
            bool direct = disappearance_detectable(w, c.params.tau_off_prev) &&
                          disappearance_detectable(w, c.params.tau_off_next);
            if (direct)
                direct = appearance_detectable(c.model, c.params, {c.alpha, w});
            REQUIRE(direct == interval.contains(w));
        }
    }
}

TEST_CASE("Theorem-3 equivalence: detectable iff W# is admissible") {
    std::mt19937_64 rng(424242);
    for (int rep = 0; rep < 2000; ++rep) {
        const RandomCase c = draw_case(rng);
        const WindowInterval interval = admissible_windows(c.model, c.params, c.alpha);
        const long w_sharp = optimal_window_sharp(c.params.tau_off_prev, c.params.tau_on,
                                                  c.params.tau_off_next);
        REQUIRE(if_detectable(c.model, c.params, c.alpha) == interval.contains(w_sharp));
        REQUIRE(if_detectable(c.model, c.params, c.alpha) == !interval.empty());
    }
}

TEST_CASE("Corollary-1 monotonicity: lower bounds only shrink the verdict") {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const RandomCase c = draw_case(rng);
        IFParams bounds = c.params;
        bounds.magnitude *= 0.3 + 0.7 * u01(rng);
        bounds.tau_on = std::max(long(1), long(bounds.tau_on * u01(rng)));
        bounds.tau_off_prev = std::max(long(1), long(bounds.tau_off_prev * u01(rng)));
        bounds.tau_off_next = std::max(long(1), long(bounds.tau_off_next * u01(rng)));
        bounds.is_lower_bound = true;

        if (if_detectable(c.model, bounds, c.alpha))
            REQUIRE(if_detectable(c.model, c.params, c.alpha));

        const WindowInterval tight = admissible_windows(c.model, bounds, c.alpha);
        const WindowInterval full = admissible_windows(c.model, c.params, c.alpha);
        for (long w = tight.lo; !tight.empty() && w <= tight.hi; ++w)
            REQUIRE(full.contains(w));
    }
}

TEST_CASE("Theorem-4 optimality of W*") {
    std::mt19937_64 rng(31415);
    for (int rep = 0; rep < 500; ++rep) {
        const RandomCase c = draw_case(rng);
        const PfDetectability pf =
            pf_detectable(c.model, c.params.direction, c.params.magnitude, c.alpha);
        if (!pf.detectable) continue;
        const long w_star = optimal_window_star(c.model, c.params.direction,
                                                c.params.magnitude, c.alpha);
        CHECK(w_star == pf.min_window);
        const WindowInterval interval = admissible_windows(c.model, c.params, c.alpha);
        if (interval.empty()) {
            // (i): if W* does not work, no window works
            REQUIRE_FALSE(interval.contains(w_star));
        } else {
            // (ii): W* is the smallest admissible window, hence delay-optimal
            REQUIRE(interval.lo == w_star);
            const long d_star = alarm_delays(c.model, c.params, w_star, c.alpha).mu_delay;
            for (long w = interval.lo; w <= interval.hi; ++w)
                REQUIRE(alarm_delays(c.model, c.params, w, c.alpha).mu_delay >= d_star);
        }
    }
}

TEST_CASE("coarser sampling eventually destroys detectability") {
    const GaussianModel m = example_model();
    IFParams p = example_params();
    REQUIRE_FALSE(admissible_windows(m, p, 0.01).empty());
    bool emptied = false;
    for (int halving = 0; halving < 8 && !emptied; ++halving) {
        p.tau_on = std::max(long(1), p.tau_on / 2);
        p.tau_off_prev = std::max(long(1), p.tau_off_prev / 2);
        p.tau_off_next = std::max(long(1), p.tau_off_next / 2);
        emptied = admissible_windows(m, p, 0.01).empty();
    }
    CHECK(emptied);
}

TEST_CASE("zero-noise worst-case streams hit the guaranteed delays exactly") {
    const GaussianModel m = example_model();
    const double alpha = 0.01;
    const long w = 7;
    const WindowDelays delays = alarm_delays(m, example_params(), w, alpha);
    REQUIRE(delays.mu_delay == 6);
    REQUIRE(delays.nu_delay == 6);

    const double d2w = control_limit(m, {alpha, w});
    const double shift = whitened_shift(m, example_params());
    const Vec fault = example_xi() * 4.0;
    // acceptance-region boundary point, pulled one ulp inside so the
    // pre-fault statistic stays at (not above) the limit
    const Vec boundary = fault * (std::sqrt(d2w) / shift) * (1.0 - 1e-12);

    const long mu = 201, nu = 226, n = 400;
    SUBCASE("offset opposing the fault delays the alarm to exactly mu + mu_delay") {
        MovingChart chart(m, {alpha, w});
        std::vector<bool> flags;
        for (long k = 1; k <= n; ++k) {
            Vec x = m.mean_hat - boundary;
            if (k >= mu && k < nu) x += fault;
            const auto res = chart.step(x);
            if (res) flags.push_back(res->alarm);
        }
        const AlarmSequence seq = extract_alarms(flags, w);
        REQUIRE(seq.size() == 1);
        CHECK(seq.intervals[0].start == mu + delays.mu_delay);
    }
    SUBCASE("offset aligned with the fault holds the alarm until nu + nu_delay") {
        MovingChart chart(m, {alpha, w});
        std::vector<bool> flags;
        for (long k = 1; k <= n; ++k) {
            Vec x = m.mean_hat + boundary;
            if (k >= mu && k < nu) x += fault;
            const auto res = chart.step(x);
            if (res) flags.push_back(res->alarm);
        }
        const AlarmSequence seq = extract_alarms(flags, w);
        REQUIRE(seq.size() == 1);
        CHECK(seq.intervals[0].start == mu);  // no headroom left: immediate alarm
        REQUIRE(seq.intervals[0].closed());
        CHECK(*seq.intervals[0].end == nu + delays.nu_delay);
    }
    SUBCASE("switching the offset at nu realizes both extremes at once") {
        MovingChart chart(m, {alpha, w});
        std::vector<bool> flags;
        for (long k = 1; k <= n; ++k) {
            Vec x = k < nu ? Vec(m.mean_hat - boundary) : Vec(m.mean_hat + boundary);
            if (k >= mu && k < nu) x += fault;
            const auto res = chart.step(x);
            if (res) flags.push_back(res->alarm);
        }
        const AlarmSequence seq = extract_alarms(flags, w);
        REQUIRE(seq.size() == 1);
        CHECK(seq.intervals[0].start == mu + delays.mu_delay);
        REQUIRE(seq.intervals[0].closed());
        CHECK(*seq.intervals[0].end == nu + delays.nu_delay);
    }
}
