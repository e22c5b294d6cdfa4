#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "ifdetect/detectability.hpp"
#include "ifdetect/monitor.hpp"
#include "ifdetect/simkit.hpp"
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

}  // namespace

TEST_CASE("warm-up: no statistic before W samples") {
    const GaussianModel m = example_model();
    MovingChart chart(m, {0.01, 3});
    CHECK_FALSE(chart.step(m.mean_hat).has_value());
    CHECK_FALSE(chart.step(m.mean_hat).has_value());
    CHECK(chart.step(m.mean_hat).has_value());
}

TEST_CASE("constant stream at the training mean never alarms") {
    const GaussianModel m = example_model();
    MovingChart chart(m, {0.01, 4});
    for (int k = 0; k < 200; ++k) {
        const auto res = chart.step(m.mean_hat);
        if (res) {
            CHECK(res->t2 == doctest::Approx(0.0));
            CHECK_FALSE(res->alarm);
        }
    }
}

TEST_CASE("a sustained strong shift alarms within W steps of full occupancy") {
    const GaussianModel m = example_model();
    const ChartConfig cfg{0.01, 7};
    Vec xi(2);
    xi << 0.2425, 0.9701;
    const double f = 4.0;  // whitened shift 2.367 > 2*delta_7
    IFParams params{xi, f, 1000, 1000, 1000, false};
    REQUIRE(appearance_detectable(m, params, cfg));

    MovingChart chart(m, cfg);
    const long mu = 50;
    long first_alarm = -1;
    for (long k = 1; k <= 80; ++k) {
        const Vec sample = k >= mu ? Vec(m.mean_hat + xi * f) : m.mean_hat;
        const auto res = chart.step(sample);
        if (res && res->alarm && first_alarm < 0) first_alarm = k;
    }
    REQUIRE(first_alarm > 0);
    CHECK(first_alarm >= mu);
    CHECK(first_alarm <= mu + cfg.window - 1);
}

TEST_CASE("sliding-window equivalence with a brute-force mean") {
    const GaussianModel m = example_model(200);
    const long w = 6;
    MovingChart chart(m, {0.05, w});
    const Mat stream = gen_gaussian_stream(m.mean_hat, m.cov_hat, 300, 99);
    for (long k = 0; k < stream.rows(); ++k) {
        const auto res = chart.step(stream.row(k).transpose());
        if (!res) continue;
        const Vec brute = stream.middleRows(k - w + 1, w).colwise().mean();
        const double expected = hotelling_t2(m, brute);
        CHECK(res->t2 == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("running sum stays exact over long streams") {
    const GaussianModel m = example_model(1000);
    const long w = 5;
    MovingChart chart(m, {0.01, w});
    std::mt19937_64 rng(5);
    std::normal_distribution<double> unit(0.0, 1.0);
    // mix of magnitudes to stress the compensated accumulation
    Mat tail(w, 2);
    for (long k = 1; k <= 70000; ++k) {
        Vec s(2);
        const double scale = (k % 97 == 0) ? 1e6 : 1.0;
        s << 6.0 + scale * unit(rng), 4.0 + scale * unit(rng);
        tail.row((k - 1) % w) = s.transpose();
        const auto res = chart.step(s);
        if (k >= 69990) {
            const Vec brute = tail.colwise().mean();
            CHECK(res->t2 == doctest::Approx(hotelling_t2(m, brute)).epsilon(1e-9));
        }
    }
}

TEST_CASE("step rejects dimension mismatches") {
    const GaussianModel m = example_model();
    MovingChart chart(m, {0.01, 3});
    CHECK_THROWS_AS(chart.step(Vec::Zero(3)), DimensionMismatch);
}

TEST_CASE("extract_alarms on the documented examples") {
    {
        const std::vector<bool> flags{false, false, true, true, true, false, false};
        const AlarmSequence seq = extract_alarms(flags, 1);
        REQUIRE(seq.size() == 1);
        CHECK(seq.intervals[0].start == 3);
        REQUIRE(seq.intervals[0].closed());
        CHECK(*seq.intervals[0].end == 6);
    }
    {
        const AlarmSequence seq = extract_alarms(std::vector<bool>(10, false), 1);
        CHECK(seq.empty());
    }
    {
        const std::vector<bool> flags{true, true, false, false, true, true};
        const AlarmSequence seq = extract_alarms(flags, 1);
        REQUIRE(seq.size() == 2);
        CHECK(seq.intervals[0].start == 1);
        CHECK(*seq.intervals[0].end == 3);
        CHECK(seq.intervals[1].start == 5);
        CHECK_FALSE(seq.intervals[1].closed());
    }
}

TEST_CASE("extract_alarms is idempotent under concatenation at quiet boundaries") {
    std::mt19937_64 rng(77);
    std::bernoulli_distribution coin(0.35);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<bool> flags(120);
        for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = coin(rng);

        std::vector<std::size_t> quiet;
        for (std::size_t i = 1; i + 1 < flags.size(); ++i)
            if (!flags[i]) quiet.push_back(i);
        if (quiet.empty()) continue;
        const std::size_t cut = quiet[rng() % quiet.size()] + 1;  // first index of part 2

        const AlarmSequence whole = extract_alarms(flags, 1);
        const AlarmSequence left = extract_alarms(
            std::vector<bool>(flags.begin(), flags.begin() + long(cut)), 1);
        const AlarmSequence right = extract_alarms(
            std::vector<bool>(flags.begin() + long(cut), flags.end()), long(cut) + 1);

        AlarmSequence merged = left;
        merged.intervals.insert(merged.intervals.end(), right.intervals.begin(),
                                right.intervals.end());
        REQUIRE(merged.size() == whole.size());
        for (std::size_t i = 0; i < whole.size(); ++i) {
            CHECK(merged.intervals[i].start == whole.intervals[i].start);
            CHECK(merged.intervals[i].end == whole.intervals[i].end);
        }
        CHECK_NOTHROW(validate_interleaving(whole));
    }
}

TEST_CASE("validate_interleaving rejects malformed sequences") {
    AlarmSequence bad;
    bad.intervals.push_back({5, 10});
    bad.intervals.push_back({8, 12});  // starts before the previous ended
    CHECK_THROWS_AS(validate_interleaving(bad), InconsistentAlarms);

    AlarmSequence open_mid;
    open_mid.intervals.push_back({5, std::nullopt});
    open_mid.intervals.push_back({8, 12});
    CHECK_THROWS_AS(validate_interleaving(open_mid), InconsistentAlarms);
}
