#include "ifdetect/simkit.hpp"

#include <cmath>
#include <random>

namespace ifd {

void validate_schedule(const FaultSchedule& schedule, long dim, long n_samples) {
    long prev_nu = 0;
    for (std::size_t q = 0; q < schedule.episodes.size(); ++q) {
        const auto& e = schedule.episodes[q];
        if (e.direction.size() != dim)
            throw DimensionMismatch("episode " + std::to_string(q + 1) +
                                    " direction dimension mismatch");
        if (!(e.magnitude > 0.0))
            throw std::domain_error("episode magnitudes must be positive");
        if (e.mu < 1 || e.nu > n_samples + 1 || e.mu >= e.nu)
            throw OverlappingEpisodes("episode " + std::to_string(q + 1) +
                                      " times out of range or empty");
        if (e.mu <= prev_nu)
            throw OverlappingEpisodes("episode " + std::to_string(q + 1) +
                                      " starts before the previous one ended");
        prev_nu = e.nu;
    }
}

Mat gen_gaussian_stream(const Vec& mean, const Mat& cov, long n, std::uint64_t seed) {
    const long p = mean.size();
    Eigen::LLT<Mat> llt(((cov + cov.transpose()) / 2.0).eval());
    if (llt.info() != Eigen::Success)
        throw SingularCovariance("covariance is not positive definite");
    const Mat chol = llt.matrixL();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    Mat out(n, p);
    Vec z(p);
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < p; ++j) z[j] = unit(rng);
        out.row(i) = (mean + chol * z).transpose();
    }
    return out;
}

Mat inject_faults(const Eigen::Ref<const Mat>& stream, const FaultSchedule& schedule) {
    validate_schedule(schedule, stream.cols(), stream.rows());
    Mat out = stream;
    for (const auto& e : schedule.episodes) {
        const Vec step = e.direction * e.magnitude;
        for (long k = e.mu; k < e.nu; ++k) out.row(k - 1) += step.transpose();
    }
    return out;
}

FaultSchedule random_schedule(const Vec& direction, long count, double f_lower, long tau_lower,
                              long start, std::uint64_t seed) {
    if (count < 1) throw std::domain_error("episode count must be >= 1");
    if (!(f_lower > 0.0) || tau_lower < 1 || start < 1)
        throw std::domain_error("lower bounds and start must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> tau(tau_lower, 2 * tau_lower);
    std::uniform_real_distribution<double> mag(f_lower, 1.5 * f_lower);
    FaultSchedule schedule;
    long mu = start;
    for (long q = 0; q < count; ++q) {
        FaultEpisode e;
        e.mu = mu;
        e.nu = mu + tau(rng);
        e.direction = direction;
        e.magnitude = mag(rng);
        mu = e.nu + tau(rng);
        schedule.episodes.push_back(std::move(e));
    }
    return schedule;
}

void validate_cstr_config(const CstrConfig& cfg) {
    const double positives[] = {cfg.flow_nominal,  cfg.volume,        cfg.feed_conc,
                                cfg.feed_temp,     cfg.rate_const,    cfg.activation_temp,
                                cfg.density,       cfg.heat_capacity, cfg.heat_transfer,
                                cfg.coolant_temp_nominal, cfg.sampling_interval_s};
    for (double v : positives)
        if (!(v > 0.0)) throw std::domain_error("CSTR physical parameters must be positive");
    if (cfg.substeps < 1) throw std::domain_error("substeps must be >= 1");
    if (cfg.noise_conc_std < 0.0 || cfg.noise_temp_std < 0.0)
        throw std::domain_error("noise standard deviations must be >= 0");
}

namespace {

struct CstrState {
    double conc;       // C_A
    double temp;       // T
    double integ_temp; // integral of temperature error
    double integ_conc; // integral of concentration error
};

struct CstrInputs {
    double coolant;  // T_c
    double flow;     // q
};

CstrInputs controller(const CstrConfig& c, const CstrState& s) {
    const double e_temp = c.temp_setpoint - s.temp;
    const double e_conc = c.conc_setpoint - s.conc;
    return {c.coolant_temp_nominal + c.kc_temp * (e_temp + c.ki_temp * s.integ_temp),
            c.flow_nominal + c.kc_conc * (e_conc + c.ki_conc * s.integ_conc)};
}

CstrState derivatives(const CstrConfig& c, const CstrState& s, double v1, double v2) {
    const CstrInputs u = controller(c, s);
    const double rate = c.rate_const * std::exp(-c.activation_temp / s.temp) * s.conc;
    CstrState d;
    d.conc = u.flow / c.volume * (c.feed_conc - s.conc) - rate + v1;
    d.temp = u.flow / c.volume * (c.feed_temp - s.temp) +
             (-c.heat_reaction) / (c.density * c.heat_capacity) * rate +
             c.heat_transfer / (c.volume * c.density * c.heat_capacity) * (u.coolant - s.temp) +
             v2;
    d.integ_temp = c.temp_setpoint - s.temp;
    d.integ_conc = c.conc_setpoint - s.conc;
    return d;
}

CstrState axpy(const CstrState& s, double h, const CstrState& d) {
    return {s.conc + h * d.conc, s.temp + h * d.temp, s.integ_temp + h * d.integ_temp,
            s.integ_conc + h * d.integ_conc};
}

void rk4_step(const CstrConfig& c, CstrState& s, double h, double v1, double v2) {
    const CstrState k1 = derivatives(c, s, v1, v2);
    const CstrState k2 = derivatives(c, axpy(s, h / 2, k1), v1, v2);
    const CstrState k3 = derivatives(c, axpy(s, h / 2, k2), v1, v2);
    const CstrState k4 = derivatives(c, axpy(s, h, k3), v1, v2);
    s.conc += h / 6 * (k1.conc + 2 * k2.conc + 2 * k3.conc + k4.conc);
    s.temp += h / 6 * (k1.temp + 2 * k2.temp + 2 * k3.temp + k4.temp);
    s.integ_temp += h / 6 * (k1.integ_temp + 2 * k2.integ_temp + 2 * k3.integ_temp + k4.integ_temp);
    s.integ_conc += h / 6 * (k1.integ_conc + 2 * k2.integ_conc + 2 * k3.integ_conc + k4.integ_conc);
}

}  // namespace

namespace {

// Closed-loop equilibrium: setpoints are met exactly (integral action),
// and the integrator states are solved so that the controller outputs the
// flow and coolant temperature that zero the state derivatives there.
CstrState equilibrium(const CstrConfig& c) {
    const double rate =
        c.rate_const * std::exp(-c.activation_temp / c.temp_setpoint) * c.conc_setpoint;
    const double flow_eq = c.volume * rate / (c.feed_conc - c.conc_setpoint);
    const double coolant_eq =
        c.temp_setpoint -
        (flow_eq / c.volume * (c.feed_temp - c.temp_setpoint) +
         (-c.heat_reaction) / (c.density * c.heat_capacity) * rate) *
            c.volume * c.density * c.heat_capacity / c.heat_transfer;
    CstrState s;
    s.conc = c.conc_setpoint;
    s.temp = c.temp_setpoint;
    s.integ_temp = (coolant_eq - c.coolant_temp_nominal) / (c.kc_temp * c.ki_temp);
    s.integ_conc = (flow_eq - c.flow_nominal) / (c.kc_conc * c.ki_conc);
    return s;
}

}  // namespace

Mat cstr_simulate(const CstrConfig& cfg, long n_steps, std::uint64_t seed,
                  const FaultSchedule& sensor_faults) {
    validate_cstr_config(cfg);
    validate_schedule(sensor_faults, 4, n_steps);
    if (!(cfg.conc_setpoint > 0.0 && cfg.conc_setpoint < cfg.feed_conc))
        throw std::domain_error("concentration setpoint must lie in (0, feed_conc)");
    if (cfg.kc_temp * cfg.ki_temp == 0.0 || cfg.kc_conc * cfg.ki_conc == 0.0)
        throw std::domain_error("both loops need nonzero proportional and integral gains");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);

    CstrState s = equilibrium(cfg);
    const double dt_min = cfg.sampling_interval_s / 60.0;  // minutes
    const double h = dt_min / cfg.substeps;

    Mat out(n_steps, 4);
    for (long k = 0; k < n_steps; ++k) {
        const double v1 = cfg.noise_conc_std * unit(rng);
        const double v2 = cfg.noise_temp_std * unit(rng);
        for (int i = 0; i < cfg.substeps; ++i) rk4_step(cfg, s, h, v1, v2);
        if (!(s.conc > -0.5 && s.conc < 5.0 * cfg.feed_conc) ||
            !(s.temp > 200.0 && s.temp < 700.0))
            throw IntegrationDiverged("reactor state left physical bounds at sample " +
                                      std::to_string(k + 1));
        const CstrInputs u = controller(cfg, s);
        out(k, 0) = s.conc;
        out(k, 1) = s.temp;
        out(k, 2) = u.coolant;
        out(k, 3) = u.flow;
    }
    for (const auto& e : sensor_faults.episodes) {
        const Vec step = e.direction * e.magnitude;
        for (long k = e.mu; k < e.nu && k <= n_steps; ++k) out.row(k - 1) += step.transpose();
    }
    return out;
}

}  // namespace ifd
