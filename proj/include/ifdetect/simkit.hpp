#pragma once

#include <cstdint>
#include <vector>

#include "ifdetect/stat_core.hpp"

namespace ifd {

/// One scheduled fault episode: active on sample indices [mu, nu)
/// (1-based), additive step direction * magnitude.
struct FaultEpisode {
    long mu = 0;
    long nu = 0;
    Vec direction;
    double magnitude = 0.0;
};

/// Strictly ordered episodes: mu_q < nu_q < mu_{q+1}.
struct FaultSchedule {
    std::vector<FaultEpisode> episodes;
};

void validate_schedule(const FaultSchedule& schedule, long dim, long n_samples);

/// n independent draws from N(mean, cov), one row per sample.
/// Deterministic per seed.
Mat gen_gaussian_stream(const Vec& mean, const Mat& cov, long n, std::uint64_t seed);

/// Adds each episode's step to the scheduled sample range. The stream is
/// 1-based in time: row i holds sample k = i+1... row 0 is k = 1.
Mat inject_faults(const Eigen::Ref<const Mat>& stream, const FaultSchedule& schedule);

/// Draws `count` episodes along one direction with magnitudes and
/// durations at or above the given lower bounds (durations uniform in
/// [tau_lower, 2*tau_lower], magnitudes uniform in [f_lower, 1.5*f_lower]).
/// The first episode starts at `start`. Deterministic per seed.
FaultSchedule random_schedule(const Vec& direction, long count, double f_lower, long tau_lower,
                              long start, std::uint64_t seed);

/// Continuous stirred tank reactor with two PI loops; the shipped
/// defaults give an exact closed-loop steady state at
/// C_A = 0.5 mol/L, T = 350 K (coolant 300 K, feed 100 L/min).
/// Process noises v1, v2 are discrete-time white: held constant over each
/// sampling interval and added to the state derivatives.
struct CstrConfig {
    // physical parameters (minutes, litres, moles, kelvin)
    double flow_nominal = 100.0;       // q   [L/min]
    double volume = 100.0;             // V   [L]
    double feed_conc = 1.0;            // C_Af [mol/L]
    double feed_temp = 350.0;          // T_f [K]
    double rate_const = 7.2e10;        // k0  [1/min]
    double activation_temp = 8750.0;   // E/R [K]
    double heat_reaction = -5.0e4;     // dH  [J/mol]
    double density = 1000.0;           // rho [g/L]
    double heat_capacity = 0.239;      // C_p [J/(g K)]
    double heat_transfer = 5.0e4;      // UA  [J/(min K)]
    double coolant_temp_nominal = 300.0;  // T_c [K]

    // controller: T_c regulates T, q regulates C_A
    double temp_setpoint = 350.0;
    double conc_setpoint = 0.5;
    double kc_temp = 4.0;    // [K coolant / K error]
    double ki_temp = 2.0;    // [1/min]
    double kc_conc = 30.0;   // [L/min per mol/L]
    double ki_conc = 100.0;  // [1/min]

    // discrete-time white noises on the two state derivatives
    double noise_conc_std = 0.0055;  // v1 [mol/(L min)]
    double noise_temp_std = 0.55;    // v2 [K/min]

    double sampling_interval_s = 30.0;
    int substeps = 10;  // RK4 steps per sampling interval
};

void validate_cstr_config(const CstrConfig& cfg);

/// Simulates the closed-loop reactor and returns one row per sampling
/// instant with the measured variables [C_A, T, T_c, q]. Sensor faults
/// from the schedule are added to the measurements only (4-dimensional
/// directions). Throws IntegrationDiverged if the state leaves physical
/// bounds.
Mat cstr_simulate(const CstrConfig& cfg, long n_steps, std::uint64_t seed,
                  const FaultSchedule& sensor_faults = {});

}  // namespace ifd
