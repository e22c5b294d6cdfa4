#pragma once

#include <filesystem>
#include <string>

#include "ifdetect/bank.hpp"
#include "ifdetect/simkit.hpp"

namespace ifd {

/// Stream CSV: header `k,var_1..var_p`, one row per sampling instant.
void write_stream_csv(const std::filesystem::path& path, const Eigen::Ref<const Mat>& stream);

/// Reads a stream CSV; throws ParseError with row/column diagnostics.
Mat read_stream_csv(const std::filesystem::path& path);

/// Ground-truth sidecar: header `q,mu,nu,f`, one row per episode.
void write_truth_csv(const std::filesystem::path& path, const FaultSchedule& schedule);
FaultSchedule read_truth_csv(const std::filesystem::path& path, const Vec& direction);

/// Versioned model document; loading re-validates and re-caches S^-1.
void save_model(const std::filesystem::path& path, const GaussianModel& model);
GaussianModel load_model(const std::filesystem::path& path);

std::string report_to_json(const BankReport& report);
void save_report(const std::filesystem::path& path, const BankReport& report);

/// Per-step statistic series for plotting: `k,W,t2,limit,alarm` rows for
/// every window of the bank.
void write_statistics_csv(const std::filesystem::path& path, const GaussianModel& model,
                          const BankConfig& cfg, const Eigen::Ref<const Mat>& stream);

}  // namespace ifd
