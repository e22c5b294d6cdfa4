#pragma once

#include <Eigen/Dense>

#include "ifdetect/errors.hpp"

namespace ifd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Training-phase Gaussian estimate: sample mean, sample covariance
/// (divisor N-1) and its cached inverse. Immutable after construction and
/// safe to share across concurrent evaluators.
struct GaussianModel {
    Vec mean_hat;
    Mat cov_hat;
    Mat cov_inv;
    long n_train = 0;
    long dim = 0;
};

/// Chart parameters: significance level and window length.
struct ChartConfig {
    double alpha = 0.01;
    long window = 1;
};

/// Fits a GaussianModel from row-major samples (one sample per row).
/// Throws TooFewSamples for fewer than p+2 rows and SingularCovariance
/// when the sample covariance is numerically singular (reciprocal
/// condition estimate below 1e-12).
GaussianModel fit_model(const Eigen::Ref<const Mat>& samples);

/// Builds a model directly from given moments; used when the population
/// distribution is known (oracle mode) or when loading a stored model.
/// Applies the same validation as fit_model.
GaussianModel model_from_moments(const Vec& mean, const Mat& cov, long n_train);

/// Upper-tail F quantile: the x with P(F(d1,d2) > x) = alpha, computed by
/// inverting the regularized incomplete beta function to relative
/// tolerance 1e-10.
double f_quantile(double alpha, long d1, long d2);

/// Control limit of the moving-average T^2 chart with window W:
/// p(N+W)(N-1) / (N W (N-p)) * F_alpha(p, N-p). W=1 gives the
/// single-observation limit.
double control_limit(const GaussianModel& model, const ChartConfig& cfg);

/// Quadratic form (m - mean)^T S^-1 (m - mean) of a window mean.
double hotelling_t2(const GaussianModel& model, const Eigen::Ref<const Vec>& window_mean);

void validate_chart_config(const ChartConfig& cfg);

namespace detail {

/// Regularized incomplete beta I_x(a, b) via continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace detail

}  // namespace ifd
