#include "ifdetect/stat_core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ifd {

namespace {

// Validates the fitted/loaded moments and caches the inverse.
GaussianModel finalize_model(Vec mean, Mat cov, long n_train) {
    const long p = mean.size();
    if (cov.rows() != p || cov.cols() != p)
        throw DimensionMismatch("covariance shape does not match mean dimension");
    if (n_train < p + 2)
        throw TooFewSamples("need at least p+2 training samples, got " +
                            std::to_string(n_train));

    cov = ((cov + cov.transpose()) / 2.0).eval();  // enforce exact symmetry

    Eigen::SelfAdjointEigenSolver<Mat> es(cov);
    const double lmax = es.eigenvalues().maxCoeff();
    const double lmin = es.eigenvalues().minCoeff();
    if (!(lmax > 0.0) || lmin <= 0.0 || lmin / lmax < 1e-12)
        throw SingularCovariance("sample covariance is singular or near-singular (rcond " +
                                 std::to_string(lmax > 0 ? lmin / lmax : 0.0) + ")");

    GaussianModel m;
    m.mean_hat = std::move(mean);
    m.cov_hat = std::move(cov);
    m.cov_inv = m.cov_hat.llt().solve(Mat::Identity(p, p));
    m.n_train = n_train;
    m.dim = p;

    const double residual = (m.cov_inv * m.cov_hat - Mat::Identity(p, p)).cwiseAbs().maxCoeff();
    if (residual >= 1e-8)
        throw SingularCovariance("covariance inverse residual " + std::to_string(residual));
    return m;
}

}  // namespace

GaussianModel fit_model(const Eigen::Ref<const Mat>& samples) {
    const long n = samples.rows();
    const long p = samples.cols();
    if (p < 1) throw DimensionMismatch("samples must have at least one column");
    if (n < p + 2)
        throw TooFewSamples("need at least p+2 samples, got " + std::to_string(n));

    Vec mean = samples.colwise().mean();
    Mat centered = samples.rowwise() - mean.transpose();
    Mat cov = (centered.transpose() * centered) / double(n - 1);
    return finalize_model(std::move(mean), std::move(cov), n);
}

GaussianModel model_from_moments(const Vec& mean, const Mat& cov, long n_train) {
    return finalize_model(mean, cov, n_train);
}

void validate_chart_config(const ChartConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw std::domain_error("alpha must lie in (0,1)");
    if (cfg.window < 1) throw std::domain_error("window must be >= 1");
}

namespace detail {

namespace {

// Lentz continued fraction for the incomplete beta; valid for
// x < (a+1)/(a+b+2), the complementary range is handled by symmetry.
double beta_cf(double a, double b, double x) {
    constexpr double eps = 1e-15;
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 400; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw std::domain_error("beta parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(ln_front) * beta_cf(a, b, x) / a;
    return 1.0 - std::exp(ln_front) * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace detail

double f_quantile(double alpha, long d1, long d2) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("f_quantile: alpha must lie in (0,1)");
    if (d1 < 1 || d2 < 1)
        throw std::domain_error("f_quantile: degrees of freedom must be >= 1");

    const double a = d1 / 2.0;
    const double b = d2 / 2.0;

    // With y = d2/(d2 + d1 x), P(F > x) = I_y(b, a); solve I_y(b, a) = alpha
    // for y by safeguarded Newton on a bisection bracket.
    const double target = alpha;
    double lo = 0.0, hi = 1.0;
    double y = 0.5;
    const double ln_beta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    for (int it = 0; it < 200; ++it) {
        const double fy = detail::regularized_incomplete_beta(b, a, y) - target;
        if (fy > 0.0)
            hi = y;
        else
            lo = y;
        // dI_y(b,a)/dy = y^(b-1) (1-y)^(a-1) / B(b,a)
        double step = 0.0;
        if (y > 0.0 && y < 1.0) {
            const double ln_pdf = (b - 1.0) * std::log(y) + (a - 1.0) * std::log1p(-y) + ln_beta;
            const double pdf = std::exp(ln_pdf);
            if (pdf > 0.0 && std::isfinite(pdf)) step = fy / pdf;
        }
        double ynext = y - step;
        if (!(ynext > lo && ynext < hi)) ynext = 0.5 * (lo + hi);
        if (std::abs(ynext - y) <= 1e-12 * std::max(ynext, 1e-300)) {
            y = ynext;
            break;
        }
        y = ynext;
    }
    return double(d2) * (1.0 - y) / (double(d1) * y);
}

double control_limit(const GaussianModel& model, const ChartConfig& cfg) {
    validate_chart_config(cfg);
    const double n = double(model.n_train);
    const double p = double(model.dim);
    const double w = double(cfg.window);
    const double f = f_quantile(cfg.alpha, model.dim, model.n_train - model.dim);
    return p * (n + w) * (n - 1.0) / (n * w * (n - p)) * f;
}

double hotelling_t2(const GaussianModel& model, const Eigen::Ref<const Vec>& window_mean) {
    if (window_mean.size() != model.dim)
        throw DimensionMismatch("window mean has dimension " +
                                std::to_string(window_mean.size()) + ", model expects " +
                                std::to_string(model.dim));
    const Vec d = window_mean - model.mean_hat;
    return d.dot(model.cov_inv * d);
}

}  // namespace ifd
