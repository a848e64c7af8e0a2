#include "mmslam/sigma_points.hpp"

#include "mmslam/geom.hpp"

#include <cmath>
#include <numbers>

namespace mmslam {

namespace {

// Lower Cholesky factor, retrying with growing jitter.
Eigen::MatrixXd robust_cholesky(const Eigen::MatrixXd& m, double eps, bool& regularized) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const auto n = m.rows();
  const double scale = std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
  for (double jitter = eps * scale; jitter < 1e6 * scale; jitter *= 10.0) {
    regularized = true;
    llt.compute(m + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  regularized = true;
  return (m.diagonal().cwiseAbs().array() + eps).sqrt().matrix().asDiagonal();
}

void wrap_components(Eigen::VectorXd& v, std::span<const int> angular) {
  for (int i : angular) v(i) = wrap_angle(v(i));
}

}  // namespace

double log_gaussian_zero_mean(const Eigen::VectorXd& x, const Eigen::MatrixXd& cov,
                              double regularization, bool* regularized) {
  bool reg = false;
  const Eigen::MatrixXd l = robust_cholesky(cov, regularization, reg);
  if (regularized != nullptr) *regularized = *regularized || reg;
  const Eigen::VectorXd y = l.triangularView<Eigen::Lower>().solve(x);
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  return -0.5 * (y.squaredNorm() + log_det +
                 static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi));
}

std::optional<ConditionedGaussian> sigma_point_condition(const Eigen::VectorXd& mean,
                                                         const Eigen::MatrixXd& cov,
                                                         const MeasurementFunction& f,
                                                         const Eigen::VectorXd& z,
                                                         const Eigen::MatrixXd& noise_cov,
                                                         std::span<const int> angular,
                                                         const SigmaPointOptions& options) {
  const auto n = mean.size();
  const auto m = z.size();
  const double spread = static_cast<double>(n) + options.kappa;

  ConditionedGaussian out;
  const Eigen::MatrixXd l = robust_cholesky(spread * cov, options.regularization, out.regularized);

  const auto count = 2 * n + 1;
  Eigen::MatrixXd points(n, count);
  points.col(0) = mean;
  for (Eigen::Index i = 0; i < n; ++i) {
    points.col(1 + i) = mean + l.col(i);
    points.col(1 + n + i) = mean - l.col(i);
  }
  const double w0 = options.kappa / spread;
  const double wi = 0.5 / spread;

  Eigen::MatrixXd images(m, count);
  for (Eigen::Index k = 0; k < count; ++k) {
    auto y = f(points.col(k));
    if (!y || y->size() != m || !y->allFinite()) return std::nullopt;
    images.col(k) = *y;
  }

  // Deviations are taken relative to the central image so that azimuths
  // straddling the branch cut average correctly.
  Eigen::MatrixXd dev(m, count);
  for (Eigen::Index k = 0; k < count; ++k) {
    Eigen::VectorXd d = images.col(k) - images.col(0);
    wrap_components(d, angular);
    dev.col(k) = d;
  }
  Eigen::VectorXd mean_dev = w0 * dev.col(0);
  for (Eigen::Index k = 1; k < count; ++k) mean_dev += wi * dev.col(k);
  Eigen::VectorXd predicted = images.col(0) + mean_dev;

  Eigen::MatrixXd s = noise_cov;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, m);
  for (Eigen::Index k = 0; k < count; ++k) {
    const double w = k == 0 ? w0 : wi;
    const Eigen::VectorXd dy = dev.col(k) - mean_dev;
    s += w * dy * dy.transpose();
    c += w * (points.col(k) - mean) * dy.transpose();
  }

  Eigen::VectorXd innovation = z - predicted;
  wrap_components(innovation, angular);

  bool s_reg = false;
  const Eigen::MatrixXd ls = robust_cholesky(s, options.regularization, s_reg);
  out.regularized = out.regularized || s_reg;
  const auto tri = ls.triangularView<Eigen::Lower>();
  const Eigen::VectorXd y = tri.solve(innovation);
  out.mahalanobis = y.squaredNorm();
  const double log_det = 2.0 * ls.diagonal().array().log().sum();
  out.log_marginal =
      -0.5 * (out.mahalanobis + log_det + static_cast<double>(m) * std::log(2.0 * std::numbers::pi));

  // K = C S^-1 via the Cholesky factor.
  const Eigen::MatrixXd kt = tri.transpose().solve(tri.solve(c.transpose()));
  const Eigen::MatrixXd gain = kt.transpose();
  out.mean = mean + gain * innovation;
  Eigen::MatrixXd post = cov - gain * s * gain.transpose();
  post = 0.5 * (post + post.transpose());
  Eigen::LLT<Eigen::MatrixXd> check(post);
  if (check.info() != Eigen::Success) {
    out.regularized = true;
    post += options.regularization * Eigen::MatrixXd::Identity(n, n);
  }
  out.cov = std::move(post);
  return out;
}

}  // namespace mmslam
