#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>

namespace mmslam {

/// Symmetric 2n+1 point set; the central weight is kappa / (n + kappa).
struct SigmaPointOptions {
  double kappa = 1.0;
  /// Jitter added to a covariance that fails its Cholesky factorization.
  double regularization = 1e-9;
};

struct ConditionedGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  /// log N(z; predicted mean, innovation covariance)
  double log_marginal = 0.0;
  /// Squared Mahalanobis length of the innovation.
  double mahalanobis = 0.0;
  bool regularized = false;
};

using MeasurementFunction =
    std::function<std::optional<Eigen::VectorXd>(const Eigen::VectorXd& x)>;

/// Conditions N(mean, cov) on z = f(x) + v, v ~ N(0, noise_cov), with f
/// linearized statistically through the sigma points. Components listed in
/// `angular` have their residuals wrapped to (-pi, pi]. Returns nullopt if
/// f is undefined at any sigma point. Exact for affine f.
std::optional<ConditionedGaussian> sigma_point_condition(const Eigen::VectorXd& mean,
                                                         const Eigen::MatrixXd& cov,
                                                         const MeasurementFunction& f,
                                                         const Eigen::VectorXd& z,
                                                         const Eigen::MatrixXd& noise_cov,
                                                         std::span<const int> angular = {},
                                                         const SigmaPointOptions& options = {});

/// log N(x; 0, cov). Sets *regularized when cov needed jitter.
double log_gaussian_zero_mean(const Eigen::VectorXd& x, const Eigen::MatrixXd& cov,
                              double regularization = 1e-9, bool* regularized = nullptr);

}  // namespace mmslam
