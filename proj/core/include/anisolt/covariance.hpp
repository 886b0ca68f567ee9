#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "anisolt/metric.hpp"

namespace anisolt {

/// A covariance value; `flagged` marks quadrature that did not reach the
/// requested relative accuracy (1e-6) within the refinement budget.
struct CovEval {
  double value = 0.0;
  bool flagged = false;
};

/// Fundamental solution of the heat equation on R^N:
/// (4 pi t)^{-N/2} exp(-|x|^2 / (4t)) for t > 0, and 0 otherwise.
double heat_kernel(double t, PointView x);

/// Covariance of the stochastic heat equation driven by space-time white noise
/// (N = 1): \int_0^{t∧s} G(t + s - 2r, x - y) dr, in closed form.
double cov_she_white(double t, double x, double s, double y);

/// Covariance of the stochastic heat equation driven by noise white in time
/// with spatial spectral density |xi|^{beta-N} (normalization constant 1):
///   \int_0^{t∧s} dr \int e^{-(t+s-2r)|xi|^2} cos<xi, x-y> |xi|^{beta-N} dxi.
CovEval cov_she_riesz(double t, PointView x, double s, PointView y, double beta);

/// E|u(t,x) - u(s,y)|^2 for the Riesz-noise solution; uses cancellation-free
/// integrands on equal-time and equal-position lags.
CovEval increment_variance_she_riesz(double t, PointView x, double s, PointView y, double beta);
double increment_variance_she_white(double t, double x, double s, double y);

/// Additive field Y(t) = sum_j B^{H_j}_j(t_j) of independent fractional
/// Brownian motions.
double cov_fbm_type(PointView t, PointView s, const HurstVector& H);

namespace riesz {
/// \int_{S^{N-1}} cos(u w_1) dw.
double sphere_cos_average(std::size_t N, double u);
/// K(a) = \int_{R^N} e^{-a|xi|^2} cos<xi, delta> |xi|^{beta-N} dxi, delta = |delta|.
CovEval kernel(std::size_t N, double beta, double a, double delta);
/// Spectral radial quadrature of K(a); accurate while delta/sqrt(a) is moderate.
CovEval kernel_spectral(std::size_t N, double beta, double a, double delta);
/// The same K(a) through its physical-space form (2pi)^N / c_{N,beta} E|delta + sqrt(2a) Z|^{-beta},
/// whose integrand is positive.
CovEval kernel_physical(std::size_t N, double beta, double a, double delta);
/// K(a) at delta = 0: pi^{N/2} Gamma(beta/2) / Gamma(N/2) a^{-beta/2}.
double kernel_at_origin(std::size_t N, double beta, double a);
}  // namespace riesz

struct FbmType {
  HurstVector H;
};
struct SheWhite {};
struct SheRiesz {
  std::size_t N = 1;
  double beta = 0.5;
};
class CovarianceModel;
struct Transformed {
  Eigen::MatrixXd A;
  std::shared_ptr<const CovarianceModel> inner;
};

using ModelConfig = std::map<std::string, std::string>;

/// Description of a mean-zero Gaussian field: the scalar family (or a linear
/// transform v = A u of i.i.d. copies) together with the index domain.
class CovarianceModel {
 public:
  using Kind = std::variant<FbmType, SheWhite, SheRiesz, Transformed>;

  static CovarianceModel fbm(HurstVector H, Box domain);
  /// Index points are (t, x) with t > 0.
  static CovarianceModel she_white(Box domain);
  static CovarianceModel she_riesz(std::size_t N, double beta, Box domain);
  static CovarianceModel transformed(Eigen::MatrixXd A, CovarianceModel inner);

  const Kind& kind() const { return kind_; }
  const Box& domain() const { return domain_; }
  std::string kind_name() const;

  /// Dimension of an index point.
  std::size_t index_dim() const;
  /// Number of correlated components for Transformed, otherwise 1.
  std::size_t components() const;
  bool is_transformed() const { return std::holds_alternative<Transformed>(kind_); }
  /// The scalar model whose i.i.d. copies make up the field.
  const CovarianceModel& scalar_model() const;
  /// Exponents of the metric the field satisfies two-sided increment bounds in.
  /// SHE: ((2-beta)/4, (2-beta)/2, ..., (2-beta)/2).
  HurstVector induced_hurst() const;
  /// Parameter beta of SHE models (1 for white noise).
  double she_beta() const;
  bool is_she() const;

  /// Cov(Y(t), Y(s)) of the scalar field.
  CovEval scalar_covariance(PointView t, PointView s) const;
  /// Cov(v_i(t), v_j(s)); for non-transformed models the components are i.i.d.
  CovEval covariance(std::size_t i, std::size_t j, PointView t, PointView s) const;
  CovEval variance(PointView t) const { return scalar_covariance(t, t); }
  /// E(Y(t) - Y(s))^2 of the scalar field.
  CovEval increment_variance(PointView t, PointView s) const;

  ModelConfig to_config() const;
  static CovarianceModel from_config(const ModelConfig& config);

 private:
  CovarianceModel(Kind kind, Box domain) : kind_(std::move(kind)), domain_(std::move(domain)) {}
  Kind kind_;
  Box domain_;
};

/// Cov(v_i(t), v_j(s)) = (A A^T)_{ij} Cov(u(t), u(s)) for v = A u with
/// i.i.d. components of u.
CovEval cov_transformed(const Eigen::MatrixXd& A, const CovarianceModel& inner, std::size_t i,
                        std::size_t j, PointView t, PointView s);

std::string format_list(std::span<const double> values);
std::vector<double> parse_list(const std::string& text);

}  // namespace anisolt
