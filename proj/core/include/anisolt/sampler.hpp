#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anisolt/covariance.hpp"
#include "anisolt/metric.hpp"

namespace anisolt {

/// Index points of a sampled field, each carrying the Lebesgue measure of the
/// cell it represents.
struct Grid {
  std::vector<Point> points;
  std::vector<double> weights;
  std::string spec;  // human-readable construction record

  std::size_t size() const { return points.size(); }
  std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }
  double total_weight() const;

  enum class Placement { center, upper };
  /// Regular product grid over `box` with counts[j] cells on axis j. Each
  /// point represents its cell; `upper` places it at the cell's upper corner.
  static Grid product(const Box& box, const std::vector<long>& counts,
                      Placement placement = Placement::center);
};

struct FieldSample {
  std::shared_ptr<const Grid> grid;
  Eigen::MatrixXd values;  // grid.size() x d
  ModelConfig model;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;

  std::size_t components() const { return static_cast<std::size_t>(values.cols()); }
};

class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(std::size_t leading_minor, double max_jitter);
  std::size_t leading_minor() const { return minor_; }

 private:
  std::size_t minor_;
};

class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(double condition_number);
  double condition_number() const { return cond_; }

 private:
  double cond_;
};

struct GramMatrix {
  Eigen::MatrixXd K;
  std::size_t flagged = 0;  // entries whose quadrature was flagged
};

/// Gram matrix of the scalar field (the inner field for Transformed models).
GramMatrix gram_matrix(const CovarianceModel& model, const std::vector<Point>& points);

/// Cholesky factor of K + lambda * trace(K)/M * I, with lambda stepping
/// 1e-12, 1e-11, ..., 1e-8 (the first that factors).
struct JitteredCholesky {
  Eigen::MatrixXd L;
  double lambda = 0.0;
};
JitteredCholesky jittered_cholesky(const Eigen::MatrixXd& K);

/// Draws realizations of a model on a fixed grid. The factorization is done
/// once; draws are read-only and may run concurrently.
class GaussianSampler {
 public:
  GaussianSampler(const CovarianceModel& model, std::shared_ptr<const Grid> grid);

  /// Realization for substream (seed, replicate) with d i.i.d. scalar
  /// components (d is forced to A.rows() for Transformed models).
  FieldSample draw(std::uint64_t seed, std::uint64_t replicate, std::size_t d = 1) const;

  const Grid& grid() const { return *grid_; }
  double jitter() const { return lambda_; }
  std::size_t flagged_entries() const { return flagged_; }
  /// True when the Brownian increment factor is used instead of a dense one.
  bool brownian_path() const { return brownian_; }

 private:
  CovarianceModel model_;
  std::shared_ptr<const Grid> grid_;
  Eigen::MatrixXd L_;
  double lambda_ = 0.0;
  std::size_t flagged_ = 0;
  bool brownian_ = false;
  std::vector<std::size_t> order_;  // ascending time order for the Brownian factor
};

/// Single draw; prefer GaussianSampler when drawing many replicates.
FieldSample sample(const CovarianceModel& model, const Grid& grid, std::size_t d, std::uint64_t seed);

struct ConditionalVariance {
  double variance = 0.0;
  double condition_number = 1.0;
  bool flagged = false;
};

/// Var(Y(t) | Y(t^1), ..., Y(t^n)) = Var Y(t) - c^T K^{-1} c.
/// Throws SingularMatrixError when K is numerically singular.
ConditionalVariance conditional_variance(const CovarianceModel& model, PointView t,
                                         const std::vector<Point>& conditioners);

struct SlndReport {
  std::size_t configs = 0;
  std::size_t n_max = 0;
  /// min over configurations of condVar / min_{1<=i<=n} rho^2(t, t^i)
  double min_ratio = 0.0;
  /// the same with t^0 = 0 included in the minimum
  double min_ratio_origin = 0.0;
  std::vector<double> ratios;
  std::vector<double> ratios_origin;
  std::vector<std::size_t> sizes;
  std::size_t skipped = 0;
  std::size_t flagged = 0;
};

/// condVar / min rho^2 for one configuration; `origin` adds t^0 = 0 to the
/// minimum (Y(0) = 0 for every model here, so it never conditions).
struct SlndRatio {
  std::optional<double> ratio;
  double ratio_origin = 0.0;
  bool flagged = false;
};
SlndRatio slnd_ratio(const CovarianceModel& model, const HurstVector& H_metric, PointView t,
                     const std::vector<Point>& conditioners);

/// Strong local nondeterminism scan over random configurations
/// (t; t^1..t^n), n uniform in 1..n_max, points uniform in `domain`.
/// Configuration k uses substream (seed, k), so a scan with 2c configs
/// contains the scan with c configs.
SlndReport slnd_scan(const CovarianceModel& model, const Box& domain, const HurstVector& H_metric,
                     std::size_t configs, std::size_t n_max, std::uint64_t seed, unsigned threads = 1);

/// CSV dump: '#'-prefixed header lines (model config, seed, replicate, grid
/// spec, cell weights), then "index,t0..t{N-1},x0..x{d-1}" rows in grid order.
std::string write_field_sample_csv(const FieldSample& sample);
FieldSample read_field_sample_csv(const std::string& text);

}  // namespace anisolt
