#pragma once

#include <optional>
#include <vector>

#include "anisolt/local_time.hpp"
#include "anisolt/metric.hpp"
#include "anisolt/sampler.hpp"

namespace anisolt {

/// Discretized X^{-1}(x) ∩ T: for each requested order q, the flat indices of
/// order-q anisotropic dyadic cells of T that the sampled field approaches.
struct LevelSetEstimate {
  Point level;
  HurstVector H{0.5};
  Box domain;
  std::vector<int> orders;
  std::vector<double> eps;                     // per order (median cell oscillation)
  std::vector<std::size_t> counts;             // N_q
  std::vector<std::size_t> total_cells;        // cells of order q in T
  std::vector<std::vector<std::size_t>> cells; // flagged flat indices, ascending
  std::optional<double> she_beta;              // set for heat-equation models
  std::size_t components = 1;

  std::size_t count_at(int order) const;
};

/// Flags order-q cells of the sample's domain. For scalar fields a cell is
/// flagged when its values (plus the first grid point past its upper faces)
/// bracket x, or when min |X - x| is at most the cell's oscillation. For
/// d >= 2, min |X - x| <= eps_q with eps_q the median cell oscillation.
/// Needs at least two grid points per cell per axis at the finest order;
/// coarser grids are rejected.
LevelSetEstimate extract_level_set(const FieldSample& sample, PointView x, const HurstVector& H,
                                   const std::vector<int>& orders);

struct DimensionFit {
  double dimension = 0.0;
  double std_error = 0.0;
  double target = 0.0;                     // Q - d
  std::optional<double> parabolic_target;  // 2 + N - d (2 - beta)/2 for heat-equation models
  std::vector<int> orders_used;
  std::vector<double> mean_log2_counts;
  bool flagged = false;
};

/// OLS slope of mean log2 N_q against q over replicate estimates (zero counts
/// skipped). The two finest orders are dropped when their mean count is
/// below 10. Flagged (and NaN) with fewer than four usable orders.
DimensionFit box_dimension(const std::vector<LevelSetEstimate>& replicates, const std::vector<int>& orders);
DimensionFit box_dimension(const LevelSetEstimate& estimate, const std::vector<int>& orders);

/// Euclidean Hausdorff dimension of the level set,
/// min_k { sum_{j<=k} H_k/H_j + N - k - H_k d } over sorted H. Empty when
/// d >= Q (the level set is then empty).
std::optional<double> euclidean_dimension_formula(const HurstVector& H, double d);
/// The same value through the index tau with
/// sum_{j<tau} 1/H_j <= d < sum_{j<=tau} 1/H_j.
std::optional<double> euclidean_dimension_tau_form(const HurstVector& H, double d);

/// N_q * phi(c 2^{-q}) per order (NaN where the gauge is undefined).
std::vector<double> gauge_mass_diagnostic(const LevelSetEstimate& estimate, const std::vector<int>& orders,
                                          double c = 1.0, Gauge gauge = Gauge::loglog);

}  // namespace anisolt
