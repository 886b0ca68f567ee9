#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "anisolt/covariance.hpp"
#include "anisolt/metric.hpp"
#include "anisolt/sampler.hpp"
#include "anisolt/stats.hpp"

namespace anisolt {

/// A sub-interval of the index domain, optionally cut down to an anisotropic
/// ball.
struct Region {
  Box box;
  std::optional<AnisoBall> ball;
  std::optional<HurstVector> H;  // exponents of the ball's metric

  static Region interval(Box box);
  /// B(center, radius) intersected with `within`.
  static Region ball_in(const AnisoBall& ball, HurstVector H, const Box& within);

  bool contains(PointView t) const;
};

/// Occupation histogram of X over a region: cubic bins of side `bin_width`
/// centered at anchor + bin_width * k, k in Z^d. Only occupied bins are
/// stored. Masses are summed over merged replicates.
struct LocalTimeEstimate {
  double bin_width = 0.0;
  Point anchor;
  std::map<std::vector<long>, double> mass;
  double region_measure = 0.0;  // summed over replicates
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  ModelConfig model;

  std::size_t dim() const { return anchor.size(); }
  double bin_volume() const;
  /// Bin centers of the occupied bins, in bin-index order.
  std::vector<Point> levels() const;
  /// Replicate-averaged L(x, S) at each occupied bin.
  std::vector<double> density() const;
  double density_at(PointView x) const;
  /// \int L(x,S) dx of the replicate average; equals the mean of
  /// lambda(S) over replicates.
  double total_mass() const;
  double max_density() const;

  /// Combines two estimates of the same binning into their replicate-weighted
  /// average. Associative and commutative.
  LocalTimeEstimate& merge(const LocalTimeEstimate& other);
};

/// Rows of `sample` whose index point lies in the region.
std::vector<std::size_t> region_rows(const FieldSample& sample, const Region& region);

/// L(x,S) as the weighted fraction of grid cells with X(t) in each bin, divided
/// by the bin volume. Throws on an empty region.
LocalTimeEstimate occupation_histogram(const FieldSample& sample, const Region& region,
                                       double bin_width, Point anchor = {});

/// Weighted occupation of the cube of side `width` centered at x, divided by
/// width^d: a single histogram bin placed at the level.
double local_time_at(const FieldSample& sample, const Region& region, PointView x, double width);

/// L_k(x, S) = sum_i w_i (k / 2pi)^{d/2} exp(-k |X(t_i) - x|^2 / 2).
double smoothed_local_time(const FieldSample& sample, const Region& region, PointView x, double k);

/// sup_x L(x, S) for scalar X from a histogram of `bins` equal bins spanning
/// [min X, max X] over the rows. Returns 0 when all weights are zero.
struct SupEstimate {
  double sup = 0.0;
  double range = 0.0;  // max X - min X
  double measure = 0.0;
};
SupEstimate sup_local_time(std::span<const double> values, std::span<const double> weights,
                           std::size_t bins);

enum class Gauge { loglog, log, power };

/// phi(r) = r^{Q-d} (loglog 1/r)^{d/Q} (Gauge::loglog), r^{Q-d} (log 1/r)^{d/Q}
/// (Gauge::log) or r^{Q-d}. Requires 0 < r < 1/e for the logarithmic gauges.
double gauge_phi(double r, double Q, double d, Gauge gauge = Gauge::loglog);

/// r (loglog 1/r)^{-1/Q}, the small-ball oscillation scale.
double chung_scale(double r, double Q);

struct ScalingDiagnostic {
  std::vector<double> radii;  // strictly decreasing
  std::vector<double> mean;
  std::vector<double> std_error;
  std::vector<double> q01;
  std::vector<double> q99;
  std::vector<std::vector<double>> samples;  // [radius][replicate]
  LinearFit fit;                             // log2 mean vs log2 r
  double target = 0.0;
  bool flagged = false;
};

struct MomentOptions {
  std::size_t replicates = 1000;
  long points_per_axis = 1024;
  double bin_factor = 0.25;  // histogram bin width = bin_factor * r
  unsigned threads = 1;
};

/// Monte Carlo E[L(x, B_rho(t, r) ∩ T)^n] per radius, with a fresh grid of
/// the ball's bounding box for each radius, and its log-log slope (target
/// n(Q - d)). The scaling holds at a level the field takes at t, e.g. x = 0 at
/// the origin of a field vanishing there. Flagged when the relative standard
/// error of a moment exceeds 25%.
ScalingDiagnostic moment_scaling(const CovarianceModel& model, double x, PointView t,
                                 const std::vector<double>& radii, int n, std::uint64_t seed,
                                 const MomentOptions& options = {});

struct GaugeOptions {
  std::size_t replicates = 1000;
  long points_per_radius = 1024;  // per axis, for each ball's own grid
  std::size_t sup_bins = 32;
  Gauge gauge = Gauge::loglog;
  double ineq_tolerance = 0.10;
  unsigned threads = 1;
};

/// Per-path small-ball statistics on nested balls B_rho(t, r_k) sampled
/// jointly: each ball has its own uniform grid, all grids share one path.
struct GaugeStudy {
  std::vector<double> radii;
  double Q = 0.0;
  double d = 1.0;
  std::vector<std::vector<double>> holder;  // [radius][rep] L*(B)/phi(r)
  std::vector<std::vector<double>> chung;   // [radius][rep] osc_t(B)/chung_scale(r)
  std::vector<std::vector<double>> osc;     // [radius][rep] sup_{s in B} |X(s) - X(t)|
  std::size_t ineq_pairs = 0;
  std::size_t ineq_hold = 0;  // lambda(B) <= (1 + tol) L*(B) sup_{s,s'}|X(s) - X(s')|
  bool osc_monotone = true;   // osc non-decreasing in r on every path

  /// Per replicate max over radii[lo, hi) of the Hölder ratio.
  std::vector<double> holder_max(std::size_t lo, std::size_t hi) const;
  /// Per replicate min over radii[lo, hi) of the Chung ratio.
  std::vector<double> chung_min(std::size_t lo, std::size_t hi) const;
};

GaugeStudy gauge_study(const CovarianceModel& model, PointView t, const std::vector<double>& radii,
                       std::uint64_t seed, const GaugeOptions& options = {});

/// Hölder-gauge ratios L*(B_rho(t,r))/phi(r); the statistic per radius is the
/// ratio distribution over replicates.
ScalingDiagnostic holder_gauge_ratio(const CovarianceModel& model, PointView t,
                                     const std::vector<double>& radii, std::uint64_t seed,
                                     const GaugeOptions& options = {});

/// Chung ratios sup_{s in B_rho(t,r)} |X(s) - X(t)| / (r (loglog 1/r)^{-1/Q}).
ScalingDiagnostic chung_lil_ratio(const CovarianceModel& model, PointView t,
                                  const std::vector<double>& radii, std::uint64_t seed,
                                  const GaugeOptions& options = {});

/// Ratio of the p-quantiles of two per-replicate statistics, larger over
/// smaller (so >= 1).
double quantile_shift(const std::vector<double>& a, const std::vector<double>& b, double p);

struct TransformIdentityReport {
  double det = 0.0;
  double L_v = 0.0;         // mean over replicates of L_v(z, I)
  double L_u_mapped = 0.0;  // mean of |det A|^{-1} L_u(A^{-1} z, I)
  double gap = 0.0;         // |L_v - L_u_mapped| / L_u_mapped
  std::vector<double> per_replicate_v;
  std::vector<double> per_replicate_u;
};

/// Compares L_v(z, I) for v = A u with |det A|^{-1} L_u(A^{-1} z, I) on the
/// same draws of u. Both sides use cubic windows of equal volume: side
/// `width` around z in v-space and side width / |det A|^{1/d} around A^{-1} z.
TransformIdentityReport transform_identity_check(const CovarianceModel& inner, const Eigen::MatrixXd& A,
                                                 PointView z, std::shared_ptr<const Grid> grid,
                                                 double width, std::size_t replicates,
                                                 std::uint64_t seed, unsigned threads = 1);

}  // namespace anisolt
