#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "anisolt/metric.hpp"

namespace anisolt {

/// Smallest index k attaining min_k rho_tilde(t, generators[k]).
std::size_t nearest_generator(PointView t, const std::vector<Point>& generators,
                              const HurstVector& H);

/// Voronoi partition of a box under rho_tilde, rasterized on a regular grid of
/// cell centers. Ties go to the lowest generator index.
class VoronoiPartition {
 public:
  VoronoiPartition(std::vector<Point> generators, HurstVector H, Box domain,
                   std::vector<long> cells_per_axis);

  const std::vector<Point>& generators() const { return generators_; }
  const HurstVector& hurst() const { return H_; }
  const Box& domain() const { return domain_; }
  const std::vector<long>& cells_per_axis() const { return cells_per_axis_; }
  std::size_t cell_count() const { return assignment_.size(); }

  Point cell_center(std::size_t flat) const;
  std::size_t assigned(std::size_t flat) const { return assignment_[flat]; }
  const std::vector<std::size_t>& assignment() const { return assignment_; }

  /// Number of cells whose assigned generator does not attain the minimum
  /// distance on re-evaluation (0 for a correct partition).
  std::size_t verify() const;

 private:
  std::vector<Point> generators_;
  HurstVector H_;
  Box domain_;
  std::vector<long> cells_per_axis_;
  std::vector<std::size_t> assignment_;
};

/// s = t^l + (eps^{1/H_j} (t_j - t^l_j))_j, the anisotropic contraction of t
/// towards generator l.
Point anisotropic_contraction(PointView generator, PointView t, double eps, const HurstVector& H);

/// Whether the contraction of t towards generator l (with t in cell l) stays
/// in cell l, i.e. rho_tilde(s, t^l) <= rho_tilde(s, t^k) for every k.
bool star_shape_check(const VoronoiPartition& partition, std::size_t l, PointView t, double eps);
bool star_shape_check(const std::vector<Point>& generators, const HurstVector& H, std::size_t l,
                      PointView t, double eps);

/// Anisotropic spherical coordinates: the offset h^E Psi(theta) with
/// Psi_j = [trig_j(theta)]^{2/H_j} and [x]^p = x |x|^{p-1}, so that
/// rho(t + offset, t) = h. For N >= 2, theta holds N-1 angles
/// (theta_1 in [0, 2pi], the rest in [0, pi]). For N = 1 theta holds one
/// angle whose cosine sign picks the direction.
Point psi_transform(std::span<const double> theta, double h, const HurstVector& H);

/// sum_j |Psi_j(theta)|^{H_j}; identically 1.
double psi_norm(std::span<const double> theta, const HurstVector& H);

struct IntegralEstimate {
  double value = 0.0;
  int order = 0;          // final grid order
  bool converged = false; // successive orders within the refinement tolerance
  std::size_t cells = 0;
};

struct IntegralOptions {
  int start_order = 2;
  int max_order = 12;
  double rel_change = 0.005;
  std::size_t max_cells = std::size_t{1} << 22;
  /// Restrict the integral to {t : rho(t, center) <= radius} inside S.
  std::optional<AnisoBall> restrict_to;
};

/// Riemann estimate of \int_S [min_k rho(t, t^k)]^{-beta} dt over the
/// generators {0} ∪ points, on order-q anisotropic cells of S. Cells that
/// contain a generator use the radial integral over the equal-volume rho-ball.
/// The order increases until two successive estimates differ by less than
/// `rel_change`.
IntegralEstimate min_dist_integral(const Box& S, const std::vector<Point>& points, double beta,
                                   const HurstVector& H, const IntegralOptions& options = {});

/// One grid order of min_dist_integral, without refinement.
double min_dist_integral_at_order(const Box& S, const std::vector<Point>& generators, double beta,
                                  const HurstVector& H, int order,
                                  const std::optional<AnisoBall>& restrict_to = std::nullopt);

/// Number of j in 1..n with rho_tilde(s^j, s^0) = min_{i != j} rho_tilde(s^j, s^i)
/// (ties attain the minimum). Points must be pairwise distinct.
std::size_t covering_count(PointView s0, const std::vector<Point>& points, const HurstVector& H);

struct CoveringStats {
  std::size_t N = 0;
  HurstVector H{0.5};
  std::size_t n = 0;
  std::size_t trials = 0;
  std::vector<std::size_t> counts;
  std::vector<bool> adversarial;
  std::size_t max_count = 0;
};

enum class CoveringConfig : int { uniform = 0, lattice_shell = 1, jittered_shell = 2, sphere = 3 };

/// Draws configuration `trial` of the covering experiment: s^0 followed by n
/// points. Every fourth trial is adversarial (a concentric rho_tilde-sphere
/// placement around s^0), the rest uniform in the unit cube.
std::vector<Point> covering_configuration(std::size_t n, const HurstVector& H, std::uint64_t seed,
                                          std::size_t trial, CoveringConfig* kind = nullptr);

CoveringStats covering_trials(const HurstVector& H, std::size_t n, std::size_t trials,
                              std::uint64_t seed, unsigned threads = 1);

}  // namespace anisolt
