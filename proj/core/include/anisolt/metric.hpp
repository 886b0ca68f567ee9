#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace anisolt {

using Point = std::vector<double>;
using PointView = std::span<const double>;

/// Raised for inputs that violate an operation's preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-axis smoothness exponents H = (H_1, ..., H_N).
///
/// Every exponent lies in (0,1). Metric-only experiments that need Lipschitz
/// axes (H_j = 1) construct the vector through `allowing_unit`; such vectors
/// are never accepted by the covariance models.
class HurstVector {
 public:
  explicit HurstVector(std::vector<double> h);
  HurstVector(std::initializer_list<double> h) : HurstVector(std::vector<double>(h)) {}

  static HurstVector allowing_unit(std::vector<double> h);

  std::size_t dim() const { return h_.size(); }
  double operator[](std::size_t j) const { return h_[j]; }
  const std::vector<double>& values() const { return h_; }
  bool has_unit_axis() const;

  /// Q = sum_j 1/H_j.
  double q() const;

  friend bool operator==(const HurstVector&, const HurstVector&) = default;

 private:
  struct Unchecked {};
  HurstVector(std::vector<double> h, Unchecked) : h_(std::move(h)) {}
  std::vector<double> h_;
};

double q_exponent(const HurstVector& H);

/// rho(t,s) = sum_j |t_j - s_j|^{H_j}.
double rho(PointView t, PointView s, const HurstVector& H);

/// rho_tilde(t,s) = max_j |t_j - s_j|^{H_j}.
double rho_tilde(PointView t, PointView s, const HurstVector& H);

enum class MetricKind { rho, rho_tilde };

double distance(MetricKind kind, PointView t, PointView s, const HurstVector& H);

/// Closed axis-aligned interval [lo, hi] in R^N.
struct Box {
  Point lo;
  Point hi;

  std::size_t dim() const { return lo.size(); }
  bool empty() const;
  double volume() const;
  bool contains(PointView t) const;
  Point center() const;
};

struct AnisoBall {
  Point center;
  double radius = 0.0;
  MetricKind metric = MetricKind::rho;
};

bool ball_contains(const AnisoBall& ball, PointView t, const HurstVector& H);

/// The rho_tilde ball B(a, r) is exactly the box with half-side r^{1/H_j}.
Box rho_tilde_ball_box(PointView center, double radius, const HurstVector& H);

/// Lebesgue measure of B_rho_tilde(a, r): 2^N r^Q.
double rho_tilde_ball_volume(double radius, const HurstVector& H);

/// Lebesgue measure of B_rho(a, r):
/// 2^N prod_j Gamma(1 + 1/H_j) / Gamma(1 + Q) * r^Q.
double rho_ball_volume(double radius, const HurstVector& H);

/// One cell of an anisotropic dyadic grid.
struct DyadicCell {
  std::vector<long> index;  // per-axis position within the root box
  Box box;
};

/// Per-axis nominal side 2^{-q/H_j} of order-q cells.
std::vector<double> dyadic_sides(int order, const HurstVector& H);

/// Per-axis number of order-q cells needed to cover the box.
std::vector<long> dyadic_counts(const Box& root, int order, const HurstVector& H);

/// Tiles `root` with cells of side 2^{-q/H_j} on axis j, anchored at root.lo.
/// The last cell along an axis is clipped to the box. Empty box gives no cells.
std::vector<DyadicCell> dyadic_cells(const Box& root, int order, const HurstVector& H);

std::string to_string(const HurstVector& H);

}  // namespace anisolt
