#include "anisolt/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace anisolt {
namespace {

void check_dims(PointView t, PointView s, const HurstVector& H) {
  if (t.size() != H.dim() || s.size() != H.dim()) {
    throw InvalidArgument("point dimension does not match Hurst vector (expected " +
                          std::to_string(H.dim()) + ")");
  }
}

void validate(const std::vector<double>& h, bool allow_unit) {
  if (h.empty()) throw InvalidArgument("Hurst vector must have at least one axis");
  for (double v : h) {
    const bool ok = allow_unit ? (v > 0.0 && v <= 1.0) : (v > 0.0 && v < 1.0);
    if (!std::isfinite(v) || !ok) {
      throw InvalidArgument("Hurst exponent out of range: " + std::to_string(v));
    }
  }
}

}  // namespace

HurstVector::HurstVector(std::vector<double> h) : h_(std::move(h)) {
  validate(h_, false);
}

HurstVector HurstVector::allowing_unit(std::vector<double> h) {
  validate(h, true);
  return HurstVector(std::move(h), Unchecked{});
}

bool HurstVector::has_unit_axis() const {
  return std::any_of(h_.begin(), h_.end(), [](double v) { return v == 1.0; });
}

double HurstVector::q() const {
  return std::accumulate(h_.begin(), h_.end(), 0.0,
                         [](double acc, double v) { return acc + 1.0 / v; });
}

double q_exponent(const HurstVector& H) { return H.q(); }

double rho(PointView t, PointView s, const HurstVector& H) {
  check_dims(t, s, H);
  double sum = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) sum += std::pow(std::abs(t[j] - s[j]), H[j]);
  return sum;
}

double rho_tilde(PointView t, PointView s, const HurstVector& H) {
  check_dims(t, s, H);
  double best = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    best = std::max(best, std::pow(std::abs(t[j] - s[j]), H[j]));
  }
  return best;
}

double distance(MetricKind kind, PointView t, PointView s, const HurstVector& H) {
  return kind == MetricKind::rho ? rho(t, s, H) : rho_tilde(t, s, H);
}

bool Box::empty() const {
  if (lo.size() != hi.size() || lo.empty()) return true;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (!(hi[j] > lo[j])) return true;
  }
  return false;
}

double Box::volume() const {
  if (empty()) return 0.0;
  double v = 1.0;
  for (std::size_t j = 0; j < lo.size(); ++j) v *= hi[j] - lo[j];
  return v;
}

bool Box::contains(PointView t) const {
  if (t.size() != lo.size()) return false;
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (t[j] < lo[j] || t[j] > hi[j]) return false;
  }
  return true;
}

Point Box::center() const {
  Point c(lo.size());
  for (std::size_t j = 0; j < lo.size(); ++j) c[j] = 0.5 * (lo[j] + hi[j]);
  return c;
}

bool ball_contains(const AnisoBall& ball, PointView t, const HurstVector& H) {
  return distance(ball.metric, ball.center, t, H) <= ball.radius;
}

Box rho_tilde_ball_box(PointView center, double radius, const HurstVector& H) {
  if (center.size() != H.dim()) throw InvalidArgument("ball center dimension mismatch");
  Box b{Point(center.begin(), center.end()), Point(center.begin(), center.end())};
  for (std::size_t j = 0; j < H.dim(); ++j) {
    const double half = std::pow(radius, 1.0 / H[j]);
    b.lo[j] -= half;
    b.hi[j] += half;
  }
  return b;
}

double rho_tilde_ball_volume(double radius, const HurstVector& H) {
  return std::ldexp(std::pow(radius, H.q()), static_cast<int>(H.dim()));
}

double rho_ball_volume(double radius, const HurstVector& H) {
  // Dirichlet integral for {sum_j |t_j|^{H_j} <= r}.
  double log_v = -std::lgamma(1.0 + H.q());
  for (std::size_t j = 0; j < H.dim(); ++j) log_v += std::lgamma(1.0 + 1.0 / H[j]);
  return std::ldexp(std::exp(log_v) * std::pow(radius, H.q()), static_cast<int>(H.dim()));
}

std::vector<double> dyadic_sides(int order, const HurstVector& H) {
  if (order < 0) throw InvalidArgument("dyadic order must be nonnegative");
  std::vector<double> side(H.dim());
  for (std::size_t j = 0; j < H.dim(); ++j) side[j] = std::exp2(-order / H[j]);
  return side;
}

std::vector<long> dyadic_counts(const Box& root, int order, const HurstVector& H) {
  if (root.dim() != H.dim()) throw InvalidArgument("box dimension does not match Hurst vector");
  std::vector<long> counts(H.dim(), 0);
  if (root.empty()) return counts;
  const auto side = dyadic_sides(order, H);
  for (std::size_t j = 0; j < H.dim(); ++j) {
    const double ratio = (root.hi[j] - root.lo[j]) / side[j];
    // Sides that divide the box up to rounding do not get an extra sliver cell.
    const double nearest = std::round(ratio);
    const double n = std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio) ? nearest
                                                                             : std::ceil(ratio);
    counts[j] = std::max(1L, static_cast<long>(n));
  }
  return counts;
}

std::vector<DyadicCell> dyadic_cells(const Box& root, int order, const HurstVector& H) {
  std::vector<DyadicCell> cells;
  if (root.empty()) return cells;
  const auto side = dyadic_sides(order, H);
  const auto counts = dyadic_counts(root, order, H);
  const std::size_t n = H.dim();
  std::size_t total = 1;
  for (long c : counts) total *= static_cast<std::size_t>(c);
  cells.reserve(total);

  std::vector<long> idx(n, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    DyadicCell cell{idx, Box{Point(n), Point(n)}};
    for (std::size_t j = 0; j < n; ++j) {
      cell.box.lo[j] = root.lo[j] + static_cast<double>(idx[j]) * side[j];
      cell.box.hi[j] = idx[j] + 1 == counts[j]
                           ? root.hi[j]
                           : std::min(root.hi[j], root.lo[j] + static_cast<double>(idx[j] + 1) * side[j]);
    }
    cells.push_back(std::move(cell));
    for (std::size_t j = n; j-- > 0;) {
      if (++idx[j] < counts[j]) break;
      idx[j] = 0;
    }
  }
  return cells;
}

std::string to_string(const HurstVector& H) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t j = 0; j < H.dim(); ++j) os << (j ? "," : "") << H[j];
  return os.str();
}

}  // namespace anisolt
