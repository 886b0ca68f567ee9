#include "anisolt/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "anisolt/stats.hpp"

namespace anisolt {

std::size_t LevelSetEstimate::count_at(int order) const {
  const auto it = std::find(orders.begin(), orders.end(), order);
  if (it == orders.end()) throw InvalidArgument("level set has no order " + std::to_string(order));
  return counts[static_cast<std::size_t>(it - orders.begin())];
}

namespace {

Box hull(const Grid& g) {
  Box b{g.points.front(), g.points.front()};
  for (const auto& p : g.points) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      b.lo[j] = std::min(b.lo[j], p[j]);
      b.hi[j] = std::max(b.hi[j], p[j]);
    }
  }
  return b;
}

// Smallest positive gap between distinct coordinates on each axis.
std::vector<double> axis_spacing(const Grid& g) {
  std::vector<double> out(g.dim(), std::numeric_limits<double>::infinity());
  std::vector<double> c(g.size());
  for (std::size_t j = 0; j < g.dim(); ++j) {
    for (std::size_t i = 0; i < g.size(); ++i) c[i] = g.points[i][j];
    std::sort(c.begin(), c.end());
    for (std::size_t i = 1; i < c.size(); ++i) {
      if (c[i] > c[i - 1]) out[j] = std::min(out[j], c[i] - c[i - 1]);
    }
  }
  return out;
}

struct CellAcc {
  std::vector<double> lo, hi;  // per component
  double mind = std::numeric_limits<double>::infinity();
  bool any = false;
};

}  // namespace

LevelSetEstimate extract_level_set(const FieldSample& sample, PointView x, const HurstVector& H,
                                   const std::vector<int>& orders) {
  const Grid& g = *sample.grid;
  if (g.size() == 0) throw InvalidArgument("extract_level_set: empty sample");
  const std::size_t n = g.dim();
  const std::size_t d = sample.components();
  if (H.dim() != n) throw InvalidArgument("extract_level_set: exponent dimension mismatch");
  if (x.size() != d) throw InvalidArgument("extract_level_set: level dimension mismatch");
  if (orders.empty()) throw InvalidArgument("extract_level_set: no orders requested");

  LevelSetEstimate est;
  est.level.assign(x.begin(), x.end());
  est.H = H;
  est.components = d;
  est.orders = orders;
  if (!sample.model.empty()) {
    const CovarianceModel model = CovarianceModel::from_config(sample.model);
    est.domain = model.domain();
    if (model.is_she()) est.she_beta = model.she_beta();
  } else {
    est.domain = hull(g);
  }
  const Box& T = est.domain;
  const auto spacing = axis_spacing(g);

  for (int q : orders) {
    const auto counts = dyadic_counts(T, q, H);
    const auto side = dyadic_sides(q, H);
    for (std::size_t j = 0; j < n; ++j) {
      const double extent = T.hi[j] - T.lo[j];
      if (std::isfinite(spacing[j]) && std::min(side[j], extent) < 2.0 * spacing[j]) {
        std::ostringstream os;
        os << "extract_level_set: grid too coarse for order " << q << " on axis " << j << ": spacing "
           << spacing[j] << " needs to be at most " << 0.5 * std::min(side[j], extent)
           << " (at least " << static_cast<long>(std::ceil(2.0 * extent / std::min(side[j], extent)))
           << " points on the axis)";
        throw InvalidArgument(os.str());
      }
    }
    std::size_t total = 1;
    for (long c : counts) total *= static_cast<std::size_t>(c);
    std::vector<CellAcc> acc(total);

    std::vector<long> base(n);
    std::vector<bool> first(n);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point& t = g.points[i];
      if (!T.contains(t)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double u = (t[j] - T.lo[j]) / side[j];
        base[j] = std::clamp(static_cast<long>(std::floor(u)), 0L, counts[j] - 1);
        // The first grid point of a cell also closes the previous cell.
        const double prev = (t[j] - spacing[j] - T.lo[j]) / side[j];
        first[j] = base[j] > 0 && std::floor(prev) < static_cast<double>(base[j]);
      }
      double dist2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double v = sample.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) - x[c];
        dist2 += v * v;
      }
      const double dist = std::sqrt(dist2);
      for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        bool ok = true;
        std::size_t flat = 0;
        for (std::size_t j = 0; j < n && ok; ++j) {
          long c = base[j];
          if (mask >> j & 1U) {
            if (!first[j]) ok = false;
            --c;
          }
          flat = flat * static_cast<std::size_t>(counts[j]) + static_cast<std::size_t>(c);
        }
        if (!ok) continue;
        CellAcc& a = acc[flat];
        if (!a.any) {
          a.any = true;
          a.lo.assign(d, std::numeric_limits<double>::infinity());
          a.hi.assign(d, -std::numeric_limits<double>::infinity());
        }
        for (std::size_t c = 0; c < d; ++c) {
          const double v = sample.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
          a.lo[c] = std::min(a.lo[c], v);
          a.hi[c] = std::max(a.hi[c], v);
        }
        a.mind = std::min(a.mind, dist);
      }
    }

    std::vector<double> osc(total, 0.0);
    std::vector<double> occupied;
    for (std::size_t f = 0; f < total; ++f) {
      if (!acc[f].any) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += (acc[f].hi[c] - acc[f].lo[c]) * (acc[f].hi[c] - acc[f].lo[c]);
      osc[f] = std::sqrt(s);
      occupied.push_back(osc[f]);
    }
    const double eps = occupied.empty() ? 0.0 : quantile(occupied, 0.5);

    std::vector<std::size_t> flagged;
    for (std::size_t f = 0; f < total; ++f) {
      const CellAcc& a = acc[f];
      if (!a.any) continue;
      bool hit;
      if (d == 1) {
        hit = (a.lo[0] <= x[0] && x[0] <= a.hi[0]) || a.mind <= osc[f];
      } else {
        hit = a.mind <= eps;
      }
      if (hit) flagged.push_back(f);
    }
    est.eps.push_back(eps);
    est.counts.push_back(flagged.size());
    est.total_cells.push_back(total);
    est.cells.push_back(std::move(flagged));
  }
  return est;
}

DimensionFit box_dimension(const std::vector<LevelSetEstimate>& replicates, const std::vector<int>& orders) {
  if (replicates.empty()) throw InvalidArgument("box_dimension: no estimates");
  const LevelSetEstimate& first = replicates.front();
  DimensionFit fit;
  const double d = static_cast<double>(first.components);
  fit.target = first.H.q() - d;
  if (first.she_beta) {
    const double N = static_cast<double>(first.H.dim() - 1);
    fit.parabolic_target = 2.0 + N - d * (2.0 - *first.she_beta) / 2.0;
  }

  std::vector<int> used;
  std::vector<double> logs, means;
  for (int q : orders) {
    double sum_log = 0.0, sum = 0.0;
    std::size_t nz = 0;
    for (const auto& e : replicates) {
      const auto c = static_cast<double>(e.count_at(q));
      sum += c;
      if (c > 0.0) {
        sum_log += std::log2(c);
        ++nz;
      }
    }
    if (nz == 0) continue;
    used.push_back(q);
    logs.push_back(sum_log / static_cast<double>(nz));
    means.push_back(sum / static_cast<double>(replicates.size()));
  }
  // Statistical floor: small counts at the finest orders are mostly noise.
  for (int drop = 0; drop < 2 && !used.empty(); ++drop) {
    const auto finest = std::max_element(used.begin(), used.end()) - used.begin();
    if (means[static_cast<std::size_t>(finest)] >= 10.0) break;
    used.erase(used.begin() + finest);
    logs.erase(logs.begin() + finest);
    means.erase(means.begin() + finest);
  }
  fit.orders_used = used;
  fit.mean_log2_counts = logs;
  if (used.size() < 4) {
    fit.flagged = true;
    fit.dimension = std::numeric_limits<double>::quiet_NaN();
    fit.std_error = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  std::vector<double> qs(used.begin(), used.end());
  const LinearFit lf = ols_fit(qs, logs);
  fit.dimension = lf.slope;
  fit.std_error = lf.slope_stderr;
  return fit;
}

DimensionFit box_dimension(const LevelSetEstimate& estimate, const std::vector<int>& orders) {
  return box_dimension(std::vector<LevelSetEstimate>{estimate}, orders);
}

namespace {

std::vector<double> sorted_exponents(const HurstVector& H) {
  std::vector<double> h = H.values();
  std::sort(h.begin(), h.end());
  return h;
}

double level_term(const std::vector<double>& h, std::size_t k, double d) {
  double s = 0.0;
  for (std::size_t j = 0; j <= k; ++j) s += h[k] / h[j];
  return s + static_cast<double>(h.size()) - static_cast<double>(k + 1) - h[k] * d;
}

}  // namespace

std::optional<double> euclidean_dimension_formula(const HurstVector& H, double d) {
  if (!(d > 0.0)) throw InvalidArgument("euclidean_dimension_formula: d must be positive");
  if (d >= H.q()) return std::nullopt;
  const auto h = sorted_exponents(H);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < h.size(); ++k) best = std::min(best, level_term(h, k, d));
  return best;
}

std::optional<double> euclidean_dimension_tau_form(const HurstVector& H, double d) {
  if (!(d > 0.0)) throw InvalidArgument("euclidean_dimension_tau_form: d must be positive");
  if (d >= H.q()) return std::nullopt;
  const auto h = sorted_exponents(H);
  double partial = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    partial += 1.0 / h[k];
    if (d < partial) return level_term(h, k, d);
  }
  return level_term(h, h.size() - 1, d);
}

std::vector<double> gauge_mass_diagnostic(const LevelSetEstimate& estimate, const std::vector<int>& orders,
                                          double c, Gauge gauge) {
  if (!(c > 0.0)) throw InvalidArgument("gauge_mass_diagnostic: c must be positive");
  const double Q = estimate.H.q();
  const auto d = static_cast<double>(estimate.components);
  std::vector<double> out;
  for (int q : orders) {
    const double r = c * std::exp2(-static_cast<double>(q));
    const auto n = static_cast<double>(estimate.count_at(q));
    const bool defined = gauge == Gauge::power || (gauge == Gauge::log ? r < 1.0 : r < std::exp(-1.0));
    out.push_back(defined ? n * gauge_phi(r, Q, d, gauge) : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

}  // namespace anisolt
