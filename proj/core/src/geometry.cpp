#include "anisolt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "anisolt/parallel.hpp"
#include "anisolt/rng.hpp"

namespace anisolt {

std::size_t nearest_generator(PointView t, const std::vector<Point>& generators,
                              const HurstVector& H) {
  if (generators.empty()) throw InvalidArgument("nearest_generator: empty generator list");
  std::size_t best = 0;
  double best_d = rho_tilde(t, generators[0], H);
  for (std::size_t k = 1; k < generators.size(); ++k) {
    const double d = rho_tilde(t, generators[k], H);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

VoronoiPartition::VoronoiPartition(std::vector<Point> generators, HurstVector H, Box domain,
                                   std::vector<long> cells_per_axis)
    : generators_(std::move(generators)),
      H_(std::move(H)),
      domain_(std::move(domain)),
      cells_per_axis_(std::move(cells_per_axis)) {
  if (generators_.empty()) throw InvalidArgument("Voronoi partition needs at least one generator");
  if (domain_.dim() != H_.dim() || cells_per_axis_.size() != H_.dim()) {
    throw InvalidArgument("Voronoi partition: dimension mismatch");
  }
  for (const auto& g : generators_) {
    if (g.size() != H_.dim()) throw InvalidArgument("Voronoi generator dimension mismatch");
  }
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    for (std::size_t k = i + 1; k < generators_.size(); ++k) {
      if (generators_[i] == generators_[k]) throw InvalidArgument("Voronoi generators must be distinct");
    }
  }
  std::size_t total = 1;
  for (long c : cells_per_axis_) {
    if (c < 1) throw InvalidArgument("Voronoi grid needs at least one cell per axis");
    total *= static_cast<std::size_t>(c);
  }
  assignment_.resize(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    assignment_[flat] = nearest_generator(cell_center(flat), generators_, H_);
  }
}

Point VoronoiPartition::cell_center(std::size_t flat) const {
  const std::size_t n = H_.dim();
  Point c(n);
  for (std::size_t j = n; j-- > 0;) {
    const auto cnt = static_cast<std::size_t>(cells_per_axis_[j]);
    const std::size_t i = flat % cnt;
    flat /= cnt;
    const double w = (domain_.hi[j] - domain_.lo[j]) / static_cast<double>(cnt);
    c[j] = domain_.lo[j] + (static_cast<double>(i) + 0.5) * w;
  }
  return c;
}

std::size_t VoronoiPartition::verify() const {
  std::size_t bad = 0;
  for (std::size_t flat = 0; flat < assignment_.size(); ++flat) {
    const Point c = cell_center(flat);
    const double d = rho_tilde(c, generators_[assignment_[flat]], H_);
    for (std::size_t k = 0; k < generators_.size(); ++k) {
      const double dk = rho_tilde(c, generators_[k], H_);
      if (dk < d || (dk == d && k < assignment_[flat])) {
        ++bad;
        break;
      }
    }
  }
  return bad;
}

Point anisotropic_contraction(PointView generator, PointView t, double eps, const HurstVector& H) {
  Point s(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) {
    s[j] = generator[j] + std::pow(eps, 1.0 / H[j]) * (t[j] - generator[j]);
  }
  return s;
}

bool star_shape_check(const std::vector<Point>& generators, const HurstVector& H, std::size_t l,
                      PointView t, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("star_shape_check: eps must lie in (0,1)");
  if (l >= generators.size()) throw InvalidArgument("star_shape_check: generator index out of range");
  if (nearest_generator(t, generators, H) != l) {
    throw InvalidArgument("star_shape_check: t is not in the cell of generator " + std::to_string(l));
  }
  const Point s = anisotropic_contraction(generators[l], t, eps, H);
  const double own = rho_tilde(s, generators[l], H);
  for (const auto& g : generators) {
    if (rho_tilde(s, g, H) < own) return false;
  }
  return true;
}

bool star_shape_check(const VoronoiPartition& partition, std::size_t l, PointView t, double eps) {
  return star_shape_check(partition.generators(), partition.hurst(), l, t, eps);
}

namespace {

// [x]^p = x |x|^{p-1}
double signed_pow(double x, double p) { return std::copysign(std::pow(std::abs(x), p), x); }

// trig_j(theta) for j = 0..N-1 in the hyperspherical parametrization.
std::vector<double> sphere_factors(std::span<const double> theta, std::size_t n) {
  std::vector<double> f(n);
  double prod = 1.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    f[j] = prod * std::cos(theta[j]);
    prod *= std::sin(theta[j]);
  }
  f[n - 1] = prod;
  return f;
}

}  // namespace

Point psi_transform(std::span<const double> theta, double h, const HurstVector& H) {
  if (h < 0.0) throw InvalidArgument("psi_transform: radius must be nonnegative");
  const std::size_t n = H.dim();
  if (n == 1) {
    if (theta.size() != 1) throw InvalidArgument("psi_transform: N = 1 takes one direction angle");
    const double sign = std::cos(theta[0]) >= 0.0 ? 1.0 : -1.0;
    return {sign * std::pow(h, 1.0 / H[0])};
  }
  if (theta.size() != n - 1) throw InvalidArgument("psi_transform: expected N-1 angles");
  const auto f = sphere_factors(theta, n);
  Point offset(n);
  for (std::size_t j = 0; j < n; ++j) {
    offset[j] = std::pow(h, 1.0 / H[j]) * signed_pow(f[j], 2.0 / H[j]);
  }
  return offset;
}

double psi_norm(std::span<const double> theta, const HurstVector& H) {
  const std::size_t n = H.dim();
  if (n == 1) return 1.0;
  if (theta.size() != n - 1) throw InvalidArgument("psi_norm: expected N-1 angles");
  const auto f = sphere_factors(theta, n);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += std::pow(std::abs(signed_pow(f[j], 2.0 / H[j])), H[j]);
  return sum;
}

double min_dist_integral_at_order(const Box& S, const std::vector<Point>& generators, double beta,
                                  const HurstVector& H, int order,
                                  const std::optional<AnisoBall>& restrict_to) {
  const std::size_t n = H.dim();
  const double Q = H.q();
  if (S.dim() != n) throw InvalidArgument("min_dist_integral: domain dimension mismatch");
  if (!(beta >= 0.0) || beta >= Q) throw InvalidArgument("min_dist_integral: need 0 <= beta < Q");
  if (S.empty()) return 0.0;

  const auto counts = dyadic_counts(S, order, H);
  const auto side = dyadic_sides(order, H);
  const std::size_t m = generators.size();

  // Per-axis cell centers, widths and |c - g|^{H_j} tables, so each cell costs
  // only additions.
  std::vector<std::vector<double>> centers(n), widths(n), table(n), ball_table(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto cnt = static_cast<std::size_t>(counts[j]);
    centers[j].resize(cnt);
    widths[j].resize(cnt);
    table[j].resize(cnt * m);
    for (std::size_t i = 0; i < cnt; ++i) {
      const double lo = S.lo[j] + static_cast<double>(i) * side[j];
      const double hi = i + 1 == cnt ? S.hi[j] : std::min(S.hi[j], lo + side[j]);
      centers[j][i] = 0.5 * (lo + hi);
      widths[j][i] = hi - lo;
      for (std::size_t k = 0; k < m; ++k) {
        table[j][i * m + k] = std::pow(std::abs(centers[j][i] - generators[k][j]), H[j]);
      }
    }
    if (restrict_to) {
      ball_table[j].resize(cnt);
      for (std::size_t i = 0; i < cnt; ++i) {
        ball_table[j][i] = std::pow(std::abs(centers[j][i] - restrict_to->center[j]), H[j]);
      }
    }
  }

  // Cells holding a generator are integrated radially.
  std::map<std::size_t, bool> singular;
  for (const auto& g : generators) {
    if (!S.contains(g)) continue;
    std::size_t flat = 0;
    for (std::size_t j = 0; j < n; ++j) {
      auto i = static_cast<long>(std::floor((g[j] - S.lo[j]) / side[j]));
      i = std::clamp(i, 0L, counts[j] - 1);
      flat = flat * static_cast<std::size_t>(counts[j]) + static_cast<std::size_t>(i);
    }
    singular[flat] = true;
  }
  const double kappa = rho_ball_volume(1.0, H);

  std::size_t total = 1;
  for (long c : counts) total *= static_cast<std::size_t>(c);
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> acc(m);
  double sum = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    double vol = 1.0;
    for (std::size_t j = 0; j < n; ++j) vol *= widths[j][idx[j]];
    bool inside = true;
    if (restrict_to) {
      double r = 0.0;
      for (std::size_t j = 0; j < n; ++j) r += ball_table[j][idx[j]];
      inside = r <= restrict_to->radius;
    }
    if (inside) {
      if (singular.count(flat)) {
        const double h = std::pow(vol / kappa, 1.0 / Q);
        sum += beta == 0.0 ? vol : vol * Q / (Q - beta) * std::pow(h, -beta);
      } else if (beta == 0.0) {
        sum += vol;
      } else {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
          const double* row = &table[j][idx[j] * m];
          for (std::size_t k = 0; k < m; ++k) acc[k] += row[k];
        }
        const double dmin = *std::min_element(acc.begin(), acc.end());
        sum += vol * std::pow(dmin, -beta);
      }
    }
    for (std::size_t j = n; j-- > 0;) {
      if (++idx[j] < static_cast<std::size_t>(counts[j])) break;
      idx[j] = 0;
    }
  }
  return sum;
}

IntegralEstimate min_dist_integral(const Box& S, const std::vector<Point>& points, double beta,
                                   const HurstVector& H, const IntegralOptions& options) {
  std::vector<Point> generators;
  generators.reserve(points.size() + 1);
  generators.emplace_back(H.dim(), 0.0);
  for (const auto& p : points) {
    if (p.size() != H.dim()) throw InvalidArgument("min_dist_integral: point dimension mismatch");
    if (!S.contains(p)) throw InvalidArgument("min_dist_integral: points must lie in S");
    generators.push_back(p);
  }
  if (!(beta >= 0.0) || beta >= H.q()) {
    throw InvalidArgument("min_dist_integral: beta must satisfy 0 <= beta < Q (divergent otherwise)");
  }

  auto cells_at = [&](int q) {
    std::size_t total = 1;
    for (long c : dyadic_counts(S, q, H)) total *= static_cast<std::size_t>(c);
    return total;
  };

  IntegralEstimate est;
  est.order = options.start_order;
  est.cells = cells_at(est.order);
  est.value = min_dist_integral_at_order(S, generators, beta, H, est.order, options.restrict_to);
  while (est.order < options.max_order) {
    const int next = est.order + 1;
    const std::size_t cells = cells_at(next);
    if (cells > options.max_cells) break;
    const double v = min_dist_integral_at_order(S, generators, beta, H, next, options.restrict_to);
    const double change = std::abs(v - est.value) / std::max(std::abs(v), 1e-300);
    est.value = v;
    est.order = next;
    est.cells = cells;
    if (change < options.rel_change) {
      est.converged = true;
      break;
    }
  }
  return est;
}

std::size_t covering_count(PointView s0, const std::vector<Point>& points, const HurstVector& H) {
  if (s0.size() != H.dim()) throw InvalidArgument("covering_count: dimension mismatch");
  std::vector<Point> all;
  all.reserve(points.size() + 1);
  all.emplace_back(s0.begin(), s0.end());
  for (const auto& p : points) {
    if (p.size() != H.dim()) throw InvalidArgument("covering_count: dimension mismatch");
    all.push_back(p);
  }
  {
    std::vector<Point> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw InvalidArgument("covering_count: points must be distinct");
    }
  }
  std::size_t count = 0;
  for (std::size_t j = 1; j < all.size(); ++j) {
    const double d0 = rho_tilde(all[j], all[0], H);
    bool attains = true;
    for (std::size_t i = 1; i < all.size() && attains; ++i) {
      if (i != j && rho_tilde(all[j], all[i], H) < d0) attains = false;
    }
    if (attains) ++count;
  }
  return count;
}

std::vector<Point> covering_configuration(std::size_t n, const HurstVector& H, std::uint64_t seed,
                                          std::size_t trial, CoveringConfig* kind) {
  const std::size_t dim = H.dim();
  Rng rng(seed, {0xC0FEULL, trial});
  auto uniform_point = [&] {
    Point p(dim);
    for (auto& v : p) v = rng.uniform();
    return p;
  };

  CoveringConfig k = CoveringConfig::uniform;
  if (trial % 4 == 3) k = static_cast<CoveringConfig>(1 + (trial / 4) % 3);
  if (kind) *kind = k;

  std::vector<Point> cfg;
  cfg.reserve(n + 1);
  if (k == CoveringConfig::uniform) {
    for (std::size_t i = 0; i <= n; ++i) cfg.push_back(uniform_point());
  } else {
    Point s0(dim, 0.5);
    cfg.push_back(s0);
    const double r = rng.uniform(0.01, 0.05);
    std::vector<double> half(dim);
    for (std::size_t j = 0; j < dim; ++j) half[j] = std::pow(r, 1.0 / H[j]);

    std::vector<Point> shell;
    if (k == CoveringConfig::sphere) {
      // Random points on the rho_tilde sphere, greedily kept pairwise >= r apart.
      for (int attempt = 0; attempt < 4000 && shell.size() < n; ++attempt) {
        Point p(dim);
        const auto face = static_cast<std::size_t>(rng.integer(0, static_cast<long>(dim) - 1));
        for (std::size_t j = 0; j < dim; ++j) p[j] = s0[j] + half[j] * rng.uniform(-1.0, 1.0);
        p[face] = s0[face] + (rng.uniform() < 0.5 ? -half[face] : half[face]);
        const bool separated = std::all_of(shell.begin(), shell.end(), [&](const Point& q) {
          return rho_tilde(p, q, H) >= r;
        });
        if (separated) shell.push_back(std::move(p));
      }
    } else {
      // {-1, 0, 1}^N \ {0} scaled to the rho_tilde sphere of radius r.
      std::vector<int> digit(dim, -1);
      for (;;) {
        if (std::any_of(digit.begin(), digit.end(), [](int d) { return d != 0; })) {
          Point p(dim);
          for (std::size_t j = 0; j < dim; ++j) {
            double off = digit[j] * half[j];
            if (k == CoveringConfig::jittered_shell) off *= 1.0 + 0.05 * rng.uniform(-1.0, 1.0);
            p[j] = s0[j] + off;
          }
          shell.push_back(std::move(p));
        }
        std::size_t j = 0;
        while (j < dim && ++digit[j] > 1) digit[j++] = -1;
        if (j == dim) break;
      }
    }
    if (shell.size() > n) shell.resize(n);
    for (auto& p : shell) cfg.push_back(std::move(p));
    // Fill with points at rho_tilde distance >= 3r from s0.
    while (cfg.size() < n + 1) {
      Point p = uniform_point();
      if (rho_tilde(p, s0, H) >= 3.0 * r) cfg.push_back(std::move(p));
    }
  }
  return cfg;
}

CoveringStats covering_trials(const HurstVector& H, std::size_t n, std::size_t trials,
                              std::uint64_t seed, unsigned threads) {
  CoveringStats stats{H.dim(), H, n, trials, std::vector<std::size_t>(trials), std::vector<bool>(trials), 0};
  std::vector<char> adversarial(trials, 0);
  parallel_for(trials, threads, [&](std::size_t t) {
    CoveringConfig kind{};
    auto cfg = covering_configuration(n, H, substream_seed(seed, {n}), t, &kind);
    const Point s0 = cfg.front();
    cfg.erase(cfg.begin());
    stats.counts[t] = covering_count(s0, cfg, H);
    adversarial[t] = kind != CoveringConfig::uniform;
  });
  for (std::size_t t = 0; t < trials; ++t) {
    stats.adversarial[t] = adversarial[t] != 0;
    stats.max_count = std::max(stats.max_count, stats.counts[t]);
  }
  return stats;
}

}  // namespace anisolt
