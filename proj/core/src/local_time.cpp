#include "anisolt/local_time.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "anisolt/parallel.hpp"
#include "anisolt/rng.hpp"

namespace anisolt {

Region Region::interval(Box box) {
  Region r;
  r.box = std::move(box);
  return r;
}

Region Region::ball_in(const AnisoBall& ball, HurstVector H, const Box& within) {
  if (ball.center.size() != H.dim() || within.dim() != H.dim()) {
    throw InvalidArgument("Region: dimension mismatch");
  }
  Region r;
  r.box = within;
  r.ball = ball;
  r.H = std::move(H);
  return r;
}

bool Region::contains(PointView t) const {
  if (!box.contains(t)) return false;
  return !ball || ball_contains(*ball, t, *H);
}

double LocalTimeEstimate::bin_volume() const { return std::pow(bin_width, static_cast<double>(dim())); }

std::vector<Point> LocalTimeEstimate::levels() const {
  std::vector<Point> out;
  out.reserve(mass.size());
  for (const auto& [idx, m] : mass) {
    Point x(dim());
    for (std::size_t c = 0; c < dim(); ++c) x[c] = anchor[c] + bin_width * static_cast<double>(idx[c]);
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<double> LocalTimeEstimate::density() const {
  std::vector<double> out;
  out.reserve(mass.size());
  const double norm = static_cast<double>(replicates) * bin_volume();
  for (const auto& [idx, m] : mass) out.push_back(m / norm);
  return out;
}

double LocalTimeEstimate::density_at(PointView x) const {
  if (x.size() != dim()) throw InvalidArgument("density_at: level dimension mismatch");
  std::vector<long> idx(dim());
  for (std::size_t c = 0; c < dim(); ++c) idx[c] = std::lround((x[c] - anchor[c]) / bin_width);
  const auto it = mass.find(idx);
  if (it == mass.end()) return 0.0;
  return it->second / (static_cast<double>(replicates) * bin_volume());
}

double LocalTimeEstimate::total_mass() const {
  double s = 0.0;
  for (const auto& [idx, m] : mass) s += m;
  return s / static_cast<double>(replicates);
}

double LocalTimeEstimate::max_density() const {
  double best = 0.0;
  for (const auto& [idx, m] : mass) best = std::max(best, m);
  return best / (static_cast<double>(replicates) * bin_volume());
}

LocalTimeEstimate& LocalTimeEstimate::merge(const LocalTimeEstimate& other) {
  if (other.replicates == 0) return *this;
  if (replicates == 0) return *this = other;
  if (other.bin_width != bin_width || other.anchor != anchor) {
    throw InvalidArgument("LocalTimeEstimate::merge: binnings differ");
  }
  for (const auto& [idx, m] : other.mass) mass[idx] += m;
  region_measure += other.region_measure;
  replicates += other.replicates;
  return *this;
}

std::vector<std::size_t> region_rows(const FieldSample& sample, const Region& region) {
  std::vector<std::size_t> rows;
  const Grid& g = *sample.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (region.contains(g.points[i])) rows.push_back(i);
  }
  return rows;
}

namespace {

std::vector<std::size_t> nonempty_rows(const FieldSample& sample, const Region& region) {
  if (region.box.dim() != sample.grid->dim()) throw InvalidArgument("region dimension does not match the grid");
  auto rows = region_rows(sample, region);
  if (rows.empty()) throw InvalidArgument("region contains no grid points");
  return rows;
}

}  // namespace

LocalTimeEstimate occupation_histogram(const FieldSample& sample, const Region& region, double bin_width,
                                       Point anchor) {
  if (!(bin_width > 0.0)) throw InvalidArgument("occupation_histogram: bin width must be positive");
  const std::size_t d = sample.components();
  if (anchor.empty()) anchor.assign(d, 0.0);
  if (anchor.size() != d) throw InvalidArgument("occupation_histogram: anchor dimension mismatch");
  const auto rows = nonempty_rows(sample, region);

  LocalTimeEstimate est;
  est.bin_width = bin_width;
  est.anchor = std::move(anchor);
  est.replicates = 1;
  est.seed = sample.seed;
  est.model = sample.model;
  std::vector<long> idx(d);
  for (std::size_t i : rows) {
    for (std::size_t c = 0; c < d; ++c) {
      const double v = sample.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      idx[c] = std::lround((v - est.anchor[c]) / bin_width);
    }
    const double w = sample.grid->weights[i];
    est.mass[idx] += w;
    est.region_measure += w;
  }
  return est;
}

double local_time_at(const FieldSample& sample, const Region& region, PointView x, double width) {
  if (!(width > 0.0)) throw InvalidArgument("local_time_at: width must be positive");
  const std::size_t d = sample.components();
  if (x.size() != d) throw InvalidArgument("local_time_at: level dimension mismatch");
  const auto rows = nonempty_rows(sample, region);
  const double half = 0.5 * width;
  double acc = 0.0;
  for (std::size_t i : rows) {
    bool in = true;
    for (std::size_t c = 0; c < d && in; ++c) {
      in = std::abs(sample.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) - x[c]) <= half;
    }
    if (in) acc += sample.grid->weights[i];
  }
  return acc / std::pow(width, static_cast<double>(d));
}

double smoothed_local_time(const FieldSample& sample, const Region& region, PointView x, double k) {
  if (!(k > 0.0)) throw InvalidArgument("smoothed_local_time: k must be positive");
  const std::size_t d = sample.components();
  if (x.size() != d) throw InvalidArgument("smoothed_local_time: level dimension mismatch");
  const auto rows = nonempty_rows(sample, region);
  double acc = 0.0;
  for (std::size_t i : rows) {
    double r2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double u = sample.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) - x[c];
      r2 += u * u;
    }
    acc += sample.grid->weights[i] * std::exp(-0.5 * k * r2);
  }
  return std::pow(k / (2.0 * std::numbers::pi), 0.5 * static_cast<double>(d)) * acc;
}

SupEstimate sup_local_time(std::span<const double> values, std::span<const double> weights, std::size_t bins) {
  if (values.size() != weights.size()) throw InvalidArgument("sup_local_time: size mismatch");
  if (bins == 0) throw InvalidArgument("sup_local_time: need at least one bin");
  SupEstimate out;
  if (values.empty()) return out;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  out.range = *mx - *mn;
  for (double w : weights) out.measure += w;
  if (out.measure == 0.0) return out;
  if (out.range == 0.0) {
    out.sup = std::numeric_limits<double>::infinity();
    return out;
  }
  const double width = out.range / static_cast<double>(bins);
  std::vector<double> h(bins, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto b = static_cast<std::size_t>((values[i] - *mn) / width);
    h[std::min(b, bins - 1)] += weights[i];
  }
  out.sup = *std::max_element(h.begin(), h.end()) / width;
  return out;
}

double gauge_phi(double r, double Q, double d, Gauge gauge) {
  if (!(r > 0.0)) throw InvalidArgument("gauge_phi: radius must be positive");
  const double base = std::pow(r, Q - d);
  switch (gauge) {
    case Gauge::power:
      return base;
    case Gauge::log:
      if (r >= 1.0) throw InvalidArgument("gauge_phi: log gauge needs r < 1");
      return base * std::pow(std::log(1.0 / r), d / Q);
    case Gauge::loglog:
      break;
  }
  if (r >= std::exp(-1.0)) throw InvalidArgument("gauge_phi: loglog gauge needs r < 1/e");
  return base * std::pow(std::log(std::log(1.0 / r)), d / Q);
}

double chung_scale(double r, double Q) {
  if (!(r > 0.0) || r >= std::exp(-1.0)) throw InvalidArgument("chung_scale: need 0 < r < 1/e");
  return r * std::pow(std::log(std::log(1.0 / r)), -1.0 / Q);
}

namespace {

void check_radii(const std::vector<double>& radii) {
  if (radii.empty()) throw InvalidArgument("radius list is empty");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0)) throw InvalidArgument("radii must be positive");
    if (k > 0 && !(radii[k] < radii[k - 1])) throw InvalidArgument("radii must be strictly decreasing");
  }
}

Box intersect(const Box& a, const Box& b) {
  Box out{a.lo, a.hi};
  for (std::size_t j = 0; j < a.dim(); ++j) {
    out.lo[j] = std::max(a.lo[j], b.lo[j]);
    out.hi[j] = std::min(a.hi[j], b.hi[j]);
  }
  return out;
}

// Product grid of the ball's bounding box, restricted to the rho-ball.
Grid ball_grid(PointView t, double r, const HurstVector& H, const Box& domain, long per_axis) {
  const Box box = intersect(rho_tilde_ball_box(t, r, H), domain);
  if (box.empty()) throw InvalidArgument("ball does not meet the domain");
  Grid full = Grid::product(box, std::vector<long>(H.dim(), per_axis));
  if (H.dim() == 1) return full;  // rho-ball and rho_tilde-ball coincide
  const AnisoBall ball{Point(t.begin(), t.end()), r, MetricKind::rho};
  Grid g;
  g.spec = full.spec + " ball";
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (ball_contains(ball, full.points[i], H)) {
      g.points.push_back(full.points[i]);
      g.weights.push_back(full.weights[i]);
    }
  }
  if (g.size() == 0) throw InvalidArgument("ball grid is empty; increase the resolution");
  return g;
}

void summarize(ScalingDiagnostic& diag) {
  const std::size_t K = diag.radii.size();
  diag.mean.assign(K, 0.0);
  diag.std_error.assign(K, 0.0);
  diag.q01.assign(K, 0.0);
  diag.q99.assign(K, 0.0);
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& s = diag.samples[k];
    diag.mean[k] = mean(s);
    diag.std_error[k] = s.size() > 1 ? std_error(s) : 0.0;
    diag.q01[k] = quantile(s, 0.01);
    diag.q99[k] = quantile(s, 0.99);
    if (diag.mean[k] > 0.0) {
      lx.push_back(std::log2(diag.radii[k]));
      ly.push_back(std::log2(diag.mean[k]));
    }
  }
  if (lx.size() >= 2) diag.fit = ols_fit(lx, ly);
}

}  // namespace

ScalingDiagnostic moment_scaling(const CovarianceModel& model, double x, PointView t,
                                 const std::vector<double>& radii, int n, std::uint64_t seed,
                                 const MomentOptions& options) {
  check_radii(radii);
  if (n < 1) throw InvalidArgument("moment_scaling: moment order must be >= 1");
  if (model.components() != 1) throw InvalidArgument("moment_scaling: scalar fields only");
  if (t.size() != model.index_dim()) throw InvalidArgument("moment_scaling: center dimension mismatch");
  if (options.replicates < 2) throw InvalidArgument("moment_scaling: need at least two replicates");
  const HurstVector H = model.induced_hurst();
  const double Q = H.q();
  if (!(1.0 < Q)) throw InvalidArgument("moment_scaling: needs d < Q");

  ScalingDiagnostic diag;
  diag.radii = radii;
  diag.target = static_cast<double>(n) * (Q - 1.0);
  diag.samples.assign(radii.size(), std::vector<double>(options.replicates));
  for (std::size_t k = 0; k < radii.size(); ++k) {
    auto grid = std::make_shared<const Grid>(ball_grid(t, radii[k], H, model.domain(), options.points_per_axis));
    const GaussianSampler sampler(model, grid);
    const double width = options.bin_factor * radii[k];
    const std::uint64_t stream = substream_seed(seed, {0x3031ULL, k});
    auto& out = diag.samples[k];
    parallel_for(options.replicates, options.threads, [&](std::size_t rep) {
      const FieldSample s = sampler.draw(stream, rep, 1);
      double acc = 0.0;
      for (std::size_t i = 0; i < grid->size(); ++i) {
        if (std::abs(s.values(static_cast<Eigen::Index>(i), 0) - x) <= 0.5 * width) acc += grid->weights[i];
      }
      out[rep] = std::pow(acc / width, n);
    });
  }
  summarize(diag);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(diag.mean[k] > 0.0) || diag.std_error[k] > 0.25 * diag.mean[k]) diag.flagged = true;
  }
  return diag;
}

std::vector<double> GaugeStudy::holder_max(std::size_t lo, std::size_t hi) const {
  if (lo >= hi || hi > radii.size()) throw InvalidArgument("holder_max: bad radius range");
  std::vector<double> out(holder[lo]);
  for (std::size_t k = lo + 1; k < hi; ++k) {
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = std::max(out[r], holder[k][r]);
  }
  return out;
}

std::vector<double> GaugeStudy::chung_min(std::size_t lo, std::size_t hi) const {
  if (lo >= hi || hi > radii.size()) throw InvalidArgument("chung_min: bad radius range");
  std::vector<double> out(chung[lo]);
  for (std::size_t k = lo + 1; k < hi; ++k) {
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = std::min(out[r], chung[k][r]);
  }
  return out;
}

GaugeStudy gauge_study(const CovarianceModel& model, PointView t, const std::vector<double>& radii,
                       std::uint64_t seed, const GaugeOptions& options) {
  check_radii(radii);
  if (radii.front() >= std::exp(-1.0)) throw InvalidArgument("gauge_study: radii must be below 1/e");
  if (model.components() != 1) throw InvalidArgument("gauge_study: scalar fields only");
  if (t.size() != model.index_dim()) throw InvalidArgument("gauge_study: center dimension mismatch");
  if (!model.domain().contains(t)) throw InvalidArgument("gauge_study: center outside the domain");
  const HurstVector H = model.induced_hurst();
  const std::size_t K = radii.size();

  // Union of the per-ball grids plus the center; duplicates are merged.
  std::map<Point, std::size_t> where;
  auto grid = std::make_shared<Grid>();
  auto add = [&](const Point& p) {
    auto [it, fresh] = where.emplace(p, grid->points.size());
    if (fresh) {
      grid->points.push_back(p);
      grid->weights.push_back(0.0);
    }
    return it->second;
  };
  const std::size_t center = add(Point(t.begin(), t.end()));
  std::vector<std::vector<std::size_t>> own(K);
  std::vector<std::vector<double>> own_w(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Grid g = ball_grid(t, radii[k], H, model.domain(), options.points_per_radius);
    for (std::size_t i = 0; i < g.size(); ++i) {
      own[k].push_back(add(g.points[i]));
      own_w[k].push_back(g.weights[i]);
    }
  }
  grid->spec = "nested balls";
  // Deepest ball holding each point; a point lies in balls 0..depth.
  std::vector<long> depth(grid->size(), -1);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double d = rho(grid->points[i], t, H);
    for (std::size_t k = 0; k < K && d <= radii[k]; ++k) depth[i] = static_cast<long>(k);
  }
  const GaussianSampler sampler(model, grid);

  GaugeStudy st;
  st.radii = radii;
  st.Q = H.q();
  st.d = 1.0;
  const std::size_t R = options.replicates;
  st.holder.assign(K, std::vector<double>(R));
  st.chung.assign(K, std::vector<double>(R));
  st.osc.assign(K, std::vector<double>(R));
  std::vector<std::size_t> hold(R, 0);
  std::vector<char> monotone(R, 1);
  std::vector<double> phi(K), scale(K);
  for (std::size_t k = 0; k < K; ++k) {
    phi[k] = gauge_phi(radii[k], st.Q, st.d, options.gauge);
    scale[k] = chung_scale(radii[k], st.Q);
  }
  const std::uint64_t stream = substream_seed(seed, {0x6A06ULL});

  parallel_for(R, options.threads, [&](std::size_t rep) {
    const FieldSample s = sampler.draw(stream, rep, 1);
    const auto X = s.values.col(0);
    const double xt = X(static_cast<Eigen::Index>(center));
    std::vector<double> best(K, 0.0), lo(K, std::numeric_limits<double>::infinity()),
        hi(K, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < grid->size(); ++i) {
      if (depth[i] < 0) continue;
      const auto b = static_cast<std::size_t>(depth[i]);
      const double v = X(static_cast<Eigen::Index>(i));
      best[b] = std::max(best[b], std::abs(v - xt));
      lo[b] = std::min(lo[b], v);
      hi[b] = std::max(hi[b], v);
    }
    for (std::size_t k = K - 1; k-- > 0;) {
      best[k] = std::max(best[k], best[k + 1]);
      lo[k] = std::min(lo[k], lo[k + 1]);
      hi[k] = std::max(hi[k], hi[k + 1]);
    }
    std::vector<double> vals;
    for (std::size_t k = 0; k < K; ++k) {
      vals.clear();
      for (std::size_t i : own[k]) vals.push_back(X(static_cast<Eigen::Index>(i)));
      const SupEstimate sup = sup_local_time(vals, own_w[k], options.sup_bins);
      st.holder[k][rep] = sup.sup / phi[k];
      st.osc[k][rep] = best[k];
      st.chung[k][rep] = best[k] / scale[k];
      if (sup.measure <= (1.0 + options.ineq_tolerance) * sup.sup * (hi[k] - lo[k])) ++hold[rep];
      if (k > 0 && best[k] > best[k - 1]) monotone[rep] = 0;
    }
  });
  st.ineq_pairs = K * R;
  for (std::size_t rep = 0; rep < R; ++rep) {
    st.ineq_hold += hold[rep];
    st.osc_monotone = st.osc_monotone && monotone[rep];
  }
  return st;
}

ScalingDiagnostic holder_gauge_ratio(const CovarianceModel& model, PointView t, const std::vector<double>& radii,
                                     std::uint64_t seed, const GaugeOptions& options) {
  const GaugeStudy st = gauge_study(model, t, radii, seed, options);
  ScalingDiagnostic diag;
  diag.radii = radii;
  diag.samples = st.holder;
  summarize(diag);
  return diag;
}

ScalingDiagnostic chung_lil_ratio(const CovarianceModel& model, PointView t, const std::vector<double>& radii,
                                  std::uint64_t seed, const GaugeOptions& options) {
  const GaugeStudy st = gauge_study(model, t, radii, seed, options);
  ScalingDiagnostic diag;
  diag.radii = radii;
  diag.samples = st.chung;
  summarize(diag);
  return diag;
}

double quantile_shift(const std::vector<double>& a, const std::vector<double>& b, double p) {
  const double qa = quantile(a, p);
  const double qb = quantile(b, p);
  if (!(qa > 0.0) || !(qb > 0.0)) return std::numeric_limits<double>::infinity();
  return std::max(qa / qb, qb / qa);
}

TransformIdentityReport transform_identity_check(const CovarianceModel& inner, const Eigen::MatrixXd& A,
                                                 PointView z, std::shared_ptr<const Grid> grid, double width,
                                                 std::size_t replicates, std::uint64_t seed, unsigned threads) {
  if (inner.is_transformed()) throw InvalidArgument("transform_identity_check: inner model must be scalar");
  if (A.rows() != A.cols() || A.rows() == 0) throw InvalidArgument("transform_identity_check: A must be square");
  const auto d = static_cast<std::size_t>(A.rows());
  if (z.size() != d) throw InvalidArgument("transform_identity_check: level dimension mismatch");
  if (!(width > 0.0) || replicates == 0) throw InvalidArgument("transform_identity_check: bad width or replicates");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw InvalidArgument("transform_identity_check: A is singular");

  TransformIdentityReport rep;
  rep.det = A.determinant();
  const double adet = std::abs(rep.det);
  const Eigen::VectorXd zv = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(d));
  const Eigen::VectorXd y = lu.solve(zv);
  const double width_u = width / std::pow(adet, 1.0 / static_cast<double>(d));
  const double vol_v = std::pow(width, static_cast<double>(d));
  const double vol_u = std::pow(width_u, static_cast<double>(d));

  const GaussianSampler sampler(inner, grid);
  rep.per_replicate_v.assign(replicates, 0.0);
  rep.per_replicate_u.assign(replicates, 0.0);
  parallel_for(replicates, threads, [&](std::size_t r) {
    const FieldSample s = sampler.draw(seed, r, d);
    const Eigen::MatrixXd V = s.values * A.transpose();
    double mv = 0.0, mu = 0.0;
    for (Eigen::Index i = 0; i < s.values.rows(); ++i) {
      const double w = grid->weights[static_cast<std::size_t>(i)];
      if (((V.row(i).transpose() - zv).cwiseAbs().array() <= 0.5 * width).all()) mv += w;
      if (((s.values.row(i).transpose() - y).cwiseAbs().array() <= 0.5 * width_u).all()) mu += w;
    }
    rep.per_replicate_v[r] = mv / vol_v;
    rep.per_replicate_u[r] = mu / vol_u / adet;
  });
  rep.L_v = mean(rep.per_replicate_v);
  rep.L_u_mapped = mean(rep.per_replicate_u);
  rep.gap = rep.L_u_mapped > 0.0 ? std::abs(rep.L_v - rep.L_u_mapped) / rep.L_u_mapped
                                 : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace anisolt
