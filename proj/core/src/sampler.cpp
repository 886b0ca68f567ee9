#include "anisolt/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "anisolt/parallel.hpp"
#include "anisolt/rng.hpp"

namespace anisolt {

double Grid::total_weight() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

Grid Grid::product(const Box& box, const std::vector<long>& counts, Placement placement) {
  const std::size_t n = box.dim();
  if (counts.size() != n) throw InvalidArgument("Grid::product: counts dimension mismatch");
  if (box.empty()) throw InvalidArgument("Grid::product: empty box");
  std::size_t total = 1;
  std::vector<double> width(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (counts[j] < 1) throw InvalidArgument("Grid::product: need at least one cell per axis");
    total *= static_cast<std::size_t>(counts[j]);
    width[j] = (box.hi[j] - box.lo[j]) / static_cast<double>(counts[j]);
  }
  const double offset = placement == Placement::center ? 0.5 : 1.0;
  const double w = std::accumulate(width.begin(), width.end(), 1.0, std::multiplies<>());

  Grid g;
  g.points.reserve(total);
  g.weights.assign(total, w);
  std::vector<long> idx(n, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Point p(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = box.lo[j] + (static_cast<double>(idx[j]) + offset) * width[j];
    g.points.push_back(std::move(p));
    for (std::size_t j = n; j-- > 0;) {
      if (++idx[j] < counts[j]) break;
      idx[j] = 0;
    }
  }
  std::ostringstream os;
  os.precision(17);
  os << "product lo=" << format_list(box.lo) << " hi=" << format_list(box.hi) << " counts=";
  for (std::size_t j = 0; j < n; ++j) os << (j ? "," : "") << counts[j];
  os << " placement=" << (placement == Placement::center ? "center" : "upper");
  g.spec = os.str();
  return g;
}

FactorizationError::FactorizationError(std::size_t leading_minor, double max_jitter)
    : std::runtime_error("Gram matrix not positive definite after jitter " + std::to_string(max_jitter) +
                         "; leading minor of order " + std::to_string(leading_minor) + " fails"),
      minor_(leading_minor) {}

SingularMatrixError::SingularMatrixError(double condition_number)
    : std::runtime_error("conditioning covariance is singular (condition number " +
                         std::to_string(condition_number) + ")"),
      cond_(condition_number) {}

GramMatrix gram_matrix(const CovarianceModel& model, const std::vector<Point>& points) {
  const auto m = static_cast<Eigen::Index>(points.size());
  GramMatrix g{Eigen::MatrixXd(m, m), 0};
  const CovarianceModel& scalar = model.scalar_model();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      if (i != j && points[static_cast<std::size_t>(i)] == points[static_cast<std::size_t>(j)]) {
        throw InvalidArgument("gram_matrix: points must be pairwise distinct");
      }
      const CovEval c = scalar.scalar_covariance(points[static_cast<std::size_t>(i)],
                                                 points[static_cast<std::size_t>(j)]);
      g.K(i, j) = g.K(j, i) = c.value;
      if (c.flagged) ++g.flagged;
    }
  }
  return g;
}

namespace {

// Order of the first leading minor that is not positive definite.
std::size_t failing_minor(const Eigen::MatrixXd& K) {
  const Eigen::Index m = K.rows();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    double d = K(j, j) - L.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) return static_cast<std::size_t>(j + 1);
    L(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < m; ++i) {
      L(i, j) = (K(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
    }
  }
  return static_cast<std::size_t>(m);
}

}  // namespace

JitteredCholesky jittered_cholesky(const Eigen::MatrixXd& K) {
  const Eigen::Index m = K.rows();
  if (m == 0) return {Eigen::MatrixXd(0, 0), 0.0};
  const double scale = K.trace() / static_cast<double>(m);
  Eigen::MatrixXd J;
  for (double lambda = 1e-12; lambda <= 1e-8 * 1.0000001; lambda *= 10.0) {
    J = K;
    J.diagonal().array() += lambda * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(J);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), lambda};
  }
  throw FactorizationError(failing_minor(J), 1e-8);
}

GaussianSampler::GaussianSampler(const CovarianceModel& model, std::shared_ptr<const Grid> grid)
    : model_(model), grid_(std::move(grid)) {
  if (!grid_ || grid_->size() == 0) throw InvalidArgument("sampler needs a non-empty grid");
  if (grid_->dim() != model_.index_dim()) throw InvalidArgument("grid dimension does not match model");

  // Brownian motion on t >= 0: the Cholesky factor of min(s,t) is the
  // cumulative sum of sqrt(t_i - t_{i-1}), applied in O(M).
  const auto* fbm = std::get_if<FbmType>(&model_.scalar_model().kind());
  if (fbm && fbm->H.dim() == 1 && fbm->H[0] == 0.5) {
    order_.resize(grid_->size());
    std::iota(order_.begin(), order_.end(), 0);
    std::sort(order_.begin(), order_.end(),
              [&](std::size_t a, std::size_t b) { return grid_->points[a][0] < grid_->points[b][0]; });
    bool ok = grid_->points[order_.front()][0] > 0.0;
    for (std::size_t k = 1; ok && k < order_.size(); ++k) {
      ok = grid_->points[order_[k]][0] > grid_->points[order_[k - 1]][0];
    }
    brownian_ = ok;
    if (brownian_) return;
    order_.clear();
  }
  const GramMatrix g = gram_matrix(model_, grid_->points);
  flagged_ = g.flagged;
  auto chol = jittered_cholesky(g.K);
  L_ = std::move(chol.L);
  lambda_ = chol.lambda;
}

FieldSample GaussianSampler::draw(std::uint64_t seed, std::uint64_t replicate, std::size_t d) const {
  if (model_.is_transformed()) d = model_.components();
  if (d == 0) throw InvalidArgument("sample needs at least one component");
  const auto M = static_cast<Eigen::Index>(grid_->size());
  const auto D = static_cast<Eigen::Index>(d);
  Rng rng(seed, {replicate});
  Eigen::MatrixXd Z(M, D);
  for (Eigen::Index c = 0; c < D; ++c) {
    for (Eigen::Index i = 0; i < M; ++i) Z(i, c) = rng.normal();
  }

  Eigen::MatrixXd U(M, D);
  if (brownian_) {
    for (Eigen::Index c = 0; c < D; ++c) {
      double acc = 0.0, prev = 0.0;
      for (Eigen::Index k = 0; k < M; ++k) {
        const std::size_t i = order_[static_cast<std::size_t>(k)];
        const double t = grid_->points[i][0];
        acc += std::sqrt(t - prev) * Z(k, c);
        prev = t;
        U(static_cast<Eigen::Index>(i), c) = acc;
      }
    }
  } else {
    U.noalias() = L_.triangularView<Eigen::Lower>() * Z;
  }

  FieldSample s;
  s.grid = grid_;
  s.model = model_.to_config();
  s.seed = seed;
  s.replicate = replicate;
  if (const auto* tr = std::get_if<Transformed>(&model_.kind())) {
    s.values = U * tr->A.transpose();
  } else {
    s.values = std::move(U);
  }
  return s;
}

FieldSample sample(const CovarianceModel& model, const Grid& grid, std::size_t d, std::uint64_t seed) {
  GaussianSampler sampler(model, std::make_shared<const Grid>(grid));
  return sampler.draw(seed, 0, d);
}

ConditionalVariance conditional_variance(const CovarianceModel& model, PointView t,
                                         const std::vector<Point>& conditioners) {
  const CovarianceModel& scalar = model.scalar_model();
  ConditionalVariance out;
  const CovEval v = scalar.variance(t);
  out.variance = v.value;
  out.flagged = v.flagged;
  if (conditioners.empty()) return out;

  const GramMatrix g = gram_matrix(scalar, conditioners);
  const auto n = static_cast<Eigen::Index>(conditioners.size());
  Eigen::VectorXd c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const CovEval e = scalar.scalar_covariance(conditioners[static_cast<std::size_t>(i)], t);
    c(i) = e.value;
    out.flagged = out.flagged || e.flagged;
  }
  out.flagged = out.flagged || g.flagged > 0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.K, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  out.condition_number = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(lmin > 0.0) || out.condition_number > 1e13) throw SingularMatrixError(out.condition_number);

  Eigen::LLT<Eigen::MatrixXd> llt(g.K);
  if (llt.info() != Eigen::Success) throw SingularMatrixError(out.condition_number);
  out.variance -= c.dot(llt.solve(c));
  return out;
}

SlndRatio slnd_ratio(const CovarianceModel& model, const HurstVector& H_metric, PointView t,
                     const std::vector<Point>& conditioners) {
  const ConditionalVariance cv = conditional_variance(model, t, conditioners);
  SlndRatio r;
  r.flagged = cv.flagged;
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& p : conditioners) dmin = std::min(dmin, rho(t, p, H_metric));
  if (!conditioners.empty()) r.ratio = cv.variance / (dmin * dmin);
  const Point origin(t.size(), 0.0);
  const double d0 = std::min(dmin, rho(t, origin, H_metric));
  r.ratio_origin = cv.variance / (d0 * d0);
  return r;
}

SlndReport slnd_scan(const CovarianceModel& model, const Box& domain, const HurstVector& H_metric,
                     std::size_t configs, std::size_t n_max, std::uint64_t seed, unsigned threads) {
  if (!(H_metric == model.induced_hurst())) {
    throw InvalidArgument("slnd_scan: metric exponents must be the model's induced exponents");
  }
  if (domain.dim() != model.index_dim() || domain.empty()) throw InvalidArgument("slnd_scan: bad domain");
  if (n_max < 1) throw InvalidArgument("slnd_scan: n_max must be >= 1");

  struct Slot {
    double ratio = std::numeric_limits<double>::quiet_NaN();
    double ratio_origin = std::numeric_limits<double>::quiet_NaN();
    std::size_t n = 0;
    bool skipped = false;
    bool flagged = false;
  };
  std::vector<Slot> slots(configs);
  parallel_for(configs, threads, [&](std::size_t k) {
    Rng rng(seed, {0x51ADULL, k});
    auto draw = [&] {
      Point p(domain.dim());
      for (std::size_t j = 0; j < p.size(); ++j) p[j] = rng.uniform(domain.lo[j], domain.hi[j]);
      return p;
    };
    Slot& s = slots[k];
    s.n = static_cast<std::size_t>(rng.integer(1, static_cast<long>(n_max)));
    const Point t = draw();
    std::vector<Point> cond;
    for (std::size_t i = 0; i < s.n; ++i) cond.push_back(draw());
    try {
      const SlndRatio r = slnd_ratio(model, H_metric, t, cond);
      s.ratio = *r.ratio;
      s.ratio_origin = r.ratio_origin;
      s.flagged = r.flagged;
    } catch (const SingularMatrixError&) {
      s.skipped = true;
    }
  });

  SlndReport rep;
  rep.configs = configs;
  rep.n_max = n_max;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.min_ratio_origin = std::numeric_limits<double>::infinity();
  for (const Slot& s : slots) {
    rep.sizes.push_back(s.n);
    rep.ratios.push_back(s.ratio);
    rep.ratios_origin.push_back(s.ratio_origin);
    if (s.skipped) {
      ++rep.skipped;
      continue;
    }
    if (s.flagged) ++rep.flagged;
    rep.min_ratio = std::min(rep.min_ratio, s.ratio);
    rep.min_ratio_origin = std::min(rep.min_ratio_origin, s.ratio_origin);
  }
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string write_field_sample_csv(const FieldSample& s) {
  const Grid& g = *s.grid;
  std::ostringstream os;
  os << "# anisolt-field-sample v1\n";
  for (const auto& [k, v] : s.model) os << "# " << k << '=' << v << '\n';
  os << "# seed=" << s.seed << '\n';
  os << "# replicate=" << s.replicate << '\n';
  os << "# grid=" << g.spec << '\n';
  const bool uniform = std::all_of(g.weights.begin(), g.weights.end(),
                                   [&](double w) { return w == g.weights.front(); });
  os << "# weights=";
  if (uniform) {
    os << "uniform:" << fmt(g.weights.front());
  } else {
    os << format_list(g.weights);
  }
  os << '\n';
  os << "index";
  for (std::size_t j = 0; j < g.dim(); ++j) os << ",t" << j;
  for (std::size_t c = 0; c < s.components(); ++c) os << ",x" << c;
  os << '\n';
  for (std::size_t i = 0; i < g.size(); ++i) {
    os << i;
    for (double v : g.points[i]) os << ',' << fmt(v);
    for (std::size_t c = 0; c < s.components(); ++c) {
      os << ',' << fmt(s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    }
    os << '\n';
  }
  return os.str();
}

FieldSample read_field_sample_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  FieldSample s;
  auto grid = std::make_shared<Grid>();
  std::string weights;
  std::size_t tcols = 0, xcols = 0;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "seed") s.seed = std::stoull(value);
      else if (key == "replicate") s.replicate = std::stoull(value);
      else if (key == "grid") grid->spec = value;
      else if (key == "weights") weights = value;
      else s.model[key] = value;
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      std::stringstream hs(line);
      std::string col;
      while (std::getline(hs, col, ',')) {
        if (col.rfind('t', 0) == 0) ++tcols;
        if (col.rfind('x', 0) == 0) ++xcols;
      }
      continue;
    }
    rows.push_back(parse_list(line));
    if (rows.back().size() != 1 + tcols + xcols) throw InvalidArgument("field sample row has wrong width");
  }
  if (!header_seen) throw InvalidArgument("field sample CSV has no column header");
  s.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(xcols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    grid->points.emplace_back(rows[i].begin() + 1, rows[i].begin() + 1 + static_cast<long>(tcols));
    for (std::size_t c = 0; c < xcols; ++c) {
      s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][1 + tcols + c];
    }
  }
  if (weights.rfind("uniform:", 0) == 0) {
    grid->weights.assign(rows.size(), std::stod(weights.substr(8)));
  } else if (!weights.empty()) {
    grid->weights = parse_list(weights);
  }
  if (grid->weights.size() != rows.size()) throw InvalidArgument("field sample weights do not match rows");
  s.grid = std::move(grid);
  return s;
}

}  // namespace anisolt
