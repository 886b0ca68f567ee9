#include "anisolt/harness/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "anisolt/covariance.hpp"
#include "anisolt/geometry.hpp"
#include "anisolt/level_set.hpp"
#include "anisolt/local_time.hpp"
#include "anisolt/parallel.hpp"
#include "anisolt/rng.hpp"
#include "anisolt/sampler.hpp"
#include "anisolt/stats.hpp"

namespace anisolt::harness {

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

using nlohmann::json;

class Csv {
 public:
  explicit Csv(const std::string& header) { os_ << header << '\n'; }

  template <typename... Args>
  void row(const Args&... args) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(args), first = false), ...);
    os_ << '\n';
  }
  std::string str() const { return os_.str(); }

 private:
  static std::string cell(double v) { return csv_number(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "1" : "0"; }
  template <typename I>
    requires std::is_integral_v<I>
  static std::string cell(I v) {
    return std::to_string(v);
  }
  std::ostringstream os_;
};

// JSON has no NaN; keep the key with a null value instead.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

unsigned threads_of(const RunConfig& c) {
  const long t = c.integer("run.threads");
  if (t < 1 || t > 1024) throw ConfigError("run.threads must be in 1..1024");
  return static_cast<unsigned>(t);
}

std::size_t count_of(const RunConfig& c, const std::string& key, long min = 0) {
  const long v = c.integer(key);
  if (v < min) throw ConfigError(key + " must be at least " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

HurstVector hurst_of(const RunConfig& c, const std::string& key) {
  try {
    return HurstVector(c.list(key));
  } catch (const InvalidArgument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

CovarianceModel model_of(const RunConfig& c) {
  try {
    return CovarianceModel::from_config(c.model_config());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

Box unit_box(std::size_t n) { return Box{Point(n, 0.0), Point(n, 1.0)}; }

std::vector<double> slope_fit_logs(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const LinearFit f = ols_fit(lx, ly);
  return {f.slope, f.slope_stderr};
}

// ---------------------------------------------------------------------------

struct VoronoiInstance {
  std::vector<Point> generators;
  HurstVector H{0.5};
};

VoronoiInstance voronoi_instance(Rng& rng, const std::vector<long>& dims, long max_generators, double h_min,
                                 double h_max) {
  const auto N = static_cast<std::size_t>(dims[static_cast<std::size_t>(
      rng.integer(0, static_cast<long>(dims.size()) - 1))]);
  const long m = rng.integer(1, max_generators);
  std::vector<double> h(N);
  for (auto& v : h) v = rng.uniform(h_min, h_max);
  VoronoiInstance inst{{}, HurstVector(h)};
  for (long k = 0; k < m; ++k) {
    Point p(N);
    for (auto& v : p) v = rng.uniform();
    inst.generators.push_back(std::move(p));
  }
  return inst;
}

}  // namespace

ExperimentResult run_voronoi(const RunConfig& c) {
  const std::uint64_t seed = c.u64("run.seed");
  const unsigned threads = threads_of(c);
  const std::size_t instances = count_of(c, "voronoi.instances");
  const long max_generators = c.integer("voronoi.max_generators");
  const auto dims = c.int_list("voronoi.dims");
  const double h_min = c.num("voronoi.h_min");
  const double h_max = c.num("voronoi.h_max");
  const std::size_t partitions = count_of(c, "voronoi.partitions");
  const long raster = c.integer("voronoi.raster");
  if (max_generators < 1) throw ConfigError("voronoi.max_generators must be at least 1");
  if (dims.empty()) throw ConfigError("voronoi.dims is empty");
  for (long n : dims) {
    if (n < 1 || n > 6) throw ConfigError("voronoi.dims entries must be in 1..6");
  }
  if (!(h_min > 0.0 && h_min <= h_max && h_max < 1.0)) {
    throw ConfigError("voronoi.h_min/h_max must satisfy 0 < h_min <= h_max < 1");
  }
  if (raster < 1) throw ConfigError("voronoi.raster must be at least 1");

  struct Slot {
    std::size_t N = 0, m = 0;
    bool pass = true;
  };
  std::vector<Slot> slots(instances);
  parallel_for(instances, threads, [&](std::size_t i) {
    Rng rng(seed, {0x7A11ULL, i});
    const auto inst = voronoi_instance(rng, dims, max_generators, h_min, h_max);
    const std::size_t N = inst.H.dim();
    Point t(N);
    for (auto& v : t) v = rng.uniform();
    double eps = 0.0;
    while (eps == 0.0) eps = rng.uniform();
    const std::size_t l = nearest_generator(t, inst.generators, inst.H);
    slots[i] = {N, inst.generators.size(), star_shape_check(inst.generators, inst.H, l, t, eps)};
  });

  std::map<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, std::size_t>> by_size;
  std::size_t failures = 0;
  for (const Slot& s : slots) {
    auto& e = by_size[{s.N, s.m}];
    ++e.first;
    if (!s.pass) {
      ++e.second;
      ++failures;
    }
  }
  Csv sizes("N,generators,instances,failures");
  for (const auto& [k, v] : by_size) sizes.row(k.first, k.second, v.first, v.second);

  struct PartSlot {
    std::size_t N = 0, m = 0, cells = 0, misassigned = 0, star_failures = 0, checks = 0;
  };
  std::vector<PartSlot> parts(partitions);
  parallel_for(partitions, threads, [&](std::size_t p) {
    Rng rng(seed, {0x7A12ULL, p});
    auto inst = voronoi_instance(rng, dims, max_generators, h_min, h_max);
    const std::size_t N = inst.H.dim();
    const VoronoiPartition part(inst.generators, inst.H, unit_box(N), std::vector<long>(N, raster));
    PartSlot& s = parts[p];
    s.N = N;
    s.m = inst.generators.size();
    s.cells = part.cell_count();
    s.misassigned = part.verify();
    for (std::size_t f = 0; f < part.cell_count(); ++f) {
      const Point t = part.cell_center(f);
      for (double eps : {0.25, 0.5, 0.75}) {
        ++s.checks;
        if (!star_shape_check(part, part.assigned(f), t, eps)) ++s.star_failures;
      }
    }
  });
  Csv pcsv("partition,N,generators,cells,misassigned,star_checks,star_failures");
  std::size_t misassigned = 0, part_failures = 0;
  for (std::size_t p = 0; p < partitions; ++p) {
    const auto& s = parts[p];
    pcsv.row(p, s.N, s.m, s.cells, s.misassigned, s.checks, s.star_failures);
    misassigned += s.misassigned;
    part_failures += s.star_failures;
  }

  ExperimentResult r;
  r.csv = {{"voronoi_by_size.csv", sizes.str()}, {"voronoi_partitions.csv", pcsv.str()}};
  r.summary = {{"instances", instances},
               {"star_shape_failures", failures},
               {"partitions", partitions},
               {"partition_misassigned_cells", misassigned},
               {"partition_star_shape_failures", part_failures}};
  if (failures > 0) r.flags.push_back("star-shape check failed on " + std::to_string(failures) + " instances");
  if (misassigned + part_failures > 0) r.flags.push_back("rasterized partition checks failed");
  return r;
}

ExperimentResult run_covering(const RunConfig& c) {
  const std::uint64_t seed = c.u64("run.seed");
  const unsigned threads = threads_of(c);
  const HurstVector H = hurst_of(c, "geometry.H");
  const auto ns = c.int_list("covering.n");
  const std::size_t trials = count_of(c, "covering.trials", 1);
  if (ns.empty()) throw ConfigError("covering.n is empty");
  for (long n : ns) {
    if (n < 1) throw ConfigError("covering.n entries must be positive");
  }

  Csv csv("n,trial,adversarial,count");
  json per_n = json::array();
  std::size_t overall = 0;
  std::optional<std::size_t> common;
  bool identical = true;
  for (long n : ns) {
    const CoveringStats st = covering_trials(H, static_cast<std::size_t>(n), trials, seed, threads);
    for (std::size_t t = 0; t < trials; ++t) csv.row(n, t, static_cast<bool>(st.adversarial[t]), st.counts[t]);
    std::size_t adv_max = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      if (st.adversarial[t]) adv_max = std::max(adv_max, st.counts[t]);
    }
    per_n.push_back({{"n", n}, {"max_count", st.max_count}, {"adversarial_max_count", adv_max}});
    overall = std::max(overall, st.max_count);
    if (common && *common != st.max_count) identical = false;
    common = st.max_count;
  }

  ExperimentResult r;
  r.csv = {{"covering_trials.csv", csv.str()}};
  r.summary = {{"N", H.dim()},         {"H", H.values()},          {"trials", trials},
               {"per_n", per_n},       {"max_count", overall},     {"max_count_identical_across_n", identical}};
  if (H.dim() == 1 && overall > 2) r.flags.push_back("one-dimensional covering count exceeds 2");
  return r;
}

ExperimentResult run_integral(const RunConfig& c) {
  const std::uint64_t seed = c.u64("run.seed");
  const unsigned threads = threads_of(c);
  const HurstVector H = hurst_of(c, "geometry.H");
  const auto betas = c.list("integral.beta");
  const auto ms = c.int_list("integral.m");
  const std::size_t sets = count_of(c, "integral.sets", 1);
  IntegralOptions opts;
  opts.max_order = static_cast<int>(c.integer("integral.max_order"));
  opts.rel_change = c.num("integral.rel_change");
  const double radius = c.num("integral.analytic_radius");
  const double Q = H.q();
  if (betas.empty() || ms.empty()) throw ConfigError("integral.beta and integral.m must be non-empty");
  for (double b : betas) {
    if (!(b > 0.0 && b < Q)) throw ConfigError("integral.beta entries must lie in (0, Q)");
  }
  for (long m : ms) {
    if (m < 1) throw ConfigError("integral.m entries must be positive");
  }
  if (opts.max_order < opts.start_order) throw ConfigError("integral.max_order is below the start order");
  if (!(opts.rel_change > 0.0)) throw ConfigError("integral.rel_change must be positive");
  if (radius < 0.0) throw ConfigError("integral.analytic_radius must be non-negative");

  const std::size_t N = H.dim();
  const Box S = unit_box(N);
  const double lambda = S.volume();
  const std::size_t per_beta = ms.size() * sets;
  struct Slot {
    IntegralEstimate est;
    double C = 0.0;
  };
  std::vector<Slot> slots(betas.size() * per_beta);
  parallel_for(slots.size(), threads, [&](std::size_t i) {
    const std::size_t b = i / per_beta, mi = (i % per_beta) / sets, s = i % sets;
    const auto m = static_cast<std::size_t>(ms[mi]);
    Rng rng(seed, {0x1A7ULL, mi, s});
    std::vector<Point> pts(m, Point(N));
    for (auto& p : pts) {
      for (auto& v : p) v = rng.uniform();
    }
    Slot& sl = slots[i];
    sl.est = min_dist_integral(S, pts, betas[b], H, opts);
    const double beta = betas[b];
    sl.C = sl.est.value / (std::pow(static_cast<double>(m), beta / Q) * std::pow(lambda, 1.0 - beta / Q));
  });

  Csv csv("beta,m,set,value,order,converged,cells,C");
  json per_beta_json = json::array();
  std::size_t unconverged = 0;
  for (std::size_t b = 0; b < betas.size(); ++b) {
    json per_m = json::array();
    double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
    for (std::size_t mi = 0; mi < ms.size(); ++mi) {
      std::vector<double> cs;
      for (std::size_t s = 0; s < sets; ++s) {
        const Slot& sl = slots[b * per_beta + mi * sets + s];
        csv.row(betas[b], ms[mi], s, sl.est.value, sl.est.order, sl.est.converged, sl.est.cells, sl.C);
        cs.push_back(sl.C);
        if (!sl.est.converged) ++unconverged;
      }
      const double cm = mean(cs);
      cmin = std::min(cmin, cm);
      cmax = std::max(cmax, cm);
      per_m.push_back({{"m", ms[mi]}, {"mean_C", num(cm)}});
    }
    per_beta_json.push_back({{"beta", betas[b]}, {"per_m", per_m}, {"C_spread", num(cmax / cmin)}});
  }

  ExperimentResult r;
  r.csv = {{"integral_estimates.csv", csv.str()}};
  r.summary = {{"H", H.values()}, {"Q", Q}, {"per_beta", per_beta_json}, {"unconverged", unconverged}};
  if (radius > 0.0) {
    const HurstVector lip = HurstVector::allowing_unit({1.0, 1.0});
    IntegralOptions a = opts;
    a.restrict_to = AnisoBall{{0.0, 0.0}, radius, MetricKind::rho};
    const IntegralEstimate e = min_dist_integral(Box{{-radius, -radius}, {radius, radius}}, {}, 1.0, lip, a);
    const double target = 4.0 * radius;
    r.summary["analytic"] = {{"radius", radius},
                             {"value", e.value},
                             {"target", target},
                             {"rel_error", std::abs(e.value - target) / target},
                             {"converged", e.converged}};
    if (!e.converged) ++unconverged;
  }
  r.summary["unconverged"] = unconverged;
  if (unconverged > 0) r.flags.push_back(std::to_string(unconverged) + " integral estimates did not converge");
  return r;
}

ExperimentResult run_slnd(const RunConfig& c) {
  const std::uint64_t seed = c.u64("run.seed");
  const unsigned threads = threads_of(c);
  const CovarianceModel model = model_of(c);
  if (model.is_transformed()) throw ConfigError("slnd needs a scalar model");
  const std::size_t configs = count_of(c, "slnd.configs", 1);
  const std::size_t n_max = count_of(c, "slnd.n_max", 1);
  const HurstVector Hm = model.induced_hurst();

  // Configuration k is the same draw in every scan, so the doubled scan
  // contains the base one.
  const SlndReport rep = slnd_scan(model, model.domain(), Hm, 2 * configs, n_max, seed, threads);
  Csv csv("config,n,ratio,ratio_origin,skipped");
  double base_min = std::numeric_limits<double>::infinity();
  double base_min_origin = std::numeric_limits<double>::infinity();
  std::size_t skipped = 0;
  for (std::size_t k = 0; k < rep.ratios.size(); ++k) {
    const bool skip = std::isnan(rep.ratios[k]);
    csv.row(k, rep.sizes[k], rep.ratios[k], rep.ratios_origin[k], skip);
    if (k < configs && !skip) {
      base_min = std::min(base_min, rep.ratios[k]);
      base_min_origin = std::min(base_min_origin, rep.ratios_origin[k]);
    }
    if (k < configs && skip) ++skipped;
  }
  const double shift = std::max(base_min, rep.min_ratio) / std::min(base_min, rep.min_ratio);

  ExperimentResult r;
  r.csv = {{"slnd_configs.csv", csv.str()}};
  r.summary = {{"model", model.kind_name()},
               {"metric_H", Hm.values()},
               {"configs", configs},
               {"n_max", n_max},
               {"min_ratio", num(base_min)},
               {"min_ratio_origin", num(base_min_origin)},
               {"min_ratio_doubled", num(rep.min_ratio)},
               {"stability_shift", num(shift)},
               {"skipped", skipped},
               {"skipped_doubled", rep.skipped},
               {"flagged", rep.flagged}};
  if (!(base_min > 0.0)) r.flags.push_back("minimum conditional-variance ratio is not positive");
  if (rep.flagged > 0) r.flags.push_back(std::to_string(rep.flagged) + " configurations had flagged quadrature");
  return r;
}

ExperimentResult run_localtime(const RunConfig& c) {
  const std::uint64_t seed = c.u64("run.seed");
  const unsigned threads = threads_of(c);
  const CovarianceModel model = model_of(c);
  const long points = c.integer("grid.points");
  const std::string placement = c.str("grid.placement");
  const std::size_t replicates = count_of(c, "run.replicates", 2);
  const double bin = c.num("localtime.bin");
  const double k = c.num("localtime.k");
  if (points < 1) throw ConfigError("grid.points must be positive");
  if (placement != "upper" && placement != "center") throw ConfigError("grid.placement must be upper or center");
  if (!(bin > 0.0)) throw ConfigError("localtime.bin must be positive");
  if (!(k > 0.0)) throw ConfigError("localtime.k must be positive");

  const Box& T = model.domain();
  const std::size_t n = model.index_dim();
  const std::size_t d = model.components();
  auto grid = std::make_shared<const Grid>(Grid::product(
      T, std::vector<long>(n, points), placement == "upper" ? Grid::Placement::upper : Grid::Placement::center));
  const GaussianSampler sampler(model, grid);
  const Region region = Region::interval(T);
  const Point zero(d, 0.0);

  // Fixed blocks keep the merge order independent of the thread count.
  constexpr std::size_t block = 64;
  const std::size_t nblocks = (replicates + block - 1) / block;
  std::vector<double> L_hist(replicates), L_smooth(replicates), mass_err(replicates);
  // second level: the path's own componentwise median
  std::vector<Point> med_level(replicates);
  std::vector<double> M_hist(replicates), M_smooth(replicates);
  std::vector<LocalTimeEstimate> merged(nblocks);
  parallel_for(nblocks, threads, [&](std::size_t b) {
    for (std::size_t i = b * block; i < std::min(replicates, (b + 1) * block); ++i) {
      const FieldSample s = sampler.draw(seed, i, d);
      LocalTimeEstimate h = occupation_histogram(s, region, bin, zero);
      L_hist[i] = h.density_at(zero);
      L_smooth[i] = smoothed_local_time(s, region, zero, k);
      mass_err[i] = std::abs(h.total_mass() - h.region_measure) / h.region_measure;
      Point med(d);
      for (std::size_t j = 0; j < d; ++j) {
        const Eigen::VectorXd col = s.values.col(static_cast<Eigen::Index>(j));
        med[j] = quantile(std::vector<double>(col.data(), col.data() + col.size()), 0.5);
      }
      M_hist[i] = local_time_at(s, region, med, bin);
      M_smooth[i] = smoothed_local_time(s, region, med, k);
      med_level[i] = std::move(med);
      if (i == b * block) {
        merged[b] = std::move(h);
      } else {
        merged[b].merge(h);
      }
    }
  });
  LocalTimeEstimate total = merged.front();
  for (std::size_t b = 1; b < nblocks; ++b) total.merge(merged[b]);

  std::string rheader = "replicate,L_histogram,L_smoothed";
  for (std::size_t j = 0; j < d; ++j) rheader += ",median_x" + std::to_string(j);
  Csv reps(rheader + ",L_median_histogram,L_median_smoothed");
  for (std::size_t i = 0; i < replicates; ++i) {
    std::ostringstream os;
    os << i << ',' << csv_number(L_hist[i]) << ',' << csv_number(L_smooth[i]);
    for (double v : med_level[i]) os << ',' << csv_number(v);
    os << ',' << csv_number(M_hist[i]) << ',' << csv_number(M_smooth[i]);
    reps.row(os.str());
  }
  std::string header = "bin";
  for (std::size_t j = 0; j < d; ++j) header += ",x" + std::to_string(j);
  Csv dens(header + ",density");
  {
    const auto levels = total.levels();
    const auto rho = total.density();
    for (std::size_t i = 0; i < levels.size(); ++i) {
      std::ostringstream os;
      os << i;
      for (double v : levels[i]) os << ',' << csv_number(v);
      os << ',' << csv_number(rho[i]);
      dens.row(os.str());
    }
  }

  ExperimentResult r;
  const double mh = mean(L_hist), ms = mean(L_smooth);
  const double se_h = std_error(L_hist), se_s = std_error(L_smooth);
  const double se_c = std::sqrt(se_h * se_h + se_s * se_s);
  const double max_mass_err = *std::max_element(mass_err.begin(), mass_err.end());
  r.summary = {{"model", model.kind_name()},
               {"replicates", replicates},
               {"grid_points", points},
               {"bin_width", bin},
               {"k", k},
               {"jitter", sampler.jitter()},
               {"L0_histogram_mean", mh},
               {"L0_histogram_std_error", se_h},
               {"L0_smoothed_mean", ms},
               {"L0_smoothed_std_error", se_s},
               {"smoothed_gap_in_std_errors", num(std::abs(mh - ms) / se_c)},
               {"L_median_histogram_mean", mean(M_hist)},
               {"L_median_smoothed_mean", mean(M_smooth)},
               {"median_smoothed_gap_in_std_errors",
                num(std::abs(mean(M_hist) - mean(M_smooth)) /
                    std::sqrt(std::pow(std_error(M_hist), 2) + std::pow(std_error(M_smooth), 2)))},
               {"mass_balance_max_rel_error", max_mass_err},
               {"max_density", total.max_density()}};
  if (const auto* f = std::get_if<FbmType>(&model.kind()); f && n == 1 && T.lo[0] == 0.0) {
    // E L(0, [0,T]) = \int_0^T (2 pi)^{-1/2} s^{-H} ds for fBm started at 0.
    const double H = f->H[0];
    const double target = std::pow(T.hi[0], 1.0 - H) / ((1.0 - H) * std::sqrt(2.0 * std::numbers::pi));
    r.summary["L0_target"] = target;
    r.summary["L0_rel_error"] = std::abs(mh - target) / target;
  }
  if (max_mass_err > 1e-12) r.flags.push_back("occupation mass does not balance the region measure");
  if (sampler.flagged_entries() > 0) r.flags.push_back("covariance quadrature flagged");
  r.csv = {{"localtime_replicates.csv", reps.str()}, {"localtime_density.csv", dens.str()}};

  const std::size_t moment_reps = count_of(c, "localtime.moment_replicates");
  if (moment_reps > 0) {
    MomentOptions mo;
    mo.replicates = moment_reps;
    mo.points_per_axis = c.integer("localtime.moment_points");
    mo.threads = threads;
    const auto radii = c.list("localtime.moment_radii");
    const Point center = c.list("localtime.moment_center");
    const double level = c.num("localtime.moment_level");
    Csv samples("moment,radius,replicate,value");
    Csv fits("moment,radius,mean,std_error,q01,q99");
    json mj = json::array();
    for (long order : c.int_list("localtime.moments")) {
      if (order < 1) throw ConfigError("localtime.moments entries must be positive");
      const ScalingDiagnostic sd = moment_scaling(model, level, center, radii, static_cast<int>(order), seed, mo);
      for (std::size_t ri = 0; ri < sd.radii.size(); ++ri) {
        fits.row(order, sd.radii[ri], sd.mean[ri], sd.std_error[ri], sd.q01[ri], sd.q99[ri]);
        for (std::size_t rep = 0; rep < sd.samples[ri].size(); ++rep) {
          samples.row(order, sd.radii[ri], rep, sd.samples[ri][rep]);
        }
      }
      mj.push_back({{"n", order},
                    {"slope", sd.fit.slope},
                    {"slope_std_error", sd.fit.slope_stderr},
                    {"target", sd.target},
                    {"flagged", sd.flagged}});
      if (sd.flagged) r.flags.push_back("moment " + std::to_string(order) + " estimate is too noisy");
    }
    r.summary["moments"] = mj;
    r.csv.emplace_back("localtime_moment_samples.csv", samples.str());
    r.csv.emplace_back("localtime_moment_fit.csv", fits.str());
  }

  const std::size_t gauge_reps = count_of(c, "localtime.gauge_replicates");
  if (gauge_reps > 0) {
    GaugeOptions go;
    go.replicates = gauge_reps;
    go.points_per_radius = c.integer("localtime.gauge_points");
    go.threads = threads;
    const auto radii = c.list("localtime.gauge_radii");
    const Point center = c.list("localtime.gauge_center");
    const auto range = count_of(c, "localtime.gauge_range", 1);
    if (range > radii.size()) throw ConfigError("localtime.gauge_range exceeds the number of radii");
    const GaugeStudy g = gauge_study(model, center, radii, seed, go);
    Csv gcsv("radius,replicate,holder_ratio,chung_ratio,oscillation");
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
      for (std::size_t rep = 0; rep < gauge_reps; ++rep) {
        gcsv.row(radii[ri], rep, g.holder[ri][rep], g.chung[ri][rep], g.osc[ri][rep]);
      }
    }
    const std::size_t K = radii.size();
    const double holder_shift = quantile_shift(g.holder_max(0, range), g.holder_max(K - range, K), 0.99);
    const double chung_shift = quantile_shift(g.chung_min(0, range), g.chung_min(K - range, K), 0.01);
    const double frac = g.ineq_pairs ? static_cast<double>(g.ineq_hold) / static_cast<double>(g.ineq_pairs) : 0.0;
    r.summary["gauges"] = {{"replicates", gauge_reps},
                           {"Q", g.Q},
                           {"holder_q99_shift", num(holder_shift)},
                           {"chung_q01_shift", num(chung_shift)},
                           {"inequality_pairs", g.ineq_pairs},
                           {"inequality_fraction", frac},
                           {"oscillation_monotone", g.osc_monotone}};
    r.csv.emplace_back("localtime_gauges.csv", gcsv.str());
  }
  return r;
}

ExperimentResult run_levelset(const RunConfig& c) {
  const std::uint64_t seed = c.u64("run.seed");
  const unsigned threads = threads_of(c);
  const CovarianceModel model = model_of(c);
  const long points = c.integer("grid.points");
  const std::string placement = c.str("grid.placement");
  const std::size_t replicates = count_of(c, "run.replicates", 1);
  const Point level = c.list("levelset.level");
  const auto orders_l = c.int_list("levelset.orders");
  const double gc = c.num("levelset.gauge_c");
  if (points < 2) throw ConfigError("grid.points must be at least 2");
  if (placement != "upper" && placement != "center") throw ConfigError("grid.placement must be upper or center");
  const std::size_t d = model.components();
  if (level.size() != d) throw ConfigError("levelset.level needs one entry per field component");
  if (orders_l.empty()) throw ConfigError("levelset.orders is empty");
  std::vector<int> orders;
  for (long q : orders_l) {
    if (q < 0 || q > 40) throw ConfigError("levelset.orders entries must be in 0..40");
    orders.push_back(static_cast<int>(q));
  }
  if (!(gc > 0.0)) throw ConfigError("levelset.gauge_c must be positive");

  const std::size_t n = model.index_dim();
  auto grid = std::make_shared<const Grid>(Grid::product(
      model.domain(), std::vector<long>(n, points),
      placement == "upper" ? Grid::Placement::upper : Grid::Placement::center));
  const GaussianSampler sampler(model, grid);
  const HurstVector H = model.induced_hurst();

  std::vector<LevelSetEstimate> ests(replicates);
  std::vector<std::vector<double>> mass(replicates);
  parallel_for(replicates, threads, [&](std::size_t i) {
    const FieldSample s = sampler.draw(seed, i, d);
    ests[i] = extract_level_set(s, level, H, orders);
    ests[i].cells.clear();
    const double Q = H.q();
    mass[i] = gauge_mass_diagnostic(ests[i], orders, gc, Q - static_cast<double>(d) > 0 ? Gauge::loglog
                                                                                        : Gauge::power);
  });

  Csv csv("replicate,order,count,total_cells,mass_phi");
  for (std::size_t i = 0; i < replicates; ++i) {
    for (std::size_t k = 0; k < orders.size(); ++k) {
      csv.row(i, orders[k], ests[i].counts[k], ests[i].total_cells[k], mass[i][k]);
    }
  }
  const DimensionFit fit = box_dimension(ests, orders);
  std::vector<double> qs, logs;
  for (std::size_t k = 0; k < orders.size(); ++k) {
    qs.push_back(orders[k]);
    logs.push_back(std::log2(static_cast<double>(ests.front().total_cells[k])));
  }
  const double calib = orders.size() >= 2 ? ols_fit(qs, logs).slope : std::numeric_limits<double>::quiet_NaN();
  json mass_mean = json::array();
  for (std::size_t k = 0; k < orders.size(); ++k) {
    std::vector<double> v;
    for (const auto& m : mass) {
      if (std::isfinite(m[k])) v.push_back(m[k]);
    }
    mass_mean.push_back({{"order", orders[k]}, {"mean_mass_phi", num(v.empty() ? NAN : mean(v))}});
  }

  ExperimentResult r;
  r.csv = {{"levelset_counts.csv", csv.str()}};
  r.summary = {{"model", model.kind_name()},
               {"metric_H", H.values()},
               {"Q", H.q()},
               {"replicates", replicates},
               {"dimension", num(fit.dimension)},
               {"dimension_std_error", num(fit.std_error)},
               {"target", fit.target},
               {"orders_used", fit.orders_used},
               {"calibration_slope", num(calib)},
               {"gauge_mass", mass_mean}};
  if (fit.parabolic_target) r.summary["parabolic_target"] = *fit.parabolic_target;
  if (const auto e = euclidean_dimension_formula(H, static_cast<double>(d))) {
    r.summary["euclidean_dimension"] = *e;
  } else {
    r.summary["euclidean_dimension"] = nullptr;
  }
  if (fit.flagged) r.flags.push_back("too few usable orders for the dimension fit");
  if (sampler.flagged_entries() > 0) r.flags.push_back("covariance quadrature flagged");
  return r;
}

ExperimentResult run_she_verify(const RunConfig& c) {
  const unsigned threads = threads_of(c);
  const long N = c.integer("she.N");
  const double beta = c.num("she.beta");
  const double t = c.num("she.t");
  const auto lags = c.list("she.lags");
  if (N < 1 || N > 3) throw ConfigError("she.N must be in 1..3");
  const bool white = N == 1 && beta == 1.0;
  if (!white && !(beta > 0.0 && beta < std::min(2.0, static_cast<double>(N)))) {
    throw ConfigError("she.beta must lie in (0, min(2, N)) (or N = 1, beta = 1 for white noise)");
  }
  if (!(t > 0.0)) throw ConfigError("she.t must be positive");
  if (lags.size() < 2) throw ConfigError("she.lags needs at least two lags");
  for (double h : lags) {
    if (!(h > 0.0)) throw ConfigError("she.lags entries must be positive");
  }
  const auto Nn = static_cast<std::size_t>(N);
  const double pi = std::numbers::pi;

  double var_model = 0.0, var_closed = 0.0, var_quad = 0.0;
  bool flagged = false;
  boost::math::quadrature::tanh_sinh<double> ts;
  const Point origin(Nn, 0.0);
  if (white) {
    var_model = cov_she_white(t, 0.0, t, 0.0);
    var_closed = std::sqrt(t / (2.0 * pi));
    // \int_0^t G(2(t - r), 0) dr with r = t - w^2.
    var_quad = ts.integrate([&](double w) { return 2.0 * w * heat_kernel(2.0 * w * w, origin); }, 0.0,
                            std::sqrt(t));
  } else {
    const CovEval v = cov_she_riesz(t, origin, t, origin, beta);
    var_model = v.value;
    flagged |= v.flagged;
    const double g = 1.0 - beta / 2.0;
    var_closed = riesz::kernel_at_origin(Nn, beta, 1.0) * std::pow(2.0, -beta / 2.0) * std::pow(t, g) / g;
    var_quad = ts.integrate(
        [&](double w) {
          if (w <= 0.0) return 0.0;
          const CovEval k = riesz::kernel_physical(Nn, beta, 2.0 * w * w, 0.0);
          return 2.0 * w * k.value;
        },
        0.0, std::sqrt(t));
  }

  struct Slot {
    double value = 0.0;
    bool flagged = false;
  };
  std::vector<Slot> spatial(lags.size()), temporal(lags.size());
  parallel_for(2 * lags.size(), threads, [&](std::size_t i) {
    const double h = lags[i % lags.size()];
    const bool space = i < lags.size();
    Slot& s = space ? spatial[i] : temporal[i - lags.size()];
    if (white) {
      s.value = space ? increment_variance_she_white(t, 0.0, t, h) : increment_variance_she_white(t, 0.0, t + h, 0.0);
    } else {
      Point y = origin;
      if (space) y[0] = h;
      const CovEval e = increment_variance_she_riesz(t, origin, space ? t : t + h, y, beta);
      s.value = e.value;
      s.flagged = e.flagged;
    }
  });

  Csv csv("direction,lag,increment_variance,flagged");
  std::vector<double> sv, tv;
  std::size_t nflag = 0;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    csv.row("space", lags[i], spatial[i].value, spatial[i].flagged);
    sv.push_back(spatial[i].value);
    nflag += spatial[i].flagged;
  }
  for (std::size_t i = 0; i < lags.size(); ++i) {
    csv.row("time", lags[i], temporal[i].value, temporal[i].flagged);
    tv.push_back(temporal[i].value);
    nflag += temporal[i].flagged;
  }
  const auto sfit = slope_fit_logs(lags, sv);
  const auto tfit = slope_fit_logs(lags, tv);

  ExperimentResult r;
  r.csv = {{"she_increments.csv", csv.str()}};
  r.summary = {{"N", N},
               {"beta", beta},
               {"noise", white ? "white" : "riesz"},
               {"t", t},
               {"variance", var_model},
               {"variance_closed_form", var_closed},
               {"variance_quadrature", var_quad},
               {"variance_rel_error", std::abs(var_model - var_closed) / var_closed},
               {"quadrature_rel_error", std::abs(var_quad - var_closed) / var_closed},
               {"spatial_slope", sfit[0]},
               {"spatial_slope_target", 2.0 - beta},
               {"temporal_slope", tfit[0]},
               {"temporal_slope_target", (2.0 - beta) / 2.0},
               {"lag_decades", std::log10(lags.back() / lags.front())},
               {"flagged_evaluations", nflag + (flagged ? 1 : 0)}};
  if (nflag > 0 || flagged) r.flags.push_back("covariance quadrature flagged");
  return r;
}

ExperimentResult run_experiment(const RunConfig& config) {
  const std::string& e = config.experiment();
  if (e == "voronoi") return run_voronoi(config);
  if (e == "covering") return run_covering(config);
  if (e == "integral") return run_integral(config);
  if (e == "slnd") return run_slnd(config);
  if (e == "localtime") return run_localtime(config);
  if (e == "levelset") return run_levelset(config);
  if (e == "she-verify") return run_she_verify(config);
  throw ConfigError("unknown experiment '" + e + "'");
}

}  // namespace anisolt::harness
