// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "anisolt/geometry.hpp"
#include "anisolt/harness/config.hpp"
#include "anisolt/harness/experiments.hpp"
#include "anisolt/harness/run.hpp"
#include "anisolt/level_set.hpp"
#include "anisolt/local_time.hpp"
#include "small_configs.hpp"

using namespace anisolt;
using namespace anisolt::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
  }
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

json summary_of(const std::string& experiment, const std::string& text) {
  return run_experiment(parse_config(experiment, text)).summary;
}

unsigned threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

std::string threads_line() { return "run.threads = " + std::to_string(threads()) + "\n"; }

// covering count by direct enumeration of all pairs
std::size_t covering_oracle(const std::vector<Point>& cfg, const HurstVector& H) {
  std::size_t count = 0;
  for (std::size_t j = 1; j < cfg.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cfg.size(); ++i) {
      if (i != j) best = std::min(best, rho_tilde(cfg[j], cfg[i], H));
    }
    count += rho_tilde(cfg[j], cfg[0], H) == best;
  }
  return count;
}

void geometry(Outcome& o) {
  const auto s = summary_of("voronoi", "voronoi.instances = 100000\n" + threads_line());
  o.require(s.at("instances").get<long>() == 100000, "instances 1e5");
  o.require(s.at("star_shape_failures").get<long>() == 0,
            "star-shape failures " + std::to_string(s.at("star_shape_failures").get<long>()));
  o.require(s.at("partition_misassigned_cells").get<long>() == 0, "partition misassigned cells 0");
  o.require(s.at("partition_star_shape_failures").get<long>() == 0, "partition star failures 0");
}

void covering(Outcome& o) {
  const auto one = summary_of("covering", "geometry.H = 0.5\ncovering.trials = 10000\n" + threads_line());
  o.require(one.at("max_count").get<long>() == 2, "N=1 max " + std::to_string(one.at("max_count").get<long>()));

  // oracle on a sample of the same configurations
  const HurstVector h1{0.5};
  std::size_t mismatches = 0, oracle_max = 0;
  for (std::size_t n : {50, 100, 200}) {
    for (std::size_t trial = 0; trial < 2000; ++trial) {
      const auto cfg = covering_configuration(n, h1, 1, trial);
      const std::size_t ref = covering_oracle(cfg, h1);
      const std::vector<Point> rest(cfg.begin() + 1, cfg.end());
      mismatches += covering_count(cfg.front(), rest, h1) != ref;
      oracle_max = std::max(oracle_max, ref);
    }
  }
  o.require(mismatches == 0 && oracle_max == 2,
            "oracle agrees on 6000 configs (max " + std::to_string(oracle_max) + ")");

  const auto two = summary_of("covering", "geometry.H = 0.5,0.5\ncovering.trials = 10000\n" + threads_line());
  std::ostringstream maxima;
  for (const auto& p : two.at("per_n")) maxima << (maxima.tellp() > 0 ? "/" : "") << p.at("max_count").get<long>();
  o.require(two.at("max_count_identical_across_n").get<bool>(), "N=2 max by n " + maxima.str());
}

void integral(Outcome& o) {
  const auto s = summary_of("integral", threads_line());
  for (const auto& b : s.at("per_beta")) {
    const double spread = b.at("C_spread").get<double>();
    o.require(spread < 2.0, "beta " + fmt(b.at("beta").get<double>()) + " C spread " + fmt(spread));
  }
  const auto& a = s.at("analytic");
  o.require(a.at("rel_error").get<double>() <= 0.01,
            "analytic " + fmt(a.at("value").get<double>(), 6) + " vs " + fmt(a.at("target").get<double>()));
}

void she(Outcome& o) {
  const double target = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto t0 = std::chrono::steady_clock::now();
  const auto w = summary_of("she-verify", "");
  const double white_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(white_secs < 60.0, "white " + fmt(white_secs, 3) + " s < 60 s");
  const double v = w.at("variance").get<double>();
  const double vc = w.at("variance_closed_form").get<double>();
  const double vq = w.at("variance_quadrature").get<double>();
  o.require(std::abs(vc - target) / target <= 0.005, "closed form " + fmt(vc, 8));
  o.require(std::abs(vq - target) / target <= 0.005, "quadrature " + fmt(vq, 8));
  o.require(std::abs(v - target) / target <= 0.005, "model " + fmt(v, 8));
  auto slopes = [&](const json& s, const std::string& tag) {
    const double sp = s.at("spatial_slope").get<double>(), tp = s.at("temporal_slope").get<double>();
    o.require(std::abs(sp - s.at("spatial_slope_target").get<double>()) <= 0.05, tag + " spatial " + fmt(sp));
    o.require(std::abs(tp - s.at("temporal_slope_target").get<double>()) <= 0.05, tag + " temporal " + fmt(tp));
    o.require(s.at("lag_decades").get<double>() >= 2.0 - 1e-12, tag + " two decades");
  };
  slopes(w, "white");
  t0 = std::chrono::steady_clock::now();
  const auto r = summary_of("she-verify", "she.N = 2\nshe.beta = 0.5\n");
  const double riesz_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(riesz_secs < 600.0, "riesz " + fmt(riesz_secs, 3) + " s < 600 s");
  slopes(r, "riesz N=2 beta=0.5");
  o.require(r.at("quadrature_rel_error").get<double>() <= 0.005,
            "riesz variance cross-check " + fmt(r.at("quadrature_rel_error").get<double>(), 2));
}

void slnd(Outcome& o) {
  const auto s = summary_of("slnd", threads_line());
  const double mn = s.at("min_ratio").get<double>();
  const double shift = s.at("stability_shift").get<double>();
  o.require(mn > 0.0, "min ratio " + fmt(mn));
  o.require(shift <= 2.0, "1e3 vs 2e3 shift " + fmt(shift));
}

const std::string no_moments_no_gauges = "localtime.moment_replicates = 0\nlocaltime.gauge_replicates = 0\n";

void local_time(Outcome& o) {
  const auto s = summary_of("localtime", "run.replicates = 10000\n" + no_moments_no_gauges + threads_line());
  o.require(s.at("L0_rel_error").get<double>() <= 0.05,
            "L(0) " + fmt(s.at("L0_histogram_mean").get<double>()) + " vs " + fmt(s.at("L0_target").get<double>()));
  o.require(s.at("mass_balance_max_rel_error").get<double>() <= 1e-12,
            "mass balance " + fmt(s.at("mass_balance_max_rel_error").get<double>(), 2));
  o.require(s.at("smoothed_gap_in_std_errors").get<double>() <= 3.0,
            "smoothed gap " + fmt(s.at("smoothed_gap_in_std_errors").get<double>(), 3) + " se");
}

void moments(Outcome& o) {
  const auto s = summary_of("localtime", "run.replicates = 10\nlocaltime.gauge_replicates = 0\n" + threads_line());
  for (const auto& m : s.at("moments")) {
    const double slope = m.at("slope").get<double>(), target = m.at("target").get<double>();
    o.require(std::abs(slope - target) <= 0.15,
              "n=" + std::to_string(m.at("n").get<int>()) + " slope " + fmt(slope) + " vs " + fmt(target));
  }
}

void gauges(Outcome& o) {
  const auto s = summary_of("localtime", "run.replicates = 10\nlocaltime.moment_replicates = 0\n" + threads_line());
  const auto& g = s.at("gauges");
  const double h = g.at("holder_q99_shift").get<double>(), c = g.at("chung_q01_shift").get<double>();
  o.require(h < 2.0, "holder q99 shift " + fmt(h));
  o.require(c < 2.0, "chung q01 shift " + fmt(c));
  o.require(g.at("inequality_fraction").get<double>() >= 0.99,
            "inequality " + fmt(100 * g.at("inequality_fraction").get<double>()) + "%");
}

void level_set(Outcome& o) {
  const auto s = summary_of("levelset", threads_line());
  const double dim = s.at("dimension").get<double>(), calib = s.at("calibration_slope").get<double>();
  o.require(s.at("replicates").get<long>() >= 100, "100 paths");
  o.require(std::abs(dim - 1.0) <= 0.2, "dimension " + fmt(dim));
  o.require(std::abs(calib - 2.0) <= 0.05, "calibration " + fmt(calib));

  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> Hd(0.05, 0.95), U(0.0, 1.0);
  std::uniform_int_distribution<int> Nd(1, 6);
  int checked = 0, mismatched = 0;
  while (checked < 1000) {
    std::vector<double> h(static_cast<std::size_t>(Nd(gen)));
    for (auto& v : h) v = Hd(gen);
    const HurstVector H(h);
    const double d = std::max(1.0, std::floor(U(gen) * H.q()));
    if (d >= H.q()) continue;
    ++checked;
    std::sort(h.begin(), h.end());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < h.size(); ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= k; ++j) acc += h[k] / h[j];
      best = std::min(best, acc + static_cast<double>(h.size()) - static_cast<double>(k + 1) - h[k] * d);
    }
    const auto f = euclidean_dimension_formula(H, d);
    mismatched += !f || *f != best;
  }
  o.require(mismatched == 0, "euclidean formula exact on 1000 inputs (" + std::to_string(mismatched) + " off)");
}

void transform(Outcome& o) {
  const auto inner = CovarianceModel::fbm(HurstVector{0.5, 0.5}, Box{{0, 0}, {1, 1}});
  auto grid = std::make_shared<const Grid>(Grid::product(Box{{0, 0}, {1, 1}}, {64, 64}, Grid::Placement::upper));
  const Point z{0.3, 0.2};
  Eigen::MatrixXd shear(2, 2);
  shear << 1.0, 1.0, 0.0, 1.0;
  const std::vector<std::pair<std::string, Eigen::MatrixXd>> cases{
      {"I", Eigen::MatrixXd::Identity(2, 2)}, {"2I", 2.0 * Eigen::MatrixXd::Identity(2, 2)}, {"shear", shear}};
  for (const auto& [name, A] : cases) {
    const auto rep = transform_identity_check(inner, A, z, grid, 0.2, 400, 5, threads());
    o.require(rep.gap <= 0.05, name + " gap " + fmt(100 * rep.gap, 3) + "%");
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void reproducibility(Outcome& o) {
  const fs::path root = fs::temp_directory_path() / "anisolt_acceptance_replay";
  fs::remove_all(root);
  for (const auto& [name, text] : small_configs()) {
    const auto cfg = parse_config(name, text);
    std::ostringstream log;
    run(cfg, root / name / "a", log);
    run(cfg, root / name / "b", log);
    bool same_runs = true;
    for (const auto& e : fs::directory_iterator(root / name / "a")) {
      if (e.path().filename() == "manifest.json") continue;  // records wall time
      same_runs = same_runs && slurp(e.path()) == slurp(root / name / "b" / e.path().filename());
    }
    const auto r1 = replay(root / name / "a" / "manifest.json", 1);
    const auto r4 = replay(root / name / "a" / "manifest.json", 4);
    o.require(same_runs && r1.identical && r4.identical, name);
  }
  fs::remove_all(root);
}

struct Criterion {
  int id;
  const char* title;
  double limit_seconds;
  std::function<void(Outcome&)> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "geometry exactness", 60, geometry},
      {2, "covering bound", 120, covering},
      {3, "integral bound", 120, integral},
      {4, "heat equation covariance", 0, she},
      {5, "SLND positivity", 300, slnd},
      {6, "local time desk target", 180, local_time},
      {7, "moment scaling", 300, moments},
      {8, "gauge diagnostics", 600, gauges},
      {9, "level-set dimension", 300, level_set},
      {10, "transform identity", 120, transform},
      {11, "reproducibility", 0, reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.check(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0) o.require(secs < c.limit_seconds, fmt(secs, 3) + " s < " + fmt(c.limit_seconds) + " s");
    else o.detail << "; " << fmt(secs, 3) << " s";
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.title << ": " << o.detail.str() << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
