#include "anisolt/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace anisolt {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFlagTolerance = 1e-6;

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;

struct Quad {
  double value;
  double error;
  double l1;
  bool flagged() const { return error > kFlagTolerance * std::max(l1, 1e-300); }
};

template <typename F>
Quad integrate(F&& f, double lo, double hi, double tol, unsigned depth = 10) {
  if (!(hi > lo)) return {0.0, 0.0, 0.0};
  // Boost's error control misbehaves on very short intervals, so map to [0,1].
  const double w = hi - lo;
  double err = 0.0, l1 = 0.0;
  const double v = Kronrod::integrate([&](double u) { return f(lo + w * u); }, 0.0, 1.0, depth, tol, &err, &l1);
  return {w * v, w * err, w * l1};
}

double sphere_area(std::size_t N) {
  const double n = static_cast<double>(N);
  return 2.0 * std::pow(kPi, n / 2.0) / std::tgamma(n / 2.0);
}

// S_N(0) - S_N(u), without cancellation for small u.
double sphere_cos_deficit(std::size_t N, double u) {
  if (u < 2.0) {
    const double nu = static_cast<double>(N) / 2.0 - 1.0;
    const double z = -u * u / 4.0;
    double term = 1.0, sum = 0.0;
    for (int k = 1; k < 40; ++k) {
      term *= z / (static_cast<double>(k) * (nu + k));
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return -sphere_area(N) * sum;
  }
  return sphere_area(N) - riesz::sphere_cos_average(N, u);
}

// e^{-u} \int_{S^{N-1}} exp(u w_1) dw for u >= 0.
double sphere_exp_average_scaled(std::size_t N, double u) {
  if (u == 0.0) return sphere_area(N);
  if (N == 1) return 1.0 + std::exp(-2.0 * u);
  if (N == 3) return 2.0 * kPi * (-std::expm1(-2.0 * u)) / u;
  const double n = static_cast<double>(N);
  const double nu = n / 2.0 - 1.0;
  double scaled_i;  // e^{-u} I_nu(u)
  if (u > 50.0) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 12; ++k) {
      const double odd = 2.0 * k - 1.0;
      term *= -(mu - odd * odd) / (k * 8.0 * u);
      sum += term;
    }
    scaled_i = sum / std::sqrt(2.0 * kPi * u);
  } else {
    scaled_i = std::cyl_bessel_i(nu, u) * std::exp(-u);
  }
  return std::pow(2.0 * kPi, n / 2.0) * std::pow(u, -nu) * scaled_i;
}

// (2 pi)^N / c_{N,beta}, where c_{N,beta} |xi|^{beta-N} is the Fourier
// transform of |x|^{-beta} on R^N.
double physical_to_spectral(std::size_t N, double beta) {
  const double n = static_cast<double>(N);
  const double c = std::pow(kPi, n / 2.0) * std::pow(2.0, n - beta) *
                   std::tgamma((n - beta) / 2.0) / std::tgamma(beta / 2.0);
  return std::pow(2.0 * kPi, n) / c;
}

void check_riesz(std::size_t N, double beta) {
  if (N < 1) throw InvalidArgument("Riesz noise needs spatial dimension N >= 1");
  if (!(beta > 0.0 && beta < std::min(2.0, static_cast<double>(N)))) {
    throw InvalidArgument("Riesz noise needs 0 < beta < min(2, N)");
  }
}

double distance2(PointView x, PointView y) {
  if (x.size() != y.size()) throw InvalidArgument("spatial dimension mismatch");
  double d = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) d += (x[j] - y[j]) * (x[j] - y[j]);
  return std::sqrt(d);
}

// Antiderivative in a of (4 pi a)^{-1/2} exp(-delta^2 / (4a)); F(0) = 0.
double white_primitive(double a, double delta) {
  if (a <= 0.0) return 0.0;
  const double d = std::abs(delta);
  return std::sqrt(a / kPi) * std::exp(-d * d / (4.0 * a)) -
         0.5 * d * std::erfc(d / (2.0 * std::sqrt(a)));
}

// \int_lo^hi f(a) da over pieces [lo, lo + w], [lo + w, lo + 4w], ... whose
// widths grow geometrically; f varies on the scale max(a, delta^2) and is
// smooth on each piece.
template <typename F>
Quad integrate_time_lag(F&& f, double lo, double hi, double scale) {
  Quad total{0.0, 0.0, 0.0};
  if (!(hi > lo)) return total;
  double w = std::max(scale, lo) / 16.0;
  if (!(w > 0.0)) w = (hi - lo) / 16.0;
  double a = lo;
  while (a < hi) {
    double b = lo + w;
    if (b >= hi || hi - b < 0.25 * w) b = hi;
    const Quad q = integrate(f, a, b, 1e-10, 12);
    total.value += q.value;
    total.error += q.error;
    total.l1 += q.l1;
    a = b;
    w *= 4.0;
  }
  return total;
}

}  // namespace

double heat_kernel(double t, PointView x) {
  if (t <= 0.0) return 0.0;
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return std::pow(4.0 * kPi * t, -static_cast<double>(x.size()) / 2.0) * std::exp(-r2 / (4.0 * t));
}

double cov_she_white(double t, double x, double s, double y) {
  if (t <= 0.0 || s <= 0.0) return 0.0;
  const double d = x - y;
  return 0.5 * (white_primitive(t + s, d) - white_primitive(std::abs(t - s), d));
}

double increment_variance_she_white(double t, double x, double s, double y) {
  const double d = std::abs(x - y);
  if (t == s && t > 0.0) {
    const double a = 2.0 * t;
    return -std::sqrt(a / kPi) * std::expm1(-d * d / (4.0 * a)) +
           0.5 * d * std::erfc(d / (2.0 * std::sqrt(a)));
  }
  if (d == 0.0 && t > 0.0 && s > 0.0) {
    return 0.5 * std::sqrt(2.0 * t / kPi) + 0.5 * std::sqrt(2.0 * s / kPi) -
           std::sqrt((t + s) / kPi) + std::sqrt(std::abs(t - s) / kPi);
  }
  return cov_she_white(t, x, t, x) + cov_she_white(s, y, s, y) - 2.0 * cov_she_white(t, x, s, y);
}

namespace riesz {

double sphere_cos_average(std::size_t N, double u) {
  if (u == 0.0) return sphere_area(N);
  if (N == 1) return 2.0 * std::cos(u);
  if (N == 3) return 4.0 * kPi * std::sin(u) / u;
  const double n = static_cast<double>(N);
  const double nu = n / 2.0 - 1.0;
  return std::pow(2.0 * kPi, n / 2.0) * std::pow(u, -nu) * std::cyl_bessel_j(nu, u);
}

double kernel_at_origin(std::size_t N, double beta, double a) {
  return 0.5 * sphere_area(N) * std::tgamma(beta / 2.0) * std::pow(a, -beta / 2.0);
}

CovEval kernel_spectral(std::size_t N, double beta, double a, double delta) {
  check_riesz(N, beta);
  if (delta == 0.0) return {kernel_at_origin(N, beta, a), false};
  // rho = x / sqrt(a):
  //   K = K(a, 0) - a^{-beta/2} \int x^{beta-1} e^{-x^2} (S_N(0) - S_N(w x)) dx.
  // The deficit vanishes like x^2 at 0. For beta <= 1 the factor x^{beta-1}
  // is removed by x = y^{1/beta}, leaving y^{2/beta}; for beta > 1 the x form
  // already behaves like x^{beta+1}.
  const double omega = delta / std::sqrt(a);
  Quad q{};
  double scale = std::pow(a, -beta / 2.0);
  if (beta <= 1.0) {
    q = integrate(
        [&](double y) {
          const double x = std::pow(y, 1.0 / beta);
          return std::exp(-x * x) * sphere_cos_deficit(N, omega * x);
        },
        0.0, std::pow(6.5, beta), 1e-10);
    scale /= beta;
  } else {
    q = integrate(
        [&](double x) { return std::pow(x, beta - 1.0) * std::exp(-x * x) * sphere_cos_deficit(N, omega * x); },
        0.0, 6.5, 1e-10);
  }
  const double value = kernel_at_origin(N, beta, a) - scale * q.value;
  return {value, q.error * scale > kFlagTolerance * std::abs(value)};
}

CovEval kernel_physical(std::size_t N, double beta, double a, double delta) {
  check_riesz(N, beta);
  const double n = static_cast<double>(N);
  const double sigma = std::sqrt(2.0 * a);
  const double norm = std::pow(4.0 * kPi * a, -n / 2.0);
  const double pr = n - beta;
  const double eps2 = 2.0 * a / (delta * delta);
  if (eps2 < 1e-6) {
    // E|e + eps Z|^{-beta} = 1 + (beta/2)(beta + 2 - N) eps^2 + O(eps^4)
    const double m = 1.0 + 0.5 * beta * (beta + 2.0 - n) * eps2;
    return {physical_to_spectral(N, beta) * std::pow(delta, -beta) * m, false};
  }
  // r^{N-1-beta} dr = dy / (N - beta) with r = y^{1/(N-beta)}.
  auto integrand = [&](double y) {
    const double r = std::pow(y, 1.0 / pr);
    const double g = std::exp(-(r - delta) * (r - delta) / (4.0 * a));
    return norm * g * sphere_exp_average_scaled(N, r * delta / (2.0 * a)) / pr;
  };
  const double r_lo = std::max(0.0, delta - 12.0 * sigma);
  const double r_hi = delta + 12.0 * sigma;
  double value = 0.0;
  bool flagged = false;
  auto piece = [&](double lo, double hi) {
    const Quad q = integrate(integrand, std::pow(lo, pr), std::pow(hi, pr), 1e-10);
    value += q.value;
    flagged = flagged || q.flagged();
  };
  if (delta > r_lo && delta < r_hi && r_lo > 0.0) {
    piece(r_lo, delta);
    piece(delta, r_hi);
  } else if (delta > 0.0 && delta < r_hi) {
    piece(0.0, delta);
    piece(delta, r_hi);
  } else {
    piece(r_lo, r_hi);
  }
  return {physical_to_spectral(N, beta) * value, flagged};
}

CovEval kernel(std::size_t N, double beta, double a, double delta) {
  if (delta == 0.0) return {kernel_at_origin(N, beta, a), false};
  return delta / std::sqrt(a) <= 4.0 ? kernel_spectral(N, beta, a, delta)
                                     : kernel_physical(N, beta, a, delta);
}

}  // namespace riesz

CovEval cov_she_riesz(double t, PointView x, double s, PointView y, double beta) {
  const std::size_t N = x.size();
  check_riesz(N, beta);
  if (t <= 0.0 || s <= 0.0) return {0.0, false};
  const double delta = distance2(x, y);
  const double lo = std::abs(t - s);
  const double hi = t + s;
  if (delta == 0.0) {
    const double g = 1.0 - beta / 2.0;
    const double c0 = riesz::kernel_at_origin(N, beta, 1.0);
    return {0.5 * c0 / g * (std::pow(hi, g) - std::pow(lo, g)), false};
  }
  bool flagged = false;
  const Quad q = integrate_time_lag(
      [&](double a) {
        const CovEval k = riesz::kernel(N, beta, a, delta);
        flagged = flagged || k.flagged;
        return k.value;
      },
      lo, hi, delta * delta);
  return {0.5 * q.value, flagged || q.flagged()};
}

CovEval increment_variance_she_riesz(double t, PointView x, double s, PointView y, double beta) {
  const std::size_t N = x.size();
  check_riesz(N, beta);
  const double delta = distance2(x, y);
  if (delta == 0.0 && t > 0.0 && s > 0.0) {
    const double g = 1.0 - beta / 2.0;
    const double c0 = riesz::kernel_at_origin(N, beta, 1.0) / g;
    return {c0 * (0.5 * std::pow(2.0 * t, g) + 0.5 * std::pow(2.0 * s, g) - std::pow(t + s, g) +
                  std::pow(std::abs(t - s), g)),
            false};
  }
  if (t == s && t > 0.0) {
    // \int_0^{2t} (K_0(a) - K_delta(a)) da. Below a* = delta^2/16 the K_0 part
    // is integrated in closed form; above it the deficit S_N(0) - S_N(u) is
    // used under the spectral integral.
    const double g = 1.0 - beta / 2.0;
    const double c0 = riesz::kernel_at_origin(N, beta, 1.0);
    const double hi = 2.0 * t;
    const double split = std::min(hi, delta * delta / 16.0);
    bool flagged = false;
    const Quad near = integrate_time_lag(
        [&](double a) {
          const CovEval k = riesz::kernel_physical(N, beta, a, delta);
          flagged = flagged || k.flagged;
          return k.value;
        },
        0.0, split, split);
    const Quad far = integrate_time_lag(
        [&](double a) {
          const double omega = delta / std::sqrt(a);
          const double ymax = std::pow(6.5, beta);
          const Quad inner = integrate(
              [&](double yy) {
                const double xx = std::pow(yy, 1.0 / beta);
                return std::exp(-xx * xx) * sphere_cos_deficit(N, omega * xx);
              },
              0.0, ymax, 1e-11, 12);
          flagged = flagged || inner.flagged();
          return std::pow(a, -beta / 2.0) / beta * inner.value;
        },
        split, hi, delta * delta);
    const double value = c0 / g * std::pow(split, g) - near.value + far.value;
    const bool bad = near.error + far.error > kFlagTolerance * std::max(near.l1 + far.l1, 1e-300);
    return {value, flagged || bad};
  }
  const CovEval a = cov_she_riesz(t, x, t, x, beta);
  const CovEval b = cov_she_riesz(s, y, s, y, beta);
  const CovEval c = cov_she_riesz(t, x, s, y, beta);
  return {a.value + b.value - 2.0 * c.value, a.flagged || b.flagged || c.flagged};
}

double cov_fbm_type(PointView t, PointView s, const HurstVector& H) {
  if (t.size() != H.dim() || s.size() != H.dim()) throw InvalidArgument("fbm: dimension mismatch");
  double c = 0.0;
  for (std::size_t j = 0; j < H.dim(); ++j) {
    const double h2 = 2.0 * H[j];
    c += 0.5 * (std::pow(std::abs(t[j]), h2) + std::pow(std::abs(s[j]), h2) -
                std::pow(std::abs(t[j] - s[j]), h2));
  }
  return c;
}

CovEval cov_transformed(const Eigen::MatrixXd& A, const CovarianceModel& inner, std::size_t i,
                        std::size_t j, PointView t, PointView s) {
  if (i >= static_cast<std::size_t>(A.rows()) || j >= static_cast<std::size_t>(A.rows())) {
    throw InvalidArgument("cov_transformed: component index out of range");
  }
  const CovEval c = inner.scalar_covariance(t, s);
  const double aat = A.row(static_cast<Eigen::Index>(i)).dot(A.row(static_cast<Eigen::Index>(j)));
  return {aat * c.value, c.flagged};
}

// ---------------------------------------------------------------------------

namespace {

void check_domain(const Box& domain, std::size_t dim) {
  if (domain.dim() != dim || domain.hi.size() != dim) {
    throw InvalidArgument("model domain has dimension " + std::to_string(domain.dim()) +
                          ", expected " + std::to_string(dim));
  }
  if (domain.empty()) throw InvalidArgument("model domain is empty");
}

}  // namespace

CovarianceModel CovarianceModel::fbm(HurstVector H, Box domain) {
  if (H.has_unit_axis()) throw InvalidArgument("fbm model needs exponents in (0,1)");
  check_domain(domain, H.dim());
  return CovarianceModel(FbmType{std::move(H)}, std::move(domain));
}

CovarianceModel CovarianceModel::she_white(Box domain) {
  check_domain(domain, 2);
  if (!(domain.lo[0] > 0.0)) throw InvalidArgument("SHE domain needs time > 0");
  return CovarianceModel(SheWhite{}, std::move(domain));
}

CovarianceModel CovarianceModel::she_riesz(std::size_t N, double beta, Box domain) {
  check_riesz(N, beta);
  check_domain(domain, N + 1);
  if (!(domain.lo[0] > 0.0)) throw InvalidArgument("SHE domain needs time > 0");
  return CovarianceModel(SheRiesz{N, beta}, std::move(domain));
}

CovarianceModel CovarianceModel::transformed(Eigen::MatrixXd A, CovarianceModel inner) {
  if (inner.is_transformed()) throw InvalidArgument("transformed model needs a scalar inner model");
  if (A.rows() != A.cols() || A.rows() < 1) throw InvalidArgument("transform matrix must be square");
  const double det = A.determinant();
  if (!std::isfinite(det) || std::abs(det) <= 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("transform matrix is singular");
  }
  Box domain = inner.domain();
  auto shared = std::make_shared<const CovarianceModel>(std::move(inner));
  return CovarianceModel(Transformed{std::move(A), std::move(shared)}, std::move(domain));
}

std::string CovarianceModel::kind_name() const {
  struct Name {
    std::string operator()(const FbmType&) const { return "fbm"; }
    std::string operator()(const SheWhite&) const { return "she-white"; }
    std::string operator()(const SheRiesz&) const { return "she-riesz"; }
    std::string operator()(const Transformed&) const { return "transformed"; }
  };
  return std::visit(Name{}, kind_);
}

std::size_t CovarianceModel::index_dim() const { return domain_.dim(); }

std::size_t CovarianceModel::components() const {
  if (const auto* tr = std::get_if<Transformed>(&kind_)) return static_cast<std::size_t>(tr->A.rows());
  return 1;
}

const CovarianceModel& CovarianceModel::scalar_model() const {
  if (const auto* tr = std::get_if<Transformed>(&kind_)) return *tr->inner;
  return *this;
}

bool CovarianceModel::is_she() const {
  const auto& k = scalar_model().kind_;
  return std::holds_alternative<SheWhite>(k) || std::holds_alternative<SheRiesz>(k);
}

double CovarianceModel::she_beta() const {
  const auto& k = scalar_model().kind_;
  if (std::holds_alternative<SheWhite>(k)) return 1.0;
  if (const auto* r = std::get_if<SheRiesz>(&k)) return r->beta;
  throw InvalidArgument("she_beta: not a stochastic heat equation model");
}

HurstVector CovarianceModel::induced_hurst() const {
  const auto& k = scalar_model().kind_;
  if (const auto* f = std::get_if<FbmType>(&k)) return f->H;
  const double beta = she_beta();
  std::vector<double> h(index_dim(), (2.0 - beta) / 2.0);
  h[0] = (2.0 - beta) / 4.0;
  return HurstVector(std::move(h));
}

CovEval CovarianceModel::scalar_covariance(PointView t, PointView s) const {
  if (t.size() != index_dim() || s.size() != index_dim()) {
    throw InvalidArgument("covariance: index point dimension mismatch");
  }
  struct Visitor {
    PointView t, s;
    CovEval operator()(const FbmType& f) const { return {cov_fbm_type(t, s, f.H), false}; }
    CovEval operator()(const SheWhite&) const { return {cov_she_white(t[0], t[1], s[0], s[1]), false}; }
    CovEval operator()(const SheRiesz& r) const {
      return cov_she_riesz(t[0], t.subspan(1), s[0], s.subspan(1), r.beta);
    }
    CovEval operator()(const Transformed& tr) const { return tr.inner->scalar_covariance(t, s); }
  };
  return std::visit(Visitor{t, s}, kind_);
}

CovEval CovarianceModel::covariance(std::size_t i, std::size_t j, PointView t, PointView s) const {
  if (const auto* tr = std::get_if<Transformed>(&kind_)) return cov_transformed(tr->A, *tr->inner, i, j, t, s);
  if (i != 0 || j != 0) {
    // i.i.d. components
    if (i == j) return scalar_covariance(t, s);
    return {0.0, false};
  }
  return scalar_covariance(t, s);
}

CovEval CovarianceModel::increment_variance(PointView t, PointView s) const {
  if (t.size() != index_dim() || s.size() != index_dim()) {
    throw InvalidArgument("increment_variance: index point dimension mismatch");
  }
  const auto& k = scalar_model().kind_;
  if (const auto* f = std::get_if<FbmType>(&k)) {
    double v = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) v += std::pow(std::abs(t[j] - s[j]), 2.0 * f->H[j]);
    return {v, false};
  }
  if (std::holds_alternative<SheWhite>(k)) return {increment_variance_she_white(t[0], t[1], s[0], s[1]), false};
  const auto& r = std::get<SheRiesz>(k);
  return increment_variance_she_riesz(t[0], t.subspan(1), s[0], s.subspan(1), r.beta);
}

std::string format_list(std::span<const double> values) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i];
  return os.str();
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw InvalidArgument("empty entry in list '" + text + "'");
    const std::string token = item.substr(b, e - b + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("not a number: '" + token + "'");
    }
    if (used != token.size()) throw InvalidArgument("not a number: '" + token + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument("empty list");
  return out;
}

ModelConfig CovarianceModel::to_config() const {
  ModelConfig c;
  const CovarianceModel& scalar = scalar_model();
  if (const auto* tr = std::get_if<Transformed>(&kind_)) {
    c["model.kind"] = "transformed";
    c["model.inner"] = scalar.kind_name();
    std::ostringstream os;
    os.precision(17);
    for (Eigen::Index i = 0; i < tr->A.rows(); ++i) {
      for (Eigen::Index j = 0; j < tr->A.cols(); ++j) os << (j ? "," : "") << tr->A(i, j);
      if (i + 1 < tr->A.rows()) os << ';';
    }
    c["model.A"] = os.str();
  } else {
    c["model.kind"] = kind_name();
  }
  if (const auto* f = std::get_if<FbmType>(&scalar.kind_)) c["model.H"] = to_string(f->H);
  if (const auto* r = std::get_if<SheRiesz>(&scalar.kind_)) {
    std::ostringstream os;
    os.precision(17);
    os << r->beta;
    c["model.beta"] = os.str();
  }
  c["domain.lo"] = format_list(domain_.lo);
  c["domain.hi"] = format_list(domain_.hi);
  return c;
}

CovarianceModel CovarianceModel::from_config(const ModelConfig& config) {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = config.find(key);
    if (it == config.end()) throw InvalidArgument("missing model key '" + key + "'");
    return it->second;
  };
  Box domain{parse_list(get("domain.lo")), parse_list(get("domain.hi"))};
  if (domain.lo.size() != domain.hi.size()) throw InvalidArgument("domain.lo and domain.hi differ in length");

  auto scalar = [&](const std::string& kind) {
    if (kind == "fbm") return fbm(HurstVector(parse_list(get("model.H"))), domain);
    if (kind == "she-white") return she_white(domain);
    if (kind == "she-riesz") {
      const auto beta = parse_list(get("model.beta"));
      if (beta.size() != 1) throw InvalidArgument("model.beta takes one value");
      if (domain.dim() < 2) throw InvalidArgument("she-riesz domain needs (time, space...)");
      return she_riesz(domain.dim() - 1, beta[0], domain);
    }
    throw InvalidArgument("unknown model kind '" + kind + "'");
  };

  const std::string& kind = get("model.kind");
  if (kind != "transformed") return scalar(kind);

  std::vector<std::vector<double>> rows;
  std::stringstream ss(get("model.A"));
  std::string row;
  while (std::getline(ss, row, ';')) rows.push_back(parse_list(row));
  if (rows.empty()) throw InvalidArgument("model.A is empty");
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw InvalidArgument("model.A rows differ in length");
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return transformed(std::move(A), scalar(get("model.inner")));
}

}  // namespace anisolt
