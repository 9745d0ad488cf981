#include "fitsim/theory.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace fitsim::theory {
namespace {

constexpr double kRouteAgreement = 1e-10;

double lgamma_pos(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);  // x > 0 here, sign always +1
}

long double lgammal_pos(long double x) {
  int sign = 0;
  return ::lgammal_r(x, &sign);
}

// Binet correction J(z) in lgamma(z) = (z-1/2)ln z - z + ln(2pi)/2 + J(z).
// Truncation below 1e-28 for z >= 64.
double binet(double z) {
  const double w = 1.0 / (z * z);
  double s = 1.0 / 156.0;
  s = s * w - 691.0 / 360360.0;
  s = s * w + 1.0 / 1188.0;
  s = s * w - 1.0 / 1680.0;
  s = s * w + 1.0 / 1260.0;
  s = s * w - 1.0 / 360.0;
  s = s * w + 1.0 / 12.0;
  return s / z;
}

// lgamma(x+y) - lgamma(x) without cancellation; x, y > 0.
double lgamma_ratio(double x, double y) {
  double shifted = 0.0;
  while (x < 64.0) {  // raise x into Stirling territory
    shifted -= std::log1p(y / x);
    x += 1.0;
  }
  return (x - 0.5) * std::log1p(y / x) + y * std::log(x + y) - y + binet(x + y) - binet(x) +
         shifted;
}

void require_k(std::uint64_t k) {
  if (k == 0) throw std::domain_error("theory: k must be >= 1");
}

void require_shape(double c) {
  if (!(c > 1.0)) throw std::domain_error("theory: tail index c must exceed 1");
}

DerivedConstants transient_constants(double p, double r, const char* who) {
  if (!(r < 1.0)) throw std::domain_error(std::string(who) + ": requires r < 1");
  DerivedConstants d = derive_constants(p, r);
  if (d.regime != Regime::transient)
    throw std::domain_error(std::string(who) + ": requires the transient regime (pr > 1-p)");
  return d;
}

struct KahanSum {
  double sum = 0.0, carry = 0.0;
  void add(double v) {
    double y = v - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

// Shared series driver: terms rho_k (optionally /k), analytic stopping bound
// Gamma(c+1) * k^(1-c) (resp. * k^-c), exact closed-form completion.
SeriesSum sum_rho_series(double c, bool over_k, double tol, std::uint64_t cap) {
  require_shape(c);
  if (cap == 0) throw std::invalid_argument("series cap must be positive");
  const double log_gamma_c1 = lgamma_pos(c + 1.0);
  KahanSum partial;
  double rho = (c - 1.0) / (c + 1.0);  // rho_1; the k=1 term equals rho_1 either way
  partial.add(rho);
  std::uint64_t k = 1;
  bool converged = false;
  while (k < cap) {
    double bound =
        std::exp(log_gamma_c1 + (over_k ? -c : 1.0 - c) * std::log(static_cast<double>(k)));
    if (bound < tol * partial.sum) {
      converged = true;
      break;
    }
    rho *= static_cast<double>(k + 1) / (static_cast<double>(k + 1) + c);
    ++k;
    partial.add(over_k ? rho / static_cast<double>(k) : rho);
  }
  double tail = over_k ? (c - 1.0) / c * yule_simon_ccdf(c, k) : rho_ccdf(c, k);
  return SeriesSum{partial.sum + tail, partial.sum, tail, k, converged};
}

}  // namespace

double beta_function(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0))
    throw std::domain_error("beta_function: arguments must be positive");
  if (x < y) std::swap(x, y);
  if (x + y <= 50.0) return std::exp(lgamma_pos(x) + lgamma_pos(y) - lgamma_pos(x + y));
  return std::exp(lgamma_pos(y) - lgamma_ratio(x, y));
}

double yule_simon_pmf(double rho, std::uint64_t k) {
  if (!(rho > 0.0)) throw std::domain_error("yule_simon_pmf: rho must be positive");
  require_k(k);
  return rho * beta_function(static_cast<double>(k), rho + 1.0);
}

double yule_simon_ccdf(double rho, std::uint64_t k) {
  if (!(rho > 0.0)) throw std::domain_error("yule_simon_ccdf: rho must be positive");
  if (k == 0) return 1.0;
  return static_cast<double>(k) * beta_function(static_cast<double>(k), rho + 1.0);
}

double shifted_conditioned_pmf(double rho, std::uint64_t k) {
  if (!(rho > 0.0)) throw std::domain_error("shifted_conditioned_pmf: rho must be positive");
  require_k(k);
  return rho * (rho + 1.0) * beta_function(static_cast<double>(k + 1), rho + 1.0);
}

double shifted_conditioned_ccdf(double rho, std::uint64_t k) {
  if (!(rho > 0.0)) throw std::domain_error("shifted_conditioned_ccdf: rho must be positive");
  return (rho + 1.0) * static_cast<double>(k + 1) *
         beta_function(static_cast<double>(k + 1), rho + 1.0);
}

double rho_k(double c, std::uint64_t k) {
  require_shape(c);
  return shifted_conditioned_pmf(c - 1.0, k);
}

double rho_ccdf(double c, std::uint64_t k) {
  require_shape(c);
  return shifted_conditioned_ccdf(c - 1.0, k);
}

double beta_k_product_form(double p, double r, double f, std::uint64_t k) {
  DerivedConstants d = transient_constants(p, r, "beta_k");
  if (!(f > d.f_c && f <= 1.0)) throw std::domain_error("beta_k: f must lie in (f_c, 1]");
  require_k(k);
  const auto c = static_cast<long double>(d.c);
  const auto kl = static_cast<long double>(k);
  long double lg = lgammal_pos(c + 1.0L) + lgammal_pos(kl + 1.0L) - lgammal_pos(c + kl + 1.0L);
  return static_cast<double>((1.0L - static_cast<long double>(f)) *
                             (static_cast<long double>(r) / (1.0L - static_cast<long double>(r))) *
                             std::exp(lg));
}

double beta_k(double p, double r, double f, std::uint64_t k) {
  DerivedConstants d = transient_constants(p, r, "beta_k");
  if (!(f > d.f_c && f <= 1.0)) throw std::domain_error("beta_k: f must lie in (f_c, 1]");
  require_k(k);
  double a = (1.0 - f) / (1.0 - d.f_c) * shifted_conditioned_pmf(d.c - 1.0, k);
  double b = beta_k_product_form(p, r, f, k);
  if (std::abs(a - b) > kRouteAgreement * std::max(std::abs(a), std::abs(b)))
    throw std::logic_error("beta_k: computation routes disagree beyond 1e-10");
  return a;
}

double site_proportion_pmf(double c, std::uint64_t k) {
  require_k(k);
  double norm = rho_over_k_mass(c).value;
  return rho_k(c, k) / static_cast<double>(k) / norm;
}

double fitness_marginal_cdf(double p, double r, double f) {
  DerivedConstants d = derive_constants(p, r);
  if (d.regime != Regime::transient)
    throw std::domain_error("fitness_marginal_cdf: requires the transient regime");
  if (f <= d.f_c) return 0.0;
  if (f >= 1.0) return 1.0;
  return (f - d.f_c) / (1.0 - d.f_c);
}

double geometric_variant_param(double p, double r) {
  DerivedConstants d = derive_constants(p, r);
  if (d.regime != Regime::transient)
    throw std::domain_error("geometric_variant_param: requires the transient regime");
  return (p * r - (1.0 - p)) / d.gamma;
}

double geometric_pmf(double q, std::uint64_t k) {
  if (!(q > 0.0 && q <= 1.0)) throw std::domain_error("geometric_pmf: q must be in (0,1]");
  require_k(k);
  if (k == 1) return q;
  return q * std::exp(static_cast<double>(k - 1) * std::log1p(-q));
}

std::vector<double> balance_residuals(double p, double r, double f, std::uint64_t max_k) {
  transient_constants(p, r, "balance_residuals");
  if (max_k == 0) throw std::invalid_argument("balance_residuals: max_k must be >= 1");
  const double gamma = 2.0 * p - 1.0;
  const double inherit = p * (1.0 - r);
  std::vector<double> out(max_k);
  double prev = beta_k(p, r, f, 1);
  out[0] = std::abs(gamma * prev - (p * r * (1.0 - f) - inherit * prev));
  for (std::uint64_t k = 2; k <= max_k; ++k) {
    double cur = beta_k(p, r, f, k);
    out[k - 1] = std::abs(gamma * cur / static_cast<double>(k) - inherit * (prev - cur));
    prev = cur;
  }
  return out;
}

SeriesSum rho_total_mass(double c, double tol, std::uint64_t cap) {
  return sum_rho_series(c, false, tol, cap);
}

SeriesSum beta_total_mass(double p, double r, double f, double tol, std::uint64_t cap) {
  DerivedConstants d = transient_constants(p, r, "beta_total_mass");
  if (!(f > d.f_c && f <= 1.0))
    throw std::domain_error("beta_total_mass: f must lie in (f_c, 1]");
  const double scale = (1.0 - f) / (1.0 - d.f_c);
  SeriesSum s = sum_rho_series(d.c, false, tol, cap);
  return SeriesSum{scale * s.value, scale * s.partial, scale * s.tail, s.terms,
                   s.bound_converged};
}

SeriesSum rho_over_k_mass(double c, double tol, std::uint64_t cap) {
  return sum_rho_series(c, true, tol, cap);
}

LimitLaw LimitLaw::individual_sizes(double c) {
  require_shape(c);
  return LimitLaw(Kind::individual, c, 1.0);
}

LimitLaw LimitLaw::site_proportions(double c) {
  require_shape(c);
  return LimitLaw(Kind::site, c, rho_over_k_mass(c).value);
}

LimitLaw LimitLaw::geometric(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw std::domain_error("LimitLaw::geometric: q must be in (0,1]");
  return LimitLaw(Kind::geometric, q, 1.0);
}

double LimitLaw::pmf(std::uint64_t k) const {
  require_k(k);
  switch (kind_) {
    case Kind::individual: return rho_k(shape_, k);
    case Kind::site: return rho_k(shape_, k) / static_cast<double>(k) / norm_;
    default: return geometric_pmf(shape_, k);
  }
}

double LimitLaw::ccdf(std::uint64_t k) const {
  switch (kind_) {
    case Kind::individual: return rho_ccdf(shape_, k);
    case Kind::site:
      return (shape_ - 1.0) / shape_ * yule_simon_ccdf(shape_, k) / norm_;
    default: return k == 0 ? 1.0 : std::exp(static_cast<double>(k) * std::log1p(-shape_));
  }
}

std::vector<double> LimitLaw::pmf_table(std::uint64_t max_k) const {
  std::vector<double> out;
  out.reserve(max_k);
  if (kind_ == Kind::geometric) {
    double term = shape_;
    for (std::uint64_t k = 1; k <= max_k; ++k) {
      out.push_back(term);
      term *= 1.0 - shape_;
    }
    return out;
  }
  const double c = shape_;
  double rho = (c - 1.0) / (c + 1.0);
  for (std::uint64_t k = 1; k <= max_k; ++k) {
    out.push_back(kind_ == Kind::individual ? rho : rho / static_cast<double>(k) / norm_);
    rho *= static_cast<double>(k + 1) / (static_cast<double>(k + 1) + c);
  }
  return out;
}

}  // namespace fitsim::theory
