#pragma once

// Closed-form limit laws for the model.
//
// Everything reduces to the Euler Beta function B(x,y), evaluated through
// log-Gamma. For large first argument the naive lgamma(x)+lgamma(y)-
// lgamma(x+y) loses digits (the lgammas reach 1e7 while the result is O(1)),
// so B is assembled from a Stirling-series ratio lgamma(x+y)-lgamma(x) that
// keeps the relative error near 1e-13 for x up to 1e6, y up to 100.
//
// Infinite sums over k cannot be truncated blindly: the individual-size law
// has tail mass ~ Gamma(c+1) K^(1-c), which for c near 1 stays macroscopic
// for any feasible K. Series helpers therefore sum terms by recurrence until
// the analytic K^(1-c) bound is negligible (or a term cap) and complete the
// sum with the exact survival mass of the law.

#include <cstdint>
#include <vector>

#include "fitsim/model.hpp"

namespace fitsim {
namespace theory {

/// Euler Beta via log-Gamma; relative error <~1e-12 for x <= 1e6, y <= 100.
[[nodiscard]] double beta_function(double x, double y);

/// Yule-Simon pmf P(Z = k) = rho * B(k, rho+1), k >= 1.
[[nodiscard]] double yule_simon_pmf(double rho, std::uint64_t k);

/// Yule-Simon survival P(Z > k) = k * B(k, rho+1); ccdf(0) = 1.
[[nodiscard]] double yule_simon_ccdf(double rho, std::uint64_t k);

/// Pmf of Z-1 conditioned on Z > 1, Z Yule-Simon(rho):
/// rho*(rho+1)*B(k+1, rho+1), k >= 1.
[[nodiscard]] double shifted_conditioned_pmf(double rho, std::uint64_t k);

/// Survival of the same law: (rho+1)*(k+1)*B(k+1, rho+1); ccdf(0) = 1.
[[nodiscard]] double shifted_conditioned_ccdf(double rho, std::uint64_t k);

/// Individual-level limit of site sizes at threshold f = f_c:
/// rho_k = (c-1) c B(k+1, c).
[[nodiscard]] double rho_k(double c, std::uint64_t k);

/// Exact mass of {rho_j : j > k}.
[[nodiscard]] double rho_ccdf(double c, std::uint64_t k);

/// Limit of the empirical measure at threshold f > f_c:
/// beta_k = (1-f)/(1-f_c) * rho_k. Cross-checked on every call against the
/// closed product form (independent long-double lgamma path) to 1e-10.
[[nodiscard]] double beta_k(double p, double r, double f, std::uint64_t k);

/// Closed product form (1-f) * r/(1-r) * Gamma(c+1)Gamma(k+1)/Gamma(c+k+1).
[[nodiscard]] double beta_k_product_form(double p, double r, double f, std::uint64_t k);

/// Limit distribution of site proportions: C * beta_k / k with
/// C = 1 / sum_j beta_j / j; the f-factor cancels.
[[nodiscard]] double site_proportion_pmf(double c, std::uint64_t k);

/// Marginal fitness CDF of the individual-level limit: uniform on [f_c, 1].
[[nodiscard]] double fitness_marginal_cdf(double p, double r, double f);

/// Site-size limit parameter of the uniform variant:
/// (pr - (1-p)) / (p - (1-p)); requires the transient regime. Accepts r = 1.
[[nodiscard]] double geometric_variant_param(double p, double r);

/// Geometric pmf on {1, 2, ...}: q (1-q)^(k-1).
[[nodiscard]] double geometric_pmf(double q, std::uint64_t k);

/// Absolute residuals of the stationarity balance equations for k = 1..K:
///   k = 1 : gamma beta_1 - (pr(1-f) - p(1-r) beta_1)
///   k >= 2: gamma beta_k / k - p(1-r)(beta_{k-1} - beta_k)
[[nodiscard]] std::vector<double> balance_residuals(double p, double r, double f,
                                                    std::uint64_t max_k);

/// Partial sum + exact tail of a law's total mass.
struct SeriesSum {
  double value;          // partial + closed-form tail
  double partial;        // sum of the first `terms` pmf values
  double tail;           // exact mass beyond the cutoff
  std::uint64_t terms;
  bool bound_converged;  // analytic K^(1-c) bound reached the tolerance
};

/// Sum of rho_k over all k (limit value 1).
[[nodiscard]] SeriesSum rho_total_mass(double c, double tol = 1e-12,
                                       std::uint64_t cap = 1u << 21);

/// Sum of beta_k over all k (limit value (1-f)/(1-f_c)).
[[nodiscard]] SeriesSum beta_total_mass(double p, double r, double f, double tol = 1e-12,
                                        std::uint64_t cap = 1u << 21);

/// Sum of rho_k / k over all k (site-proportion normalizer, limit (c-1)/c).
[[nodiscard]] SeriesSum rho_over_k_mass(double c, double tol = 1e-12,
                                        std::uint64_t cap = 1u << 21);

// Discrete limit law on k >= 1 with exact tail mass; the handle the distance
// computations consume.
class LimitLaw {
 public:
  /// Individual-level size law rho_k (tail index c).
  static LimitLaw individual_sizes(double c);
  /// Site-proportion law C rho_k / k (tail index c + 1).
  static LimitLaw site_proportions(double c);
  /// Geometric(q) on {1, 2, ...} (uniform-variant site sizes).
  static LimitLaw geometric(double q);

  [[nodiscard]] double pmf(std::uint64_t k) const;
  [[nodiscard]] double ccdf(std::uint64_t k) const;
  /// pmf for k = 1..max_k by recurrence; O(max_k).
  [[nodiscard]] std::vector<double> pmf_table(std::uint64_t max_k) const;

 private:
  enum class Kind { individual, site, geometric };
  LimitLaw(Kind kind, double shape, double norm) : kind_(kind), shape_(shape), norm_(norm) {}

  Kind kind_;
  double shape_;  // c or q
  double norm_;   // site-proportion normalizer; 1 otherwise
};

}  // namespace theory
}  // namespace fitsim
