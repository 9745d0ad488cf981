#pragma once

// Empirical measures and the distances/fits used to compare a run against
// the closed-form limits, plus the exact chain oracles (dynamic-programming
// PMF of the population walk and the reflection-coupling Monte Carlo check).

#include <cstdint>
#include <utility>
#include <vector>

#include "fitsim/model.hpp"
#include "fitsim/site_index.hpp"
#include "fitsim/theory.hpp"

namespace fitsim {
namespace stats {

// Probability vector over k = 1..K (index k-1) plus the mass beyond K.
// Empirical pmfs have tail 0; theory tables carry their exact survival mass.
struct Pmf {
  std::vector<double> mass;
  double tail = 0.0;

  [[nodiscard]] double total() const;
  [[nodiscard]] double at(std::uint64_t k) const {
    return k >= 1 && k <= mass.size() ? mass[k - 1] : 0.0;
  }
};

// mu_n^f: k * U_n^k(f) / T_n over k >= 1, the point mass at zero when the
// population is empty. `population` is total T_n including mass below f.
struct EmpiricalMeasure {
  double f = 0.0;
  std::uint64_t population = 0;
  SizeHistogram histogram;  // size -> count of sites with fitness >= f

  [[nodiscard]] bool delta_zero() const { return population == 0; }
  [[nodiscard]] double mu(std::uint64_t k) const;
  /// Total mass sum_k mu(k) = (members with fitness >= f) / T_n.
  [[nodiscard]] double support_mass() const;
  /// mu renormalized to its own support mass; errors on the delta_0 case.
  [[nodiscard]] Pmf normalized() const;
};

/// Validates histogram-vs-population consistency.
[[nodiscard]] EmpiricalMeasure make_empirical_measure(SizeHistogram histogram,
                                                      std::uint64_t population, double f);

template <class Index>
[[nodiscard]] EmpiricalMeasure empirical_measure(const Index& index, double f = 0.0) {
  return make_empirical_measure(index.size_histogram(f), index.population(), f);
}

/// Site-level pmf: fraction of sites of each size.
[[nodiscard]] Pmf site_size_pmf(const SizeHistogram& histogram);

/// Pointwise sum of two size histograms (associative, commutative).
[[nodiscard]] SizeHistogram merge_histograms(const SizeHistogram& a, const SizeHistogram& b);

/// Entrywise average of probability vectors (seed averaging).
[[nodiscard]] Pmf average_pmfs(const std::vector<Pmf>& pmfs);

/// Total variation (1/2) sum_k |p_k - q_k|; both inputs must be normalized.
/// Tails are counted in full (the theory tail beyond an empirical maximum).
[[nodiscard]] double tv_distance(const Pmf& p, const Pmf& q);

/// TV against a limit law; the law's table is built to the empirical maximum
/// and its survival mass beyond that point is counted in full.
[[nodiscard]] double tv_distance(const Pmf& empirical, const theory::LimitLaw& law);

/// TV between dense pmfs over states 0..n (population-walk oracles).
[[nodiscard]] double tv_distance_states(const std::vector<double>& p,
                                        const std::vector<double>& q);

/// mu^a(B) - mu^b(B) for a band B of sizes, thresholds a <= b over one state.
[[nodiscard]] double joint_band_mass(const EmpiricalMeasure& low, const EmpiricalMeasure& high,
                                     const std::vector<std::uint64_t>& sizes);

/// Kolmogorov-Smirnov distance of site fitness values (restricted to
/// fitness >= f_c) against Uniform[f_c, 1]; weighted by site size by default,
/// site-weighted (weight 1) otherwise.
[[nodiscard]] double ks_uniform_fitness(const std::vector<Site>& sites,
                                        const DerivedConstants& constants,
                                        bool size_weighted = true);

/// |empirical - theory| / theory * 100; domain error when theory == 0.
[[nodiscard]] double percent_error(double empirical, double theory);

struct TailFit {
  double exponent;   // negated log-log least-squares slope
  double r_squared;  // fit diagnostic; low values flag a poor power law
  std::uint64_t points;
};

/// Least-squares fit of log pmf vs log k over support points k >= k_min.
/// Requires at least 10 support points.
[[nodiscard]] TailFit tail_exponent_fit(const Pmf& pmf, std::uint64_t k_min = 10);

// First-entry and first-exit times of a trajectory around a target level:
// entry when value - beta lands in (2e, 3e); after an entry, exit upward on
// value > beta + 4e or downward on value < beta + e; then scan for the next
// entry. Indices are positions in the supplied trajectory.
struct BandDiagnostics {
  std::vector<std::uint64_t> entries;
  std::vector<std::uint64_t> up_exits;
  std::vector<std::uint64_t> down_exits;
  double late_fraction;  // share of the second half within +-e of beta
};

[[nodiscard]] BandDiagnostics band_diagnostics(const std::vector<double>& trajectory, double beta,
                                               double epsilon);

/// Exact PMF of the reflected population walk after n steps (T_0 = 0),
/// states 0..n. O(n^2); n capped at 10^4. p = 1 is rejected.
[[nodiscard]] std::vector<double> exact_population_pmf(double p, std::uint64_t n);

/// P(|T_n / n - gamma| > epsilon) under an exact state pmf.
[[nodiscard]] double exceedance_probability(const std::vector<double>& pmf, std::uint64_t n,
                                            double gamma, double epsilon);

// Monte Carlo of the coupled representations against the exact DP oracle:
// the chain simulated directly and the reflected construction
// W_n - min(0, min_j W_j), which realizes the same law.
struct CouplingReport {
  std::uint64_t n = 0;
  std::uint64_t trials = 0;
  double epsilon = 0.1;
  std::vector<double> dp_pmf;
  std::vector<double> chain_pmf;
  std::vector<double> reflected_pmf;
  double tv_reflected_dp = 0.0;
  double tv_chain_dp = 0.0;
  double tv_chain_reflected = 0.0;
  // DP concentration curve (n, P(|T_n/n - gamma| > epsilon)) and the
  // least-squares slope of ln P against n over its positive entries.
  std::vector<std::pair<std::uint64_t, double>> concentration;
  double log_slope = 0.0;
};

[[nodiscard]] CouplingReport coupling_check(double p, std::uint64_t n, std::uint64_t trials,
                                            std::uint64_t seed = 0, double epsilon = 0.1,
                                            std::uint64_t grid_max = 1000,
                                            std::uint64_t grid_step = 100);

}  // namespace stats
}  // namespace fitsim
