#include "fitsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fitsim {
namespace stats {

namespace {

// Compensated accumulator; the tv/normalization sums run over ~1e6 terms.
struct KahanSum {
  double value = 0.0;
  double carry = 0.0;

  void add(double term) {
    const double y = term - carry;
    const double t = value + y;
    carry = (t - value) - y;
    value = t;
  }
};

struct LeastSquares {
  double slope = 0.0;
  double r_squared = 1.0;
};

LeastSquares fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  KahanSum sx, sy;
  for (double x : xs) sx.add(x);
  for (double y : ys) sy.add(y);
  const double mx = sx.value / n;
  const double my = sy.value / n;
  KahanSum sxx, sxy, syy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx.add((xs[i] - mx) * (xs[i] - mx));
    sxy.add((xs[i] - mx) * (ys[i] - my));
    syy.add((ys[i] - my) * (ys[i] - my));
  }
  if (sxx.value <= 0.0) throw std::invalid_argument("fit_line: degenerate abscissa");
  LeastSquares out;
  out.slope = sxy.value / sxx.value;
  out.r_squared = syy.value > 0.0 ? (sxy.value * sxy.value) / (sxx.value * syy.value) : 1.0;
  return out;
}

void require_normalized(const Pmf& pmf, const char* who) {
  const double total = pmf.total();
  if (std::fabs(total - 1.0) > 1e-6)
    throw std::invalid_argument(std::string(who) + ": pmf not normalized, total " +
                                std::to_string(total));
}

}  // namespace

double Pmf::total() const {
  KahanSum sum;
  for (double m : mass) sum.add(m);
  sum.add(tail);
  return sum.value;
}

double EmpiricalMeasure::mu(std::uint64_t k) const {
  if (k == 0) throw std::domain_error("EmpiricalMeasure::mu: k must be >= 1");
  if (population == 0) return 0.0;
  const auto it = histogram.find(k);
  if (it == histogram.end()) return 0.0;
  return static_cast<double>(k) * static_cast<double>(it->second) /
         static_cast<double>(population);
}

double EmpiricalMeasure::support_mass() const {
  if (population == 0) return 0.0;
  std::uint64_t members = 0;
  for (const auto& [k, count] : histogram) members += k * count;
  return static_cast<double>(members) / static_cast<double>(population);
}

Pmf EmpiricalMeasure::normalized() const {
  if (delta_zero() || histogram.empty())
    throw std::domain_error("EmpiricalMeasure::normalized: no mass on k >= 1");
  // T_n cancels in the ratio: the normalized measure is the size-weighted
  // site histogram.
  std::uint64_t members = 0;
  for (const auto& [k, count] : histogram) members += k * count;
  Pmf out;
  out.mass.assign(histogram.rbegin()->first, 0.0);
  for (const auto& [k, count] : histogram)
    out.mass[k - 1] =
        static_cast<double>(k) * static_cast<double>(count) / static_cast<double>(members);
  return out;
}

EmpiricalMeasure make_empirical_measure(SizeHistogram histogram, std::uint64_t population,
                                        double f) {
  if (!(f >= 0.0 && f <= 1.0))
    throw std::domain_error("make_empirical_measure: threshold must lie in [0, 1]");
  std::uint64_t members = 0;
  for (const auto& [k, count] : histogram) {
    if (k == 0 || count == 0)
      throw std::invalid_argument("make_empirical_measure: zero size or count entry");
    members += k * count;
  }
  if (members > population)
    throw std::invalid_argument("make_empirical_measure: histogram exceeds population");
  EmpiricalMeasure out;
  out.f = f;
  out.population = population;
  out.histogram = std::move(histogram);
  return out;
}

Pmf site_size_pmf(const SizeHistogram& histogram) {
  if (histogram.empty()) throw std::domain_error("site_size_pmf: empty histogram");
  std::uint64_t sites = 0;
  for (const auto& [k, count] : histogram) {
    if (k == 0) throw std::invalid_argument("site_size_pmf: zero size entry");
    sites += count;
  }
  Pmf out;
  out.mass.assign(histogram.rbegin()->first, 0.0);
  for (const auto& [k, count] : histogram)
    out.mass[k - 1] = static_cast<double>(count) / static_cast<double>(sites);
  return out;
}

SizeHistogram merge_histograms(const SizeHistogram& a, const SizeHistogram& b) {
  SizeHistogram out = a;
  for (const auto& [k, count] : b) out[k] += count;
  return out;
}

Pmf average_pmfs(const std::vector<Pmf>& pmfs) {
  if (pmfs.empty()) throw std::invalid_argument("average_pmfs: no inputs");
  std::size_t width = 0;
  for (const auto& pmf : pmfs) width = std::max(width, pmf.mass.size());
  Pmf out;
  out.mass.assign(width, 0.0);
  const double n = static_cast<double>(pmfs.size());
  for (const auto& pmf : pmfs) {
    for (std::size_t i = 0; i < pmf.mass.size(); ++i) out.mass[i] += pmf.mass[i] / n;
    out.tail += pmf.tail / n;
  }
  return out;
}

double tv_distance(const Pmf& p, const Pmf& q) {
  require_normalized(p, "tv_distance(p)");
  require_normalized(q, "tv_distance(q)");
  const std::size_t width = std::max(p.mass.size(), q.mass.size());
  KahanSum sum;
  for (std::size_t i = 0; i < width; ++i) {
    const double a = i < p.mass.size() ? p.mass[i] : 0.0;
    const double b = i < q.mass.size() ? q.mass[i] : 0.0;
    sum.add(std::fabs(a - b));
  }
  // Tail masses live beyond each table; treated as disjoint remainders.
  sum.add(std::fabs(p.tail));
  sum.add(std::fabs(q.tail));
  return 0.5 * sum.value;
}

double tv_distance(const Pmf& empirical, const theory::LimitLaw& law) {
  if (empirical.tail != 0.0)
    throw std::invalid_argument("tv_distance: empirical pmf must have zero tail");
  const std::uint64_t width = empirical.mass.size();
  if (width == 0) throw std::invalid_argument("tv_distance: empty empirical pmf");
  Pmf limit;
  limit.mass = law.pmf_table(width);
  limit.tail = law.ccdf(width);
  return tv_distance(empirical, limit);
}

double tv_distance_states(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance_states: size mismatch");
  KahanSum sum;
  for (std::size_t i = 0; i < p.size(); ++i) sum.add(std::fabs(p[i] - q[i]));
  return 0.5 * sum.value;
}

double joint_band_mass(const EmpiricalMeasure& low, const EmpiricalMeasure& high,
                       const std::vector<std::uint64_t>& sizes) {
  if (low.f > high.f) throw std::invalid_argument("joint_band_mass: thresholds out of order");
  if (low.population != high.population)
    throw std::invalid_argument("joint_band_mass: measures from different states");
  KahanSum sum;
  for (std::uint64_t k : sizes) sum.add(low.mu(k) - high.mu(k));
  return sum.value;
}

double ks_uniform_fitness(const std::vector<Site>& sites, const DerivedConstants& constants,
                          bool size_weighted) {
  if (constants.regime != Regime::transient)
    throw std::domain_error("ks_uniform_fitness: requires a transient parameter set");
  std::vector<Site> kept;
  kept.reserve(sites.size());
  for (const Site& site : sites)
    if (site.fitness >= constants.f_c) kept.push_back(site);
  if (kept.empty()) throw std::domain_error("ks_uniform_fitness: no sites above threshold");
  std::sort(kept.begin(), kept.end(),
            [](const Site& a, const Site& b) { return a.fitness < b.fitness; });
  long double total = 0.0L;
  for (const Site& site : kept) total += size_weighted ? static_cast<long double>(site.size) : 1.0L;
  const double span = 1.0 - constants.f_c;
  long double cumulative = 0.0L;
  double d = 0.0;
  for (const Site& site : kept) {
    const double cdf = (site.fitness - constants.f_c) / span;
    const double before = static_cast<double>(cumulative / total);
    cumulative += size_weighted ? static_cast<long double>(site.size) : 1.0L;
    const double after = static_cast<double>(cumulative / total);
    d = std::max(d, std::max(cdf - before, after - cdf));
  }
  return d;
}

double percent_error(double empirical, double theory) {
  if (theory == 0.0) throw std::domain_error("percent_error: zero reference value");
  return std::fabs(empirical - theory) / std::fabs(theory) * 100.0;
}

TailFit tail_exponent_fit(const Pmf& pmf, std::uint64_t k_min) {
  if (k_min < 1) throw std::invalid_argument("tail_exponent_fit: k_min must be >= 1");
  std::vector<double> xs, ys;
  for (std::uint64_t k = k_min; k <= pmf.mass.size(); ++k) {
    const double mass = pmf.mass[k - 1];
    if (mass <= 0.0) continue;
    xs.push_back(std::log(static_cast<double>(k)));
    ys.push_back(std::log(mass));
  }
  if (xs.size() < 10)
    throw std::invalid_argument("tail_exponent_fit: needs at least 10 support points, got " +
                                std::to_string(xs.size()));
  const LeastSquares fit = fit_line(xs, ys);
  return TailFit{-fit.slope, fit.r_squared, static_cast<std::uint64_t>(xs.size())};
}

BandDiagnostics band_diagnostics(const std::vector<double>& trajectory, double beta,
                                 double epsilon) {
  if (trajectory.empty()) throw std::invalid_argument("band_diagnostics: empty trajectory");
  if (!(epsilon > 0.0)) throw std::invalid_argument("band_diagnostics: epsilon must be positive");
  BandDiagnostics out{};
  bool inside = false;  // an entry has happened and no exit yet
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const double gap = trajectory[i] - beta;
    if (!inside) {
      if (gap > 2.0 * epsilon && gap < 3.0 * epsilon) {
        out.entries.push_back(i);
        inside = true;
      }
    } else {
      if (gap > 4.0 * epsilon) {
        out.up_exits.push_back(i);
        inside = false;
      } else if (gap < epsilon) {
        out.down_exits.push_back(i);
        inside = false;
      }
    }
  }
  const std::size_t half_start = trajectory.size() / 2;
  std::size_t close = 0;
  for (std::size_t i = half_start; i < trajectory.size(); ++i)
    if (std::fabs(trajectory[i] - beta) <= epsilon) ++close;
  out.late_fraction = static_cast<double>(close) / static_cast<double>(trajectory.size() - half_start);
  return out;
}

std::vector<double> exact_population_pmf(double p, std::uint64_t n) {
  if (!(p >= 0.0) || p >= 1.0)
    throw std::domain_error("exact_population_pmf: p must lie in [0, 1)");
  if (n > 10000) throw std::invalid_argument("exact_population_pmf: n capped at 10^4");
  std::vector<double> cur(n + 1, 0.0), next(n + 1, 0.0);
  cur[0] = 1.0;
  const double q = 1.0 - p;
  for (std::uint64_t step = 1; step <= n; ++step) {
    std::fill(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(step) + 1, 0.0);
    // Reachable states after step-1 steps are 0..step-1.
    next[0] += q * cur[0];
    next[1] += p * cur[0];
    for (std::uint64_t j = 1; j < step; ++j) {
      if (cur[j] == 0.0) continue;
      next[j + 1] += p * cur[j];
      next[j - 1] += q * cur[j];
    }
    std::swap(cur, next);
  }
  return cur;
}

double exceedance_probability(const std::vector<double>& pmf, std::uint64_t n, double gamma,
                              double epsilon) {
  if (n == 0 || pmf.size() != n + 1)
    throw std::invalid_argument("exceedance_probability: pmf must cover states 0..n");
  KahanSum sum;
  for (std::uint64_t j = 0; j <= n; ++j) {
    const double scaled = static_cast<double>(j) / static_cast<double>(n);
    if (std::fabs(scaled - gamma) > epsilon) sum.add(pmf[j]);
  }
  return sum.value;
}

CouplingReport coupling_check(double p, std::uint64_t n, std::uint64_t trials, std::uint64_t seed,
                              double epsilon, std::uint64_t grid_max, std::uint64_t grid_step) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("coupling_check: p must lie in (0, 1)");
  if (n == 0 || trials == 0) throw std::invalid_argument("coupling_check: n and trials positive");
  if (grid_step == 0 || grid_max < grid_step || grid_max > 10000)
    throw std::invalid_argument("coupling_check: bad concentration grid");
  CouplingReport report;
  report.n = n;
  report.trials = trials;
  report.epsilon = epsilon;
  report.dp_pmf = exact_population_pmf(p, n);

  const std::uint64_t threshold = bernoulli_threshold(p);
  const CounterRng chain_rng(seed, 0);
  const CounterRng reflected_rng(seed, 1);
  std::vector<std::uint64_t> chain_hits(n + 1, 0), reflected_hits(n + 1, 0);
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    const std::uint64_t base = trial * n;
    std::int64_t t = 0;
    std::int64_t w = 0, m = 0;
    for (std::uint64_t j = 0; j < n; ++j) {
      if (chain_rng.word_at(base + j) < threshold)
        ++t;
      else if (t > 0)
        --t;
      if (reflected_rng.word_at(base + j) < threshold)
        ++w;
      else
        --w;
      m = std::min(m, w);
    }
    ++chain_hits[static_cast<std::uint64_t>(t)];
    ++reflected_hits[static_cast<std::uint64_t>(w - std::min<std::int64_t>(0, m))];
  }
  report.chain_pmf.resize(n + 1);
  report.reflected_pmf.resize(n + 1);
  for (std::uint64_t j = 0; j <= n; ++j) {
    report.chain_pmf[j] = static_cast<double>(chain_hits[j]) / static_cast<double>(trials);
    report.reflected_pmf[j] = static_cast<double>(reflected_hits[j]) / static_cast<double>(trials);
  }
  report.tv_reflected_dp = tv_distance_states(report.reflected_pmf, report.dp_pmf);
  report.tv_chain_dp = tv_distance_states(report.chain_pmf, report.dp_pmf);
  report.tv_chain_reflected = tv_distance_states(report.chain_pmf, report.reflected_pmf);

  const double gamma = 2.0 * p - 1.0;
  std::vector<double> cur(grid_max + 1, 0.0), next(grid_max + 1, 0.0);
  cur[0] = 1.0;
  const double q = 1.0 - p;
  for (std::uint64_t step = 1; step <= grid_max; ++step) {
    std::fill(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(step) + 1, 0.0);
    next[0] += q * cur[0];
    next[1] += p * cur[0];
    for (std::uint64_t j = 1; j < step; ++j) {
      if (cur[j] == 0.0) continue;
      next[j + 1] += p * cur[j];
      next[j - 1] += q * cur[j];
    }
    std::swap(cur, next);
    if (step % grid_step == 0) {
      const std::vector<double> prefix(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(step) + 1);
      report.concentration.emplace_back(step, exceedance_probability(prefix, step, gamma, epsilon));
    }
  }
  std::vector<double> xs, ys;
  for (const auto& [at, prob] : report.concentration) {
    if (prob <= 0.0) continue;
    xs.push_back(static_cast<double>(at));
    ys.push_back(std::log(prob));
  }
  report.log_slope = xs.size() >= 2 ? fit_line(xs, ys).slope : 0.0;
  return report;
}

}  // namespace stats
}  // namespace fitsim
