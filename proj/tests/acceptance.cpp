// Acceptance suite. Each check exercises one headline property end to end
// and prints exactly one line:
//
//   PASS <name>: <measured values against their thresholds>
//   FAIL <name>: <measured values against their thresholds>
//
// Run with no arguments for every check, or pass check names. The process
// exits 0 only if every requested check passes. Thresholds are fixed here on
// purpose: they are the contract, not tunables.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fitsim/harness.hpp"
#include "fitsim/model.hpp"
#include "fitsim/rng.hpp"
#include "fitsim/site_index.hpp"
#include "fitsim/snapshot.hpp"
#include "fitsim/stats.hpp"
#include "fitsim/theory.hpp"

namespace {

using namespace fitsim;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, const char* spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

FastSimulation run_model(double p, double r, std::uint64_t seed, std::uint64_t steps,
                         Variant variant = Variant::proportional) {
  Params params;
  params.p = p;
  params.r = r;
  params.seed = seed;
  params.variant = variant;
  FastSimulation sim(params, 0);
  sim.run(steps);
  return sim;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fitsim_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// --- 1. Individual-size limit law at c = 1.25 ------------------------------
// p=0.8, r=0.4, f=0, 5 seeds. Seed-averaged TV(mu-hat, rho) < 0.05 at 1e6
// steps; per-k error < 20% (k <= 10) at 1e6 and < 10% at 5e6 on the
// seed-averaged pmf; each 1e6-step run must take <= 60 s.
Outcome individual_limit_law() {
  const double p = 0.8, r = 0.4;
  const DerivedConstants dc = derive_constants(p, r);
  const theory::LimitLaw law = theory::LimitLaw::individual_sizes(dc.c);

  std::vector<stats::Pmf> at_1m, at_5m;
  double tv_sum = 0.0, max_seconds = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Params params;
    params.p = p;
    params.r = r;
    params.seed = seed;
    FastSimulation sim(params, 0);
    const auto t0 = std::chrono::steady_clock::now();
    sim.run(1000000);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    max_seconds = std::max(max_seconds, seconds);

    stats::Pmf pmf = stats::empirical_measure(sim.index(), 0.0).normalized();
    tv_sum += stats::tv_distance(pmf, law);
    at_1m.push_back(std::move(pmf));

    sim.run(4000000);
    at_5m.push_back(stats::empirical_measure(sim.index(), 0.0).normalized());
  }

  const double tv_avg = tv_sum / 5.0;
  const stats::Pmf avg_1m = stats::average_pmfs(at_1m);
  const stats::Pmf avg_5m = stats::average_pmfs(at_5m);
  double worst_1m = 0.0, worst_5m = 0.0;
  for (std::uint64_t k = 1; k <= 10; ++k) {
    worst_1m = std::max(worst_1m, stats::percent_error(avg_1m.at(k), theory::rho_k(dc.c, k)));
    worst_5m = std::max(worst_5m, stats::percent_error(avg_5m.at(k), theory::rho_k(dc.c, k)));
  }

  const bool pass =
      tv_avg < 0.05 && worst_1m < 20.0 && worst_5m < 10.0 && max_seconds <= 60.0;
  std::ostringstream out;
  out << "seed-averaged TV at 1e6 = " << num(tv_avg) << " (< 0.05); max per-k error k<=10: "
      << num(worst_1m, "%.2f") << "% at 1e6 (< 20), " << num(worst_5m, "%.2f")
      << "% at 5e6 (< 10); slowest 1e6-step run " << num(max_seconds, "%.1f") << " s (<= 60)";
  return {pass, out.str()};
}

// --- 2. Fitness marginal is uniform above the cutoff -----------------------
// p=0.8, r=0.8, 1e6 steps: size-weighted KS of site fitness (restricted to
// >= f_c = 0.3125) against U[f_c, 1] below 0.02 on at least 4 of 5 seeds.
Outcome fitness_marginal() {
  const double p = 0.8, r = 0.8;
  const DerivedConstants dc = derive_constants(p, r);
  int passing = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const FastSimulation sim = run_model(p, r, seed, 1000000);
    const double ks = stats::ks_uniform_fitness(sim.index().sites(), dc, true);
    worst = std::max(worst, ks);
    if (ks < 0.02) ++passing;
  }
  const bool pass = passing >= 4;
  std::ostringstream out;
  out << passing << "/5 seeds with KS(fitness >= " << num(dc.f_c) << " vs uniform) < 0.02 "
      << "(need >= 4); worst KS = " << num(worst);
  return {pass, out.str()};
}

// --- 3. Population below the critical fitness stays negligible -------------
// p=0.8, r=0.8, 1e5 steps: mass below f_c under 2% of the population and no
// site below f_c larger than 3 members, on at least 9 of 10 seeds.
Outcome critical_cutoff() {
  const double p = 0.8, r = 0.8;
  const DerivedConstants dc = derive_constants(p, r);
  int ok_seeds = 0;
  double worst_fraction = 0.0;
  std::uint64_t worst_site = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const FastSimulation sim = run_model(p, r, seed, 100000);
    std::uint64_t below = 0, max_below = 0;
    for (const Site& site : sim.index().sites()) {
      if (site.fitness < dc.f_c) {
        below += site.size;
        max_below = std::max(max_below, site.size);
      }
    }
    const double fraction =
        sim.population() == 0 ? 0.0
                              : static_cast<double>(below) / static_cast<double>(sim.population());
    worst_fraction = std::max(worst_fraction, fraction);
    worst_site = std::max(worst_site, max_below);
    if (fraction < 0.02 && max_below <= 3) ++ok_seeds;
  }
  const bool pass = ok_seeds >= 9;
  std::ostringstream out;
  out << ok_seeds << "/10 seeds with sub-critical mass < 2% and max sub-critical site <= 3 "
      << "(need >= 9); worst mass fraction = " << num(worst_fraction) << ", largest site below "
      << num(dc.f_c) << " = " << worst_site;
  return {pass, out.str()};
}

// --- 4. Power-law tails at c = 1.25 -----------------------------------------
// p=0.8, r=0.4, 5e6 steps, 5 seeds, log-log least squares from k_min=10 over
// all support points: seed-averaged site-proportion exponent within
// 2.25 +- 0.2 and individual-level exponent within 1.25 +- 0.2.
Outcome power_law_tails() {
  const double p = 0.8, r = 0.4;
  const DerivedConstants dc = derive_constants(p, r);
  double site_sum = 0.0, individual_sum = 0.0, worst_site_r2 = 1.0, worst_ind_r2 = 1.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const FastSimulation sim = run_model(p, r, seed, 5000000);
    const SizeHistogram hist = sim.index().size_histogram(0.0);
    const stats::TailFit site_fit = stats::tail_exponent_fit(stats::site_size_pmf(hist), 10);
    const stats::TailFit individual_fit =
        stats::tail_exponent_fit(stats::empirical_measure(sim.index(), 0.0).normalized(), 10);
    site_sum += site_fit.exponent;
    individual_sum += individual_fit.exponent;
    worst_site_r2 = std::min(worst_site_r2, site_fit.r_squared);
    worst_ind_r2 = std::min(worst_ind_r2, individual_fit.r_squared);
  }
  const double site_avg = site_sum / 5.0;
  const double individual_avg = individual_sum / 5.0;
  const double site_target = dc.c + 1.0, individual_target = dc.c;
  const bool pass = std::abs(site_avg - site_target) <= 0.2 &&
                    std::abs(individual_avg - individual_target) <= 0.2;
  std::ostringstream out;
  out << "seed-averaged exponents from k_min=10: site-proportion = " << num(site_avg, "%.3f")
      << " (want " << num(site_target, "%.2f") << " +- 0.2, worst R^2 " << num(worst_site_r2)
      << "), individual = " << num(individual_avg, "%.3f") << " (want "
      << num(individual_target, "%.2f") << " +- 0.2, worst R^2 " << num(worst_ind_r2) << ")";
  return {pass, out.str()};
}

// --- 5. Uniform-inheritance variant converges to a geometric law -----------
// p=0.8, r=0.8 uniform variant, 1e6 steps: TV between the empirical
// site-size distribution and Geometric(11/15) below 0.05 on >= 4/5 seeds.
Outcome uniform_variant() {
  const double p = 0.8, r = 0.8;
  const double q = theory::geometric_variant_param(p, r);  // 0.7333...
  const theory::LimitLaw law = theory::LimitLaw::geometric(q);
  int passing = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const FastSimulation sim = run_model(p, r, seed, 1000000, Variant::uniform);
    const stats::Pmf pmf = stats::site_size_pmf(sim.index().size_histogram(0.0));
    const double tv = stats::tv_distance(pmf, law);
    worst = std::max(worst, tv);
    if (tv < 0.05) ++passing;
  }
  const bool pass = passing >= 4;
  std::ostringstream out;
  out << passing << "/5 seeds with TV(site sizes, Geometric(" << num(q) << ")) < 0.05 "
      << "(need >= 4); worst TV = " << num(worst);
  return {pass, out.str()};
}

// --- 6. Exact population-walk oracles ---------------------------------------
// Monte-Carlo reflected walk matches the exact DP pmf at n=12 within TV
// 0.005 over 1e6 trials, and the DP-exact exceedance P(|T_n/n - gamma| > 0.1)
// is strictly positive, nonincreasing, and log-linearly decreasing on
// n = 100..1000.
Outcome concentration_oracle() {
  const stats::CouplingReport report = stats::coupling_check(0.8, 12, 1000000, 1, 0.1, 1000, 100);
  bool positive = !report.concentration.empty();
  bool nonincreasing = true;
  for (std::size_t i = 0; i < report.concentration.size(); ++i) {
    positive = positive && report.concentration[i].second > 0.0;
    if (i > 0)
      nonincreasing =
          nonincreasing && report.concentration[i].second <= report.concentration[i - 1].second;
  }
  const bool pass =
      report.tv_reflected_dp < 0.005 && positive && nonincreasing && report.log_slope < 0.0;
  std::ostringstream out;
  out << "TV(reflected MC, exact pmf) = " << num(report.tv_reflected_dp) << " at n=12, 1e6 trials "
      << "(< 0.005); exceedance on n=100..1000: " << (positive ? "positive" : "NOT positive")
      << ", " << (nonincreasing ? "nonincreasing" : "NOT nonincreasing")
      << ", log-slope = " << num(report.log_slope) << " (< 0)";
  return {pass, out.str()};
}

// --- 7. Closed-form self-consistency ----------------------------------------
// On a 5x5 transient (p, r) grid and three thresholds above f_c each:
// stationarity residuals < 1e-10 up to K=50, total rho mass 1 within 1e-8,
// the two beta routes within 1e-10, and the beta sum (1-f)/(1-f_c) within
// 1e-8.
Outcome theory_self_consistency() {
  const std::array<double, 5> ps{0.65, 0.70, 0.75, 0.80, 0.85};
  const std::array<double, 5> rs{0.60, 0.70, 0.80, 0.90, 0.95};
  const std::array<double, 3> offsets{0.25, 0.5, 0.75};

  double worst_residual = 0.0, worst_rho = 0.0, worst_route = 0.0, worst_sum = 0.0;
  for (double p : ps)
    for (double r : rs) {
      const DerivedConstants dc = derive_constants(p, r);
      if (dc.regime != Regime::transient)
        return {false, "grid cell p=" + num(p) + ", r=" + num(r) + " is not transient"};
      worst_rho = std::max(worst_rho, std::abs(theory::rho_total_mass(dc.c).value - 1.0));
      for (double t : offsets) {
        const double f = dc.f_c + t * (1.0 - dc.f_c);
        const std::vector<double> residuals = theory::balance_residuals(p, r, f, 50);
        for (double res : residuals) worst_residual = std::max(worst_residual, std::abs(res));
        for (std::uint64_t k = 1; k <= 50; ++k)
          worst_route = std::max(worst_route, std::abs(theory::beta_k(p, r, f, k) -
                                                       theory::beta_k_product_form(p, r, f, k)));
        const double target = (1.0 - f) / (1.0 - dc.f_c);
        worst_sum =
            std::max(worst_sum, std::abs(theory::beta_total_mass(p, r, f).value - target));
      }
    }

  const bool pass = worst_residual < 1e-10 && worst_rho < 1e-8 && worst_route < 1e-10 &&
                    worst_sum < 1e-8;
  std::ostringstream out;
  out << "5x5 grid x 3 thresholds, K=50: max balance residual = " << num(worst_residual)
      << " (< 1e-10); |sum rho - 1| = " << num(worst_rho) << " (< 1e-8); beta route gap = "
      << num(worst_route) << " (< 1e-10); beta sum error = " << num(worst_sum) << " (< 1e-8)";
  return {pass, out.str()};
}

// --- 8. Engineering oracles --------------------------------------------------
// The bucketed index and the flat reference index agree state-for-state over
// 1e4 randomized operations on each of 100 seeds; a snapshot round trip
// resumes bit-exactly; a sweep produces byte-identical summaries regardless
// of worker count.
template <class Index>
void apply_random_op(Index& index, const CounterRng& rng, std::uint64_t& cursor) {
  const std::uint64_t op = rng.word_at(cursor++) % 4;
  if (op == 0 || index.site_count() == 0) {
    double f = unit_from_word(rng.word_at(cursor++));
    while (index.insert_site(f) == InsertOutcome::duplicate_fitness)
      f = unit_from_word(rng.word_at(cursor++));
  } else if (op == 1) {
    const std::uint64_t slot = rng.word_at(cursor++) % index.population();
    index.increment_site(index.site_at_slot(slot).fitness);
  } else if (op == 2) {
    const std::uint64_t rank = rng.word_at(cursor++) % index.site_count();
    index.increment_site(index.site_at_rank(rank).fitness);
  } else {
    index.remove_lowest_member();
  }
}

Outcome engineering_oracles() {
  // Indexed vs reference structure, bit-exact after every seed's 1e4 ops.
  std::uint64_t index_mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    FenwickSiteIndex fast;
    NaiveSiteIndex naive;
    const CounterRng fast_rng(seed, 900), naive_rng(seed, 900);
    std::uint64_t fast_cursor = 0, naive_cursor = 0;
    for (int i = 0; i < 10000; ++i) {
      apply_random_op(fast, fast_rng, fast_cursor);
      apply_random_op(naive, naive_rng, naive_cursor);
    }
    bool same = fast_cursor == naive_cursor && fast.population() == naive.population() &&
                fast.site_count() == naive.site_count();
    if (same) {
      const std::vector<Site> a = fast.sites(), b = naive.sites();
      same = a.size() == b.size();
      for (std::size_t i = 0; same && i < a.size(); ++i)
        same = a[i].fitness == b[i].fitness && a[i].size == b[i].size;
    }
    if (!same) ++index_mismatches;
  }

  // Snapshot round trip: interrupted-and-resumed equals uninterrupted.
  bool resume_exact = true;
  {
    Params params;
    params.p = 0.8;
    params.r = 0.4;
    params.seed = 17;
    FastSimulation full(params, 0);
    full.run(10000);
    FastSimulation head(params, 0);
    head.run(5000);
    const fs::path dir = scratch_dir("snapshot");
    const std::string path = (dir / "snap.txt").string();
    snapshot::save(snapshot::capture(head), path);
    FastSimulation resumed = snapshot::restore<FenwickSiteIndex>(snapshot::load(path));
    resumed.run(5000);
    resume_exact = resumed.population() == full.population() &&
                   resumed.main_counter() == full.main_counter() &&
                   resumed.aux_counter() == full.aux_counter();
    const std::vector<Site> a = full.index().sites(), b = resumed.index().sites();
    resume_exact = resume_exact && a.size() == b.size();
    for (std::size_t i = 0; resume_exact && i < a.size(); ++i)
      resume_exact = a[i].fitness == b[i].fitness && a[i].size == b[i].size;
  }

  // Sweep determinism across worker counts.
  bool sweep_identical = false;
  {
    harness::SweepConfig config;
    config.p_values = {0.7, 0.8};
    config.r_values = {0.7, 0.8};
    config.seeds = {1, 2};
    config.steps = 1000;
    config.out_dir = scratch_dir("sweep_serial").string();
    config.workers = 1;
    const harness::SweepResult serial = harness::sweep(config);
    config.out_dir = scratch_dir("sweep_parallel").string();
    config.workers = 3;
    const harness::SweepResult parallel = harness::sweep(config);
    sweep_identical = serial.all_ok && parallel.all_ok &&
                      read_file(serial.csv_path) == read_file(parallel.csv_path) &&
                      !read_file(serial.csv_path).empty();
  }

  const bool pass = index_mismatches == 0 && resume_exact && sweep_identical;
  std::ostringstream out;
  out << "index equivalence: " << (100 - index_mismatches)
      << "/100 seeds bit-exact over 1e4 ops (need 100); snapshot resume "
      << (resume_exact ? "bit-exact" : "DIVERGED") << "; sweep summaries "
      << (sweep_identical ? "byte-identical across 1 vs 3 workers" : "DIFFER across worker counts");
  return {pass, out.str()};
}

using Check = Outcome (*)();

constexpr std::pair<const char*, Check> kChecks[] = {
    {"individual_limit_law", &individual_limit_law},
    {"fitness_marginal", &fitness_marginal},
    {"critical_cutoff", &critical_cutoff},
    {"power_law_tails", &power_law_tails},
    {"uniform_variant", &uniform_variant},
    {"concentration_oracle", &concentration_oracle},
    {"theory_self_consistency", &theory_self_consistency},
    {"engineering_oracles", &engineering_oracles},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> requested;
  for (int i = 1; i < argc; ++i) requested.emplace_back(argv[i]);
  if (requested.empty())
    for (const auto& [name, check] : kChecks) requested.emplace_back(name);

  bool all_pass = true;
  for (const std::string& name : requested) {
    const auto* entry = std::find_if(std::begin(kChecks), std::end(kChecks),
                                     [&name](const auto& e) { return name == e.first; });
    if (entry == std::end(kChecks)) {
      std::fprintf(stderr, "unknown check '%s'; available:\n", name.c_str());
      for (const auto& [known, check] : kChecks) std::fprintf(stderr, "  %s\n", known);
      return 2;
    }
    Outcome outcome;
    try {
      outcome = entry->second();
    } catch (const std::exception& err) {
      outcome = {false, std::string("exception: ") + err.what()};
    }
    std::printf("%s %s: %s\n", outcome.pass ? "PASS" : "FAIL", name.c_str(),
                outcome.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && outcome.pass;
  }
  return all_pass ? 0 : 1;
}
