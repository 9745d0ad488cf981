#pragma once

// Run orchestration: configured single runs with on-disk artifacts
// (manifest, snapshots, histograms), comparison of a finished run against
// the closed-form limits, theory tables, deterministic parameter sweeps,
// and the exact-oracle concentration check. Every artifact embeds the
// generating configuration; CSV schemas are fixed.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fitsim/model.hpp"
#include "fitsim/stats.hpp"

namespace fitsim {
namespace harness {

struct RunConfig {
  Params params;
  std::uint64_t initial_population = 0;
  std::uint64_t steps = 0;
  std::uint64_t snapshot_every = 0;  // 0: terminal snapshot only
  // Histogram thresholds; empty selects {0, f_c, (1+f_c)/2} when transient
  // and {0} otherwise.
  std::vector<double> f_grid;
  std::string out_dir;
  bool log_events = false;
  std::string resume_from;  // snapshot path; excludes initial_population

  void validate() const;
};

struct RunResult {
  std::uint64_t steps = 0;
  std::uint64_t population = 0;
  std::uint64_t site_count = 0;
  std::vector<double> f_grid;
  std::string manifest_path;
  std::string snapshot_path;
};

/// Runs the model and writes manifest.json, snapshot_final.txt, periodic
/// snapshots, size_histogram_f*.csv per threshold, fitness_bins.csv, and
/// events.csv when requested.
RunResult simulate_run(const RunConfig& config);

struct CompareConfig {
  std::string run_dir;  // must contain manifest.json and snapshot_final.txt
  double f = 0.0;
  std::uint64_t max_k = 50;
  double tv_max = -1.0;  // negative: no assertion
  double ks_max = -1.0;
  std::string out_dir;  // empty: write next to the run artifacts
};

struct CompareResult {
  double tv = 0.0;
  double ks = 0.0;
  double theory_tail = 0.0;  // limit-law mass beyond max_k
  std::uint64_t population = 0;
  std::uint64_t site_count = 0;
  bool assertions_passed = true;
  std::string csv_path;
  std::string summary_path;
};

/// Loads a finished run, emits compare.csv (k,emp,theory,percent_error for
/// k <= max_k) and compare_summary.json with the TV and KS statistics.
CompareResult compare_run(const CompareConfig& config);

struct TheoryRow {
  std::uint64_t k;
  double beta_k;
  double rho_k;
  double site_proportion;
};

/// Closed-form table for k = 1..max_k; requires a transient (p, r) and a
/// threshold f in (f_c, 1] (where the beta coefficients are defined).
[[nodiscard]] std::vector<TheoryRow> theory_table(double p, double r, double f,
                                                  std::uint64_t max_k);

void write_theory_csv(const std::vector<TheoryRow>& rows, double p, double r, double f,
                      std::ostream& out);

struct SweepConfig {
  std::vector<double> p_values;
  std::vector<double> r_values;
  std::vector<std::uint64_t> seeds;
  std::uint64_t steps = 0;
  Variant variant = Variant::proportional;
  std::string out_dir;
  unsigned workers = 1;
  // Positive-recurrent and null-recurrent cells are rejected up front unless
  // set; such cells then report population statistics only.
  bool allow_recurrent = false;

  void validate() const;
};

struct SweepCell {
  double p = 0.0;
  double r = 0.0;
  std::uint64_t seed = 0;
  Regime regime = Regime::transient;
  bool ok = false;
  std::string error;
  std::uint64_t population = 0;
  std::uint64_t site_count = 0;
  double tv = 0.0;  // NaN when not computed (recurrent cell or failure)
  double ks = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // ordered by (p, r, seed)
  std::string csv_path;
  bool all_ok = true;
};

/// Runs the full grid x seed ensemble (workers share nothing; merged output
/// order is deterministic) and writes sweep_summary.csv plus one run
/// directory per cell.
SweepResult sweep(const SweepConfig& config);

struct LemmaConfig {
  double p = 0.8;
  std::uint64_t n = 12;
  std::uint64_t trials = 100000;
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  std::uint64_t grid_max = 1000;
  std::uint64_t grid_step = 100;
  std::string out_dir;
};

/// Runs the coupling check and writes concentration.csv (n,P_exceed) and
/// lemma_summary.json with the Monte-Carlo-vs-oracle TV table.
stats::CouplingReport lemma_check(const LemmaConfig& config);

}  // namespace harness
}  // namespace fitsim
