// fitsim: simulate the fitness-driven preferential-attachment population
// model, compare runs against the closed-form limit laws, emit theory
// tables, sweep parameter grids, and check the exact concentration oracle.
//
// Exit codes: 0 success, 1 validation error, 2 runtime error,
// 3 failed comparison assertion.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fitsim/harness.hpp"
#include "fitsim/model.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitAssertion = 3;

struct SimulateOptions {
  fitsim::harness::RunConfig run;
  std::string variant = "proportional";
};

void print_run(const fitsim::harness::RunResult& result) {
  std::printf("run complete: steps=%llu population=%llu sites=%llu manifest=%s\n",
              static_cast<unsigned long long>(result.steps),
              static_cast<unsigned long long>(result.population),
              static_cast<unsigned long long>(result.site_count), result.manifest_path.c_str());
}

void add_run_options(CLI::App* cmd, SimulateOptions& opts, bool fresh_run) {
  if (fresh_run) {
    cmd->add_option("--p", opts.run.params.p, "Birth probability")->capture_default_str();
    cmd->add_option("--r", opts.run.params.r, "Mutation probability given birth")
        ->capture_default_str();
    cmd->add_option("--seed", opts.run.params.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--variant", opts.variant, "Inheritance variant")
        ->check(CLI::IsMember({"proportional", "uniform"}))
        ->capture_default_str();
    cmd->add_option("--t0", opts.run.initial_population, "Founding population size");
  }
  cmd->add_option("--steps", opts.run.steps, "Number of steps to run")->required();
  cmd->add_option("--snapshot-every", opts.run.snapshot_every,
                  "Write a snapshot every N steps (0: final only)");
  cmd->add_option("--f", opts.run.f_grid,
                  "Fitness threshold(s) for size histograms (default: 0, f_c, midpoint)");
  cmd->add_option("--out", opts.run.out_dir, "Output directory")->required();
  cmd->add_flag("--events", opts.run.log_events, "Write the per-step event log");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fitness-driven preferential-attachment model toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a config file (section per subcommand)");

  SimulateOptions sim_opts;
  CLI::App* simulate = app.add_subcommand("simulate", "Run the model and write artifacts");
  add_run_options(simulate, sim_opts, true);

  SimulateOptions resume_opts;
  CLI::App* resume = app.add_subcommand("resume", "Continue a run from a snapshot");
  resume->add_option("--from", resume_opts.run.resume_from, "Snapshot file to resume from")
      ->required()
      ->check(CLI::ExistingFile);
  add_run_options(resume, resume_opts, false);

  fitsim::harness::CompareConfig cmp;
  CLI::App* compare = app.add_subcommand("compare", "Compare a finished run with the limit law");
  compare->add_option("--run", cmp.run_dir, "Run directory (manifest + final snapshot)")
      ->required();
  compare->add_option("--f", cmp.f, "Fitness threshold")->capture_default_str();
  compare->add_option("--K,--max-k", cmp.max_k, "Rows in the comparison table")
      ->capture_default_str();
  compare->add_option("--out", cmp.out_dir, "Output directory (default: the run directory)");
  compare->add_option("--assert-tv", cmp.tv_max, "Fail (exit 3) if TV exceeds this");
  compare->add_option("--assert-ks", cmp.ks_max, "Fail (exit 3) if KS exceeds this");

  struct {
    double p = 0.8;
    double r = 0.8;
    double f = -1.0;  // sentinel: midpoint of [f_c, 1]
    std::uint64_t max_k = 100;
    std::string out = "-";
  } theory_opts;
  CLI::App* theory = app.add_subcommand("theory", "Emit the closed-form limit table as CSV");
  theory->add_option("--p", theory_opts.p, "Birth probability")->capture_default_str();
  theory->add_option("--r", theory_opts.r, "Mutation probability given birth")
      ->capture_default_str();
  theory->add_option("--f", theory_opts.f,
                     "Fitness threshold in (f_c, 1] (default: midpoint of [f_c, 1])");
  theory->add_option("--K,--max-k", theory_opts.max_k, "Rows in the table")->capture_default_str();
  theory->add_option("--out", theory_opts.out, "Output file ('-' for stdout)")
      ->capture_default_str();

  fitsim::harness::SweepConfig sweep_cfg;
  std::string sweep_variant = "proportional";
  CLI::App* sweep = app.add_subcommand("sweep", "Run a (p, r) grid across seeds");
  sweep->add_option("--p", sweep_cfg.p_values, "Birth probabilities")->required();
  sweep->add_option("--r", sweep_cfg.r_values, "Mutation probabilities")->required();
  sweep->add_option("--seeds", sweep_cfg.seeds, "Seeds (one run per grid cell per seed)")
      ->required();
  sweep->add_option("--steps", sweep_cfg.steps, "Steps per run")->required();
  sweep->add_option("--variant", sweep_variant, "Inheritance variant")
      ->check(CLI::IsMember({"proportional", "uniform"}))
      ->capture_default_str();
  sweep->add_option("--out", sweep_cfg.out_dir, "Output directory")->required();
  sweep->add_option("--workers", sweep_cfg.workers, "Parallel run workers")
      ->capture_default_str();
  sweep->add_flag("--allow-recurrent", sweep_cfg.allow_recurrent,
                  "Accept recurrent grid cells (they report population statistics only)");

  fitsim::harness::LemmaConfig lemma;
  CLI::App* lemma_check = app.add_subcommand(
      "lemma-check", "Exact-oracle concentration and coupling check of the population walk");
  lemma_check->add_option("--p", lemma.p, "Birth probability")->capture_default_str();
  lemma_check->add_option("--n", lemma.n, "Walk length for the Monte Carlo comparison")
      ->capture_default_str();
  lemma_check->add_option("--trials", lemma.trials, "Monte Carlo trials")->capture_default_str();
  lemma_check->add_option("--epsilon", lemma.epsilon, "Concentration band half-width")
      ->capture_default_str();
  lemma_check->add_option("--seed", lemma.seed, "RNG seed")->capture_default_str();
  lemma_check->add_option("--grid-max", lemma.grid_max, "Largest n on the concentration curve")
      ->capture_default_str();
  lemma_check->add_option("--grid-step", lemma.grid_step, "Concentration curve step")
      ->capture_default_str();
  lemma_check->add_option("--out", lemma.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitValidation;
  }

  try {
    if (simulate->parsed()) {
      sim_opts.run.params.variant = fitsim::variant_from_string(sim_opts.variant);
      print_run(fitsim::harness::simulate_run(sim_opts.run));
      return kExitOk;
    }
    if (resume->parsed()) {
      print_run(fitsim::harness::simulate_run(resume_opts.run));
      return kExitOk;
    }
    if (compare->parsed()) {
      const fitsim::harness::CompareResult result = fitsim::harness::compare_run(cmp);
      std::printf("tv=%.6g ks=%.6g theory_tail_beyond_k=%.6g summary=%s\n", result.tv, result.ks,
                  result.theory_tail, result.summary_path.c_str());
      if (!result.assertions_passed) {
        std::fprintf(stderr, "comparison assertions failed\n");
        return kExitAssertion;
      }
      return kExitOk;
    }
    if (theory->parsed()) {
      if (theory_opts.f < 0.0) {
        const fitsim::DerivedConstants dc =
            fitsim::derive_constants(theory_opts.p, theory_opts.r);
        if (dc.regime != fitsim::Regime::transient)
          throw std::domain_error("theory: requires a transient (p, r)");
        theory_opts.f = (1.0 + dc.f_c) / 2.0;
      }
      const auto rows = fitsim::harness::theory_table(theory_opts.p, theory_opts.r, theory_opts.f,
                                                      theory_opts.max_k);
      if (theory_opts.out == "-") {
        fitsim::harness::write_theory_csv(rows, theory_opts.p, theory_opts.r, theory_opts.f,
                                          std::cout);
      } else {
        std::ofstream out(theory_opts.out, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + theory_opts.out + " for writing");
        fitsim::harness::write_theory_csv(rows, theory_opts.p, theory_opts.r, theory_opts.f, out);
        if (!out.flush()) throw std::runtime_error("write to " + theory_opts.out + " failed");
      }
      return kExitOk;
    }
    if (sweep->parsed()) {
      sweep_cfg.variant = fitsim::variant_from_string(sweep_variant);
      const fitsim::harness::SweepResult result = fitsim::harness::sweep(sweep_cfg);
      std::size_t failed = 0;
      for (const auto& cell : result.cells)
        if (!cell.ok) {
          ++failed;
          std::fprintf(stderr, "cell p=%g r=%g seed=%llu failed: %s\n", cell.p, cell.r,
                       static_cast<unsigned long long>(cell.seed), cell.error.c_str());
        }
      std::printf("sweep complete: %zu cells, %zu failed, summary=%s\n", result.cells.size(),
                  failed, result.csv_path.c_str());
      return result.all_ok ? kExitOk : kExitRuntime;
    }
    if (lemma_check->parsed()) {
      const fitsim::stats::CouplingReport report = fitsim::harness::lemma_check(lemma);
      std::printf(
          "tv_reflected_dp=%.6g tv_chain_dp=%.6g tv_chain_reflected=%.6g log_slope=%.6g\n",
          report.tv_reflected_dp, report.tv_chain_dp, report.tv_chain_reflected,
          report.log_slope);
      return kExitOk;
    }
    throw std::logic_error("no subcommand dispatched");
  } catch (const std::invalid_argument& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitValidation;
  } catch (const std::domain_error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitValidation;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitRuntime;
  }
}
