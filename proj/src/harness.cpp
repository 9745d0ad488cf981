#include "fitsim/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fitsim/snapshot.hpp"
#include "fitsim/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fitsim {
namespace harness {

namespace {

std::string fmt(const char* spec, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, value);
  return buf;
}

json params_json(const Params& params) {
  return json{{"p", params.p},
              {"r", params.r},
              {"variant", to_string(params.variant)},
              {"seed", params.seed}};
}

json run_config_json(const RunConfig& config, const Params& effective) {
  json out = params_json(effective);
  out["initial_population"] = config.initial_population;
  out["steps"] = config.steps;
  out["snapshot_every"] = config.snapshot_every;
  out["f_grid"] = config.f_grid;
  out["log_events"] = config.log_events;
  out["resume_from"] = config.resume_from;
  out["out"] = config.out_dir;
  return out;
}

// Every CSV leads with its generating configuration, then the column header.
std::ofstream open_csv(const fs::path& path, const json& echo, const char* columns) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "# config " << echo.dump() << '\n' << columns << '\n';
  return out;
}

void write_size_histogram(const fs::path& path, const json& echo, const SizeHistogram& hist) {
  std::ofstream out = open_csv(path, echo, "k,count");
  for (const auto& [k, count] : hist) out << k << ',' << count << '\n';
  if (!out.flush()) throw std::runtime_error("write to " + path.string() + " failed");
}

json derived_json(const DerivedConstants& dc) {
  return json{{"gamma", dc.gamma}, {"f_c", dc.f_c}, {"c", dc.c}, {"regime", to_string(dc.regime)}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out.flush()) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace

void RunConfig::validate() const {
  // On resume the snapshot carries the authoritative parameters.
  if (resume_from.empty()) params.validate();
  if (!resume_from.empty() && initial_population != 0)
    throw std::invalid_argument("RunConfig: resume_from excludes initial_population");
  for (double f : f_grid)
    if (!(f >= 0.0 && f <= 1.0))
      throw std::invalid_argument("RunConfig: f thresholds must lie in [0, 1]");
  if (out_dir.empty()) throw std::invalid_argument("RunConfig: output directory required");
}

RunResult simulate_run(const RunConfig& config) {
  config.validate();
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);

  std::optional<FastSimulation> sim;
  if (!config.resume_from.empty()) {
    sim.emplace(snapshot::restore<FenwickSiteIndex>(snapshot::load(config.resume_from)));
  } else {
    sim.emplace(config.params, config.initial_population);
  }
  const json echo = run_config_json(config, sim->params());

  std::vector<double> f_grid = config.f_grid;
  if (f_grid.empty()) {
    const DerivedConstants& dc = sim->constants();
    f_grid = dc.regime == Regime::transient
                 ? std::vector<double>{0.0, dc.f_c, (1.0 + dc.f_c) / 2.0}
                 : std::vector<double>{0.0};
  }
  std::sort(f_grid.begin(), f_grid.end());
  f_grid.erase(std::unique(f_grid.begin(), f_grid.end()), f_grid.end());

  std::ofstream events;
  std::vector<FastSimulation::Observer> observers;
  if (config.log_events) {
    events = open_csv(dir / "events.csv", echo, "n,kind,fitness,T");
    observers.push_back([&events](const EventRecord& ev, const FastSimulation&) {
      events << ev.step << ',' << to_string(ev.kind) << ',' << fmt("%.17g", ev.fitness) << ','
             << ev.population_after << '\n';
    });
  }

  std::vector<std::string> periodic;
  const std::uint64_t target = sim->step_count() + config.steps;
  while (sim->step_count() < target) {
    std::uint64_t chunk = target - sim->step_count();
    if (config.snapshot_every > 0)
      chunk = std::min(chunk, config.snapshot_every - sim->step_count() % config.snapshot_every);
    sim->run(chunk, observers);
    if (config.snapshot_every > 0 && sim->step_count() % config.snapshot_every == 0 &&
        sim->step_count() < target) {
      std::string name = "snapshot_" + std::to_string(sim->step_count()) + ".txt";
      snapshot::save(snapshot::capture(*sim), (dir / name).string());
      periodic.push_back(std::move(name));
    }
  }
  if (config.log_events && !events.flush())
    throw std::runtime_error("write to events.csv failed");

  snapshot::save(snapshot::capture(*sim), (dir / "snapshot_final.txt").string());

  json histogram_files = json::object();
  for (double f : f_grid) {
    const std::string name = "size_histogram_f" + fmt("%.6g", f) + ".csv";
    write_size_histogram(dir / name, echo, sim->index().size_histogram(f));
    histogram_files[fmt("%.6g", f)] = name;
  }

  {
    std::array<std::uint64_t, 100> bins{};
    for (const Site& site : sim->index().sites()) {
      const auto bin = std::min<std::size_t>(static_cast<std::size_t>(site.fitness * 100.0), 99);
      bins[bin] += site.size;
    }
    std::ofstream out = open_csv(dir / "fitness_bins.csv", echo, "fitness_bin,count");
    for (std::size_t i = 0; i < bins.size(); ++i)
      out << fmt("%.2f", static_cast<double>(i) / 100.0) << ',' << bins[i] << '\n';
    if (!out.flush()) throw std::runtime_error("write to fitness_bins.csv failed");
  }

  json manifest{
      {"config", echo},
      {"derived", derived_json(sim->constants())},
      {"results",
       {{"steps", sim->step_count()},
        {"population", sim->population()},
        {"sites", sim->site_count()},
        {"main_counter", sim->main_counter()},
        {"aux_counter", sim->aux_counter()}}},
      {"artifacts",
       {{"snapshot_final", "snapshot_final.txt"},
        {"periodic_snapshots", periodic},
        {"size_histograms", histogram_files},
        {"fitness_bins", "fitness_bins.csv"},
        {"events", config.log_events ? json("events.csv") : json(nullptr)}}},
  };
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  RunResult result;
  result.steps = sim->step_count();
  result.population = sim->population();
  result.site_count = sim->site_count();
  result.f_grid = std::move(f_grid);
  result.manifest_path = (dir / "manifest.json").string();
  result.snapshot_path = (dir / "snapshot_final.txt").string();
  return result;
}

CompareResult compare_run(const CompareConfig& config) {
  if (config.run_dir.empty()) throw std::invalid_argument("compare: run directory required");
  if (!(config.f >= 0.0 && config.f <= 1.0))
    throw std::domain_error("compare: f must lie in [0, 1]");
  if (config.max_k == 0) throw std::invalid_argument("compare: max_k must be >= 1");
  const fs::path run_dir(config.run_dir);
  const fs::path manifest_path = run_dir / "manifest.json";
  const fs::path snapshot_path = run_dir / "snapshot_final.txt";
  if (!fs::exists(manifest_path) || !fs::exists(snapshot_path))
    throw std::runtime_error("compare: " + config.run_dir +
                             " lacks manifest.json or snapshot_final.txt");
  json manifest;
  {
    std::ifstream in(manifest_path);
    in >> manifest;
    if (!in) throw std::runtime_error("compare: cannot parse " + manifest_path.string());
  }
  const snapshot::SnapshotData snap = snapshot::load(snapshot_path.string());
  const DerivedConstants dc = derive_constants(snap.p, snap.r);
  if (dc.regime != Regime::transient)
    throw std::domain_error("compare: run is not transient, no limit law to compare against");

  SizeHistogram hist;
  for (const Site& site : snap.sites)
    if (site.fitness >= config.f) ++hist[site.size];
  const stats::EmpiricalMeasure emp =
      stats::make_empirical_measure(hist, snap.population, config.f);
  const theory::LimitLaw law = theory::LimitLaw::individual_sizes(dc.c);

  CompareResult result;
  result.population = snap.population;
  result.site_count = snap.sites.size();
  stats::Pmf emp_pmf;
  if (emp.delta_zero() || hist.empty()) {
    result.tv = 1.0;  // all empirical mass sits outside the limit's support
  } else {
    emp_pmf = emp.normalized();
    result.tv = stats::tv_distance(emp_pmf, law);
  }
  result.ks = snap.sites.empty()
                  ? std::numeric_limits<double>::quiet_NaN()
                  : stats::ks_uniform_fitness(snap.sites, dc, true);
  result.theory_tail = law.ccdf(config.max_k);

  const fs::path out_dir = config.out_dir.empty() ? run_dir : fs::path(config.out_dir);
  fs::create_directories(out_dir);
  json echo{{"run_dir", config.run_dir}, {"f", config.f},      {"max_k", config.max_k},
            {"tv_max", config.tv_max},  {"ks_max", config.ks_max},
            {"p", snap.p},              {"r", snap.r},         {"seed", snap.seed}};
  {
    std::ofstream out = open_csv(out_dir / "compare.csv", echo, "k,emp,theory,percent_error");
    for (std::uint64_t k = 1; k <= config.max_k; ++k) {
      const double e = emp_pmf.at(k);
      const double t = theory::rho_k(dc.c, k);
      out << k << ',' << fmt("%.12g", e) << ',' << fmt("%.12g", t) << ','
          << fmt("%.6g", stats::percent_error(e, t)) << '\n';
    }
    if (!out.flush()) throw std::runtime_error("write to compare.csv failed");
  }

  result.assertions_passed = (config.tv_max < 0.0 || result.tv <= config.tv_max) &&
                             (config.ks_max < 0.0 || !(result.ks > config.ks_max));
  json summary{
      {"config", echo},
      {"run_config", manifest.contains("config") ? manifest["config"] : json(nullptr)},
      {"tv", result.tv},
      {"ks", std::isnan(result.ks) ? json(nullptr) : json(result.ks)},
      {"theory_tail_beyond_k", result.theory_tail},
      {"population", result.population},
      {"sites", result.site_count},
      {"assertions_passed", result.assertions_passed},
  };
  write_text(out_dir / "compare_summary.json", summary.dump(2) + "\n");
  result.csv_path = (out_dir / "compare.csv").string();
  result.summary_path = (out_dir / "compare_summary.json").string();
  return result;
}

std::vector<TheoryRow> theory_table(double p, double r, double f, std::uint64_t max_k) {
  const DerivedConstants dc = derive_constants(p, r);
  if (dc.regime != Regime::transient)
    throw std::domain_error("theory_table: requires a transient (p, r)");
  if (!(f > dc.f_c && f <= 1.0))
    throw std::domain_error("theory_table: f must lie in (f_c, 1], f_c = " + fmt("%g", dc.f_c));
  if (max_k == 0) throw std::invalid_argument("theory_table: max_k must be >= 1");
  std::vector<TheoryRow> rows;
  rows.reserve(max_k);
  for (std::uint64_t k = 1; k <= max_k; ++k)
    rows.push_back(TheoryRow{k, theory::beta_k(p, r, f, k), theory::rho_k(dc.c, k),
                             theory::site_proportion_pmf(dc.c, k)});
  return rows;
}

void write_theory_csv(const std::vector<TheoryRow>& rows, double p, double r, double f,
                      std::ostream& out) {
  const json echo{{"p", p}, {"r", r}, {"f", f}, {"max_k", rows.size()}};
  out << "# config " << echo.dump() << '\n' << "k,beta_k,rho_k,site_proportion\n";
  for (const TheoryRow& row : rows)
    out << row.k << ',' << fmt("%.12g", row.beta_k) << ',' << fmt("%.12g", row.rho_k) << ','
        << fmt("%.12g", row.site_proportion) << '\n';
}

void SweepConfig::validate() const {
  if (p_values.empty() || r_values.empty() || seeds.empty())
    throw std::invalid_argument("sweep: p, r, and seed lists must be non-empty");
  if (out_dir.empty()) throw std::invalid_argument("sweep: output directory required");
  if (workers == 0) throw std::invalid_argument("sweep: workers must be >= 1");
  for (double p : p_values)
    for (double r : r_values) {
      Params params;
      params.p = p;
      params.r = r;
      params.validate();
      if (!allow_recurrent && derive_constants(p, r).regime != Regime::transient)
        throw std::invalid_argument(
            "sweep: p=" + fmt("%g", p) + ", r=" + fmt("%g", r) +
            " is recurrent (p*r <= 1-p); pass allow_recurrent to sweep such cells");
    }
}

SweepResult sweep(const SweepConfig& config) {
  config.validate();
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);

  SweepResult result;
  for (double p : config.p_values)
    for (double r : config.r_values)
      for (std::uint64_t seed : config.seeds) {
        SweepCell cell;
        cell.p = p;
        cell.r = r;
        cell.seed = seed;
        cell.regime = derive_constants(p, r).regime;
        cell.tv = std::numeric_limits<double>::quiet_NaN();
        cell.ks = std::numeric_limits<double>::quiet_NaN();
        result.cells.push_back(cell);
      }

  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t at = cursor.fetch_add(1);
      if (at >= result.cells.size()) return;
      SweepCell& cell = result.cells[at];
      try {
        RunConfig run;
        run.params.p = cell.p;
        run.params.r = cell.r;
        run.params.seed = cell.seed;
        run.params.variant = config.variant;
        run.steps = config.steps;
        run.f_grid = {0.0};
        run.out_dir =
            (dir / ("cell_p" + fmt("%g", cell.p) + "_r" + fmt("%g", cell.r) + "_s" +
                    std::to_string(cell.seed)))
                .string();
        const RunResult done = simulate_run(run);
        cell.population = done.population;
        cell.site_count = done.site_count;
        if (cell.regime == Regime::transient) {
          CompareConfig cmp;
          cmp.run_dir = run.out_dir;
          cmp.f = 0.0;
          const CompareResult compared = compare_run(cmp);
          cell.tv = compared.tv;
          cell.ks = compared.ks;
        }
        cell.ok = true;
      } catch (const std::exception& err) {
        cell.ok = false;
        cell.error = err.what();
      }
    }
  };
  const unsigned thread_count =
      std::min<std::size_t>(config.workers, result.cells.size());
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (unsigned i = 0; i < thread_count; ++i) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }

  // Worker count and output location are execution details: the merged CSV
  // must be byte-identical for the same sweep regardless of either.
  const json echo{{"p_values", config.p_values},
                  {"r_values", config.r_values},
                  {"seeds", config.seeds},
                  {"steps", config.steps},
                  {"variant", to_string(config.variant)},
                  {"allow_recurrent", config.allow_recurrent}};
  std::ofstream out =
      open_csv(dir / "sweep_summary.csv", echo,
               "p,r,seed,regime,status,population,sites,tv,ks");
  for (const SweepCell& cell : result.cells) {
    out << fmt("%.12g", cell.p) << ',' << fmt("%.12g", cell.r) << ',' << cell.seed << ','
        << to_string(cell.regime) << ',' << (cell.ok ? "ok" : "failed") << ',';
    if (cell.ok) {
      out << cell.population << ',' << cell.site_count << ',';
      out << (std::isnan(cell.tv) ? "" : fmt("%.12g", cell.tv)) << ','
          << (std::isnan(cell.ks) ? "" : fmt("%.12g", cell.ks));
    } else {
      out << ",,,";
    }
    out << '\n';
    result.all_ok = result.all_ok && cell.ok;
  }
  if (!out.flush()) throw std::runtime_error("write to sweep_summary.csv failed");
  result.csv_path = (dir / "sweep_summary.csv").string();
  return result;
}

stats::CouplingReport lemma_check(const LemmaConfig& config) {
  if (config.out_dir.empty()) throw std::invalid_argument("lemma_check: output directory required");
  const stats::CouplingReport report = stats::coupling_check(
      config.p, config.n, config.trials, config.seed, config.epsilon, config.grid_max,
      config.grid_step);
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  const json echo{{"p", config.p},           {"n", config.n},
                  {"trials", config.trials}, {"epsilon", config.epsilon},
                  {"seed", config.seed},     {"grid_max", config.grid_max},
                  {"grid_step", config.grid_step}};
  {
    std::ofstream out = open_csv(dir / "concentration.csv", echo, "n,P_exceed");
    for (const auto& [n, prob] : report.concentration)
      out << n << ',' << fmt("%.12g", prob) << '\n';
    if (!out.flush()) throw std::runtime_error("write to concentration.csv failed");
  }
  const json summary{{"config", echo},
                     {"tv_reflected_dp", report.tv_reflected_dp},
                     {"tv_chain_dp", report.tv_chain_dp},
                     {"tv_chain_reflected", report.tv_chain_reflected},
                     {"log_slope", report.log_slope}};
  write_text(dir / "lemma_summary.json", summary.dump(2) + "\n");
  return report;
}

}  // namespace harness
}  // namespace fitsim
