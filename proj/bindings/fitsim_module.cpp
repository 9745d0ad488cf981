// Python bindings for the core operations: running the model, reading its
// state, the closed-form limit laws, the comparison statistics, and the
// on-disk run/compare/sweep orchestration.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "fitsim/harness.hpp"
#include "fitsim/model.hpp"
#include "fitsim/snapshot.hpp"
#include "fitsim/stats.hpp"
#include "fitsim/theory.hpp"

namespace py = pybind11;
using namespace fitsim;

namespace {

Params make_params(double p, double r, std::uint64_t seed, const std::string& variant) {
  Params params;
  params.p = p;
  params.r = r;
  params.seed = seed;
  params.variant = variant_from_string(variant);
  return params;
}

py::dict run_result_dict(const harness::RunResult& result) {
  py::dict out;
  out["steps"] = result.steps;
  out["population"] = result.population;
  out["site_count"] = result.site_count;
  out["f_grid"] = result.f_grid;
  out["manifest_path"] = result.manifest_path;
  out["snapshot_path"] = result.snapshot_path;
  return out;
}

}  // namespace

PYBIND11_MODULE(_fitsim, m) {
  m.doc() =
      "Fitness-driven preferential-attachment population model: simulator, "
      "closed-form limit laws, and comparison statistics.";

  py::class_<DerivedConstants>(m, "DerivedConstants")
      .def_readonly("gamma", &DerivedConstants::gamma)
      .def_readonly("f_c", &DerivedConstants::f_c)
      .def_readonly("c", &DerivedConstants::c)
      .def_property_readonly(
          "regime", [](const DerivedConstants& d) { return std::string(to_string(d.regime)); })
      .def("__repr__", [](const DerivedConstants& d) {
        return "DerivedConstants(gamma=" + std::to_string(d.gamma) +
               ", f_c=" + std::to_string(d.f_c) + ", c=" + std::to_string(d.c) +
               ", regime='" + to_string(d.regime) + "')";
      });

  m.def(
      "derive_constants", [](double p, double r) { return derive_constants(p, r); }, py::arg("p"),
      py::arg("r"), "Drift gamma, critical fitness f_c, tail index c, and the regime.");

  py::class_<Site>(m, "Site")
      .def_readonly("fitness", &Site::fitness)
      .def_readonly("size", &Site::size)
      .def("__repr__", [](const Site& s) {
        return "Site(fitness=" + std::to_string(s.fitness) + ", size=" + std::to_string(s.size) +
               ")";
      });

  py::class_<FastSimulation>(m, "Simulation")
      .def(py::init([](double p, double r, std::uint64_t seed, const std::string& variant,
                       std::uint64_t initial_population) {
             return FastSimulation(make_params(p, r, seed, variant), initial_population);
           }),
           py::arg("p") = 0.8, py::arg("r") = 0.8, py::arg("seed") = 0,
           py::arg("variant") = "proportional", py::arg("initial_population") = 0)
      .def("run", [](FastSimulation& sim, std::uint64_t steps) { sim.run(steps); },
           py::arg("steps"), "Advance the chain by `steps` steps.")
      .def_property_readonly("population", &FastSimulation::population)
      .def_property_readonly("site_count", &FastSimulation::site_count)
      .def_property_readonly("step_count", &FastSimulation::step_count)
      .def_property_readonly("constants",
                             [](const FastSimulation& sim) { return sim.constants(); })
      .def_property_readonly("seed",
                             [](const FastSimulation& sim) { return sim.params().seed; })
      .def("sites", [](const FastSimulation& sim) { return sim.index().sites(); },
           "All sites as (fitness, size), ascending in fitness.")
      .def("size_histogram",
           [](const FastSimulation& sim, double f) { return sim.index().size_histogram(f); },
           py::arg("f") = 0.0, "Map size -> number of sites with fitness >= f.")
      .def("empirical_pmf",
           [](const FastSimulation& sim, double f) {
             return stats::empirical_measure(sim.index(), f).normalized().mass;
           },
           py::arg("f") = 0.0,
           "Renormalized individual-level size distribution; entry i is mass at size i+1.")
      .def("save_snapshot",
           [](const FastSimulation& sim, const std::string& path) {
             snapshot::save(snapshot::capture(sim), path);
           },
           py::arg("path"))
      .def_static("resume",
                  [](const std::string& path) {
                    return snapshot::restore<FenwickSiteIndex>(snapshot::load(path));
                  },
                  py::arg("path"), "Rebuild a simulation from a snapshot file.")
      .def("__repr__", [](const FastSimulation& sim) {
        return "Simulation(p=" + std::to_string(sim.params().p) +
               ", r=" + std::to_string(sim.params().r) + ", step=" +
               std::to_string(sim.step_count()) + ", population=" +
               std::to_string(sim.population()) + ")";
      });

  // Closed forms.
  m.def("rho_k", &theory::rho_k, py::arg("c"), py::arg("k"),
        "Individual-level limit pmf of site sizes.");
  m.def("rho_ccdf", &theory::rho_ccdf, py::arg("c"), py::arg("k"));
  m.def("rho_pmf_table",
        [](double c, std::uint64_t max_k) {
          return theory::LimitLaw::individual_sizes(c).pmf_table(max_k);
        },
        py::arg("c"), py::arg("max_k"));
  m.def("beta_k", &theory::beta_k, py::arg("p"), py::arg("r"), py::arg("f"), py::arg("k"),
        "Limit of the empirical measure at threshold f.");
  m.def("site_proportion_pmf", &theory::site_proportion_pmf, py::arg("c"), py::arg("k"));
  m.def("yule_simon_pmf", &theory::yule_simon_pmf, py::arg("rho"), py::arg("k"));
  m.def("fitness_marginal_cdf", &theory::fitness_marginal_cdf, py::arg("p"), py::arg("r"),
        py::arg("f"), "CDF of the limiting fitness marginal (uniform on [f_c, 1]).");
  m.def("geometric_variant_param", &theory::geometric_variant_param, py::arg("p"), py::arg("r"),
        "Geometric site-size parameter of the uniform-inheritance variant.");
  m.def("balance_residuals", &theory::balance_residuals, py::arg("p"), py::arg("r"), py::arg("f"),
        py::arg("max_k"), "Stationarity balance residuals for k = 1..max_k.");

  // Comparison statistics.
  m.def("tv_to_individual_limit",
        [](const FastSimulation& sim, double f) {
          const stats::EmpiricalMeasure emp = stats::empirical_measure(sim.index(), f);
          return stats::tv_distance(emp.normalized(),
                                    theory::LimitLaw::individual_sizes(sim.constants().c));
        },
        py::arg("sim"), py::arg("f") = 0.0,
        "Total variation between the renormalized empirical size distribution and its limit.");
  m.def("ks_uniform_fitness",
        [](const FastSimulation& sim, bool size_weighted) {
          return stats::ks_uniform_fitness(sim.index().sites(), sim.constants(), size_weighted);
        },
        py::arg("sim"), py::arg("size_weighted") = true,
        "KS distance of fitness values at or above f_c against U[f_c, 1].");
  m.def("tail_exponent_fit",
        [](const std::vector<double>& mass, std::uint64_t k_min) {
          stats::Pmf pmf;
          pmf.mass = mass;
          const stats::TailFit fit = stats::tail_exponent_fit(pmf, k_min);
          py::dict out;
          out["exponent"] = fit.exponent;
          out["r_squared"] = fit.r_squared;
          out["points"] = fit.points;
          return out;
        },
        py::arg("pmf"), py::arg("k_min") = 10,
        "Log-log least-squares exponent of a pmf given as [mass at 1, mass at 2, ...].");
  m.def("exact_population_pmf", &stats::exact_population_pmf, py::arg("p"), py::arg("n"),
        "Exact pmf of the population size after n steps (states 0..n).");
  m.def("coupling_check",
        [](double p, std::uint64_t n, std::uint64_t trials, std::uint64_t seed) {
          const stats::CouplingReport rep = stats::coupling_check(p, n, trials, seed);
          py::dict out;
          out["n"] = rep.n;
          out["trials"] = rep.trials;
          out["tv_reflected_dp"] = rep.tv_reflected_dp;
          out["tv_chain_dp"] = rep.tv_chain_dp;
          out["tv_chain_reflected"] = rep.tv_chain_reflected;
          out["concentration"] = rep.concentration;
          out["log_slope"] = rep.log_slope;
          return out;
        },
        py::arg("p"), py::arg("n"), py::arg("trials"), py::arg("seed") = 0,
        "Monte-Carlo coupling of the population walk against the exact pmf.");

  // Run orchestration (same artifacts as the CLI).
  m.def("simulate_run",
        [](double p, double r, std::uint64_t seed, std::uint64_t steps, const std::string& out,
           const std::string& variant, std::uint64_t snapshot_every, std::vector<double> f_grid,
           std::uint64_t initial_population, bool log_events, const std::string& resume_from) {
          harness::RunConfig config;
          config.params = make_params(p, r, seed, variant);
          config.steps = steps;
          config.out_dir = out;
          config.snapshot_every = snapshot_every;
          config.f_grid = std::move(f_grid);
          config.initial_population = initial_population;
          config.log_events = log_events;
          config.resume_from = resume_from;
          return run_result_dict(harness::simulate_run(config));
        },
        py::arg("p") = 0.8, py::arg("r") = 0.8, py::arg("seed") = 0, py::arg("steps") = 0,
        py::arg("out") = std::string(), py::arg("variant") = "proportional",
        py::arg("snapshot_every") = 0, py::arg("f_grid") = std::vector<double>{},
        py::arg("initial_population") = 0, py::arg("log_events") = false,
        py::arg("resume_from") = std::string(),
        "Run the model and write manifest, snapshots, and histogram artifacts.");
  m.def("compare_run",
        [](const std::string& run_dir, double f, std::uint64_t max_k, double tv_max,
           double ks_max, const std::string& out) {
          harness::CompareConfig config;
          config.run_dir = run_dir;
          config.f = f;
          config.max_k = max_k;
          config.tv_max = tv_max;
          config.ks_max = ks_max;
          config.out_dir = out;
          const harness::CompareResult result = harness::compare_run(config);
          py::dict dict;
          dict["tv"] = result.tv;
          dict["ks"] = result.ks;
          dict["theory_tail"] = result.theory_tail;
          dict["population"] = result.population;
          dict["site_count"] = result.site_count;
          dict["assertions_passed"] = result.assertions_passed;
          dict["csv_path"] = result.csv_path;
          dict["summary_path"] = result.summary_path;
          return dict;
        },
        py::arg("run_dir"), py::arg("f") = 0.0, py::arg("max_k") = 50, py::arg("tv_max") = -1.0,
        py::arg("ks_max") = -1.0, py::arg("out") = std::string(),
        "Compare a finished run directory against the closed-form limits.");
  m.def("theory_table",
        [](double p, double r, double f, std::uint64_t max_k) {
          std::vector<py::dict> rows;
          for (const harness::TheoryRow& row : harness::theory_table(p, r, f, max_k)) {
            py::dict d;
            d["k"] = row.k;
            d["beta_k"] = row.beta_k;
            d["rho_k"] = row.rho_k;
            d["site_proportion"] = row.site_proportion;
            rows.push_back(std::move(d));
          }
          return rows;
        },
        py::arg("p"), py::arg("r"), py::arg("f"), py::arg("max_k") = 50);
}
