#pragma once

// Versioned plain-text snapshots: one JSON header line with the parameters
// and RNG cursors, then one "fitness,size" line per site in ascending
// fitness order. Fitness values are printed with 17 significant digits so a
// save/load round trip is bit-exact and a resumed run replays the exact
// variate sequence of an uninterrupted one.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fitsim/model.hpp"

namespace fitsim {
namespace snapshot {

inline constexpr int kFormatVersion = 1;

struct SnapshotData {
  int format_version = kFormatVersion;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  double p = 0.0;
  double r = 0.0;
  Variant variant = Variant::proportional;
  std::uint64_t main_counter = 0;
  std::uint64_t aux_counter = 0;
  std::uint64_t population = 0;
  std::vector<Site> sites;
};

template <class Index>
[[nodiscard]] SnapshotData capture(const Simulation<Index>& sim) {
  SnapshotData snap;
  snap.step = sim.step_count();
  snap.seed = sim.params().seed;
  snap.p = sim.params().p;
  snap.r = sim.params().r;
  snap.variant = sim.params().variant;
  snap.main_counter = sim.main_counter();
  snap.aux_counter = sim.aux_counter();
  snap.population = sim.population();
  snap.sites = sim.index().sites();
  return snap;
}

void save(const SnapshotData& snap, const std::string& path);

/// Parses and validates a snapshot file (version, counts, counter invariant).
[[nodiscard]] SnapshotData load(const std::string& path);

template <class Index>
[[nodiscard]] Simulation<Index> restore(const SnapshotData& snap) {
  Params params;
  params.p = snap.p;
  params.r = snap.r;
  params.variant = snap.variant;
  params.seed = snap.seed;
  return Simulation<Index>(params, std::span<const Site>(snap.sites), snap.step,
                           snap.main_counter, snap.aux_counter);
}

}  // namespace snapshot
}  // namespace fitsim
