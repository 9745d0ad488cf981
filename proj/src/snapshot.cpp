#include "fitsim/snapshot.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace fitsim {
namespace snapshot {

void save(const SnapshotData& snap, const std::string& path) {
  nlohmann::json header{
      {"format_version", snap.format_version},
      {"step", snap.step},
      {"seed", snap.seed},
      {"p", snap.p},
      {"r", snap.r},
      {"variant", to_string(snap.variant)},
      {"main_counter", snap.main_counter},
      {"aux_counter", snap.aux_counter},
      {"population", snap.population},
      {"sites", snap.sites.size()},
  };
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("snapshot: cannot open " + path + " for writing");
  out << header.dump() << '\n';
  char line[64];
  for (const Site& site : snap.sites) {
    std::snprintf(line, sizeof line, "%.17g,%llu", site.fitness,
                  static_cast<unsigned long long>(site.size));
    out << line << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("snapshot: write to " + path + " failed");
}

SnapshotData load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("snapshot: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("snapshot: missing header in " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& err) {
    throw std::runtime_error("snapshot: bad header in " + path + ": " + err.what());
  }
  SnapshotData snap;
  snap.format_version = header.at("format_version").get<int>();
  if (snap.format_version != kFormatVersion)
    throw std::runtime_error("snapshot: unsupported format version " +
                             std::to_string(snap.format_version));
  snap.step = header.at("step").get<std::uint64_t>();
  snap.seed = header.at("seed").get<std::uint64_t>();
  snap.p = header.at("p").get<double>();
  snap.r = header.at("r").get<double>();
  snap.variant = variant_from_string(header.at("variant").get<std::string>());
  snap.main_counter = header.at("main_counter").get<std::uint64_t>();
  snap.aux_counter = header.at("aux_counter").get<std::uint64_t>();
  snap.population = header.at("population").get<std::uint64_t>();
  const auto expected_sites = header.at("sites").get<std::uint64_t>();

  std::uint64_t members = 0;
  double last_fitness = -1.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const char* text = line.c_str();
    char* tail = nullptr;
    errno = 0;
    const double fitness = std::strtod(text, &tail);
    if (tail == text || *tail != ',' || errno != 0)
      throw std::runtime_error("snapshot: malformed site line '" + line + "'");
    const unsigned long long size = std::strtoull(tail + 1, &tail, 10);
    if (*tail != '\0' || size == 0)
      throw std::runtime_error("snapshot: malformed site line '" + line + "'");
    if (!(fitness > last_fitness))
      throw std::runtime_error("snapshot: site fitness values out of order");
    last_fitness = fitness;
    snap.sites.push_back(Site{fitness, size});
    members += size;
  }
  if (snap.sites.size() != expected_sites)
    throw std::runtime_error("snapshot: header lists " + std::to_string(expected_sites) +
                             " sites, file has " + std::to_string(snap.sites.size()));
  if (members != snap.population)
    throw std::runtime_error("snapshot: site sizes sum to " + std::to_string(members) +
                             ", header population is " + std::to_string(snap.population));
  if (snap.main_counter != 3 * snap.step)
    throw std::runtime_error("snapshot: main counter does not match step count");
  return snap;
}

}  // namespace snapshot
}  // namespace fitsim
