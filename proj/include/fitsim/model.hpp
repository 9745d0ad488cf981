#pragma once

// The population process. Each step consumes one variate triple (x, rr, v):
//
//   x = 1, rr = 1            -> mutation: new singleton site at fitness v
//   x = 1, rr = 0, T > 0     -> inheritance: the site owning individual slot
//                               floor(v * T) gains a member (slots are laid
//                               out in fitness-ascending prefix-sum order)
//   x = 1, rr = 0, T = 0     -> mutation (fallback, same rule as above)
//   x = 0, T > 0             -> death at the minimum-fitness site
//   x = 0, T = 0             -> idle
//
// The uniform variant replaces inheritance with a uniform pick among sites
// (rank floor(v * S)) and death deletes the whole minimum-fitness site.
//
// All three variates are consumed every step in both variants, so the main
// stream counter is always 3 * step_count. A mutation whose fitness collides
// with an existing site resamples from a dedicated auxiliary stream, leaving
// the main stream aligned.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fitsim/rng.hpp"
#include "fitsim/site_index.hpp"

namespace fitsim {

enum class Variant : std::uint8_t { proportional, uniform };

enum class Regime : std::uint8_t { positive_recurrent, null_recurrent, transient };

[[nodiscard]] constexpr const char* to_string(Variant v) {
  return v == Variant::proportional ? "proportional" : "uniform";
}

[[nodiscard]] constexpr const char* to_string(Regime r) {
  switch (r) {
    case Regime::positive_recurrent: return "positive_recurrent";
    case Regime::null_recurrent: return "null_recurrent";
    default: return "transient";
  }
}

[[nodiscard]] inline Variant variant_from_string(std::string_view name) {
  if (name == "proportional") return Variant::proportional;
  if (name == "uniform") return Variant::uniform;
  throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
}

struct Params {
  double p = 0.8;   // birth probability, 0 < p < 1
  double r = 0.8;   // mutation probability given birth, 0 < r < 1
  Variant variant = Variant::proportional;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("Params: p must be in (0,1)");
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("Params: r must be in (0,1)");
  }

  [[nodiscard]] const Params& validated() const {
    validate();
    return *this;
  }
};

// gamma = 2p - 1 is the population drift; f_c = (1-p)/(pr) the critical
// fitness; c = (2p-1)/(p(1-r)) the tail index. f_c and c are meaningful in
// the transient regime (pr > 1-p), where f_c in [0,1) and c > 1.
struct DerivedConstants {
  double gamma;
  double f_c;
  double c;
  Regime regime;
};

/// Pure derivation; accepts the r = 1 boundary (no inheritance).
[[nodiscard]] inline DerivedConstants derive_constants(double p, double r) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("derive_constants: p must be in (0,1)");
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("derive_constants: r must be in (0,1]");
  DerivedConstants d{};
  d.gamma = 2.0 * p - 1.0;
  d.f_c = (1.0 - p) / (p * r);
  d.c = r < 1.0 ? (2.0 * p - 1.0) / (p * (1.0 - r)) : std::numeric_limits<double>::infinity();
  double birth = p * r, death = 1.0 - p;
  d.regime = birth > death   ? Regime::transient
             : birth < death ? Regime::positive_recurrent
                             : Regime::null_recurrent;
  return d;
}

[[nodiscard]] inline DerivedConstants derive_constants(const Params& params) {
  return derive_constants(params.p, params.r);
}

struct StepVariates {
  bool x;    // birth?
  bool rr;   // mutation given birth?
  double v;  // uniform in [0,1)
};

enum class EventKind : std::uint8_t { mutation, inheritance, death, idle };

[[nodiscard]] constexpr const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::mutation: return "mutation";
    case EventKind::inheritance: return "inheritance";
    case EventKind::death: return "death";
    default: return "idle";
  }
}

struct EventRecord {
  std::uint64_t step;            // 1-based
  EventKind kind;
  double fitness;                // affected site; NaN for idle
  std::uint64_t population_after;
  std::uint64_t site_size_after;  // 0 once a site is deleted
};

// Stream ids within a run.
inline constexpr std::uint64_t kMainStream = 0;
inline constexpr std::uint64_t kAuxStream = 1;
inline constexpr std::uint64_t kInitStream = 2;

template <class Index>
class Simulation {
 public:
  using Observer = std::function<void(const EventRecord&, const Simulation&)>;

  explicit Simulation(const Params& params, std::uint64_t initial_population = 0)
      : params_(params.validated()),
        constants_(derive_constants(params_)),
        main_rng_(params_.seed, kMainStream),
        aux_rng_(params_.seed, kAuxStream),
        p_threshold_(bernoulli_threshold(params_.p)),
        r_threshold_(bernoulli_threshold(params_.r)) {
    CounterRng init_rng(params_.seed, kInitStream);
    std::uint64_t cursor = 0;
    for (std::uint64_t i = 0; i < initial_population; ++i) {
      // Founders are singleton sites with independent uniform fitness.
      while (index_.insert_site(unit_from_word(init_rng.word_at(cursor++))) ==
             InsertOutcome::duplicate_fitness) {}
    }
  }

  /// Rebuilds mid-run state (snapshot resume, tests). Counters are absolute
  /// word positions in the main and auxiliary streams.
  Simulation(const Params& params, std::span<const Site> sites, std::uint64_t step_count,
             std::uint64_t main_counter, std::uint64_t aux_counter)
      : Simulation(params, 0) {
    if (main_counter != 3 * step_count)
      throw std::invalid_argument("Simulation: main counter must equal 3 * step_count");
    for (const Site& s : sites) {
      if (index_.insert_site(s.fitness) != InsertOutcome::inserted)
        throw std::invalid_argument("Simulation: duplicate fitness in site list");
      for (std::uint64_t k = 1; k < s.size; ++k) index_.increment_site(s.fitness);
    }
    step_ = step_count;
    main_counter_ = main_counter;
    aux_counter_ = aux_counter;
  }

  [[nodiscard]] const Params& params() const { return params_; }
  [[nodiscard]] const DerivedConstants& constants() const { return constants_; }
  [[nodiscard]] const Index& index() const { return index_; }
  [[nodiscard]] std::uint64_t step_count() const { return step_; }
  [[nodiscard]] std::uint64_t population() const { return index_.population(); }
  [[nodiscard]] std::uint64_t site_count() const { return index_.site_count(); }
  [[nodiscard]] std::uint64_t main_counter() const { return main_counter_; }
  [[nodiscard]] std::uint64_t aux_counter() const { return aux_counter_; }

  /// Variates the next step would consume; pure.
  [[nodiscard]] StepVariates peek_variates() const {
    return StepVariates{main_rng_.word_at(main_counter_) < p_threshold_,
                        main_rng_.word_at(main_counter_ + 1) < r_threshold_,
                        unit_from_word(main_rng_.word_at(main_counter_ + 2))};
  }

  /// Advances one step off the main stream.
  EventRecord step() {
    StepVariates sv = peek_variates();
    main_counter_ += 3;
    return apply(sv);
  }

  /// Applies explicit variates (diagnostic hook; bypasses the main stream but
  /// still resamples collisions from the auxiliary stream).
  EventRecord apply(const StepVariates& sv) {
    ++step_;
    EventRecord rec{step_, EventKind::idle, std::numeric_limits<double>::quiet_NaN(),
                    index_.population(), 0};
    const std::uint64_t t = index_.population();
    if (sv.x) {
      const bool mutate = sv.rr || t == 0;
      if (mutate) {
        double f = sv.v;
        while (index_.insert_site(f) == InsertOutcome::duplicate_fitness)
          f = unit_from_word(aux_rng_.word_at(aux_counter_++));
        rec.kind = EventKind::mutation;
        rec.fitness = f;
        rec.site_size_after = 1;
      } else if (params_.variant == Variant::proportional) {
        auto slot = static_cast<std::uint64_t>(sv.v * static_cast<double>(t));
        Site s = index_.site_at_slot(slot);
        rec.kind = EventKind::inheritance;
        rec.fitness = s.fitness;
        rec.site_size_after = index_.increment_site(s.fitness);
      } else {
        auto rank = static_cast<std::uint64_t>(sv.v * static_cast<double>(index_.site_count()));
        Site s = index_.site_at_rank(rank);
        rec.kind = EventKind::inheritance;
        rec.fitness = s.fitness;
        rec.site_size_after = index_.increment_site(s.fitness);
      }
    } else if (t > 0) {
      RemovalResult rr = params_.variant == Variant::proportional
                             ? index_.remove_lowest_member()
                             : index_.remove_lowest_site();
      rec.kind = EventKind::death;
      rec.fitness = rr.fitness;
      rec.site_size_after = rr.remaining_size;
    }
    rec.population_after = index_.population();
    return rec;
  }

  /// Runs `steps` steps, invoking each observer after every step.
  void run(std::uint64_t steps, std::span<const Observer> observers = {}) {
    for (std::uint64_t i = 0; i < steps; ++i) {
      EventRecord rec = step();
      for (const Observer& obs : observers) obs(rec, *this);
    }
  }

 private:
  Params params_;
  DerivedConstants constants_;
  Index index_;
  CounterRng main_rng_;
  CounterRng aux_rng_;
  std::uint64_t p_threshold_;
  std::uint64_t r_threshold_;
  std::uint64_t step_ = 0;
  std::uint64_t main_counter_ = 0;
  std::uint64_t aux_counter_ = 0;
};

using FastSimulation = Simulation<FenwickSiteIndex>;
using NaiveSimulation = Simulation<NaiveSiteIndex>;

}  // namespace fitsim
