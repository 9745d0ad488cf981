#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cstdint>
#include <vector>

#include "fitsim/rng.hpp"
#include "fitsim/site_index.hpp"

using namespace fitsim;

namespace {

// Applies one pseudo-random structural operation, identically interpretable
// by both index implementations.
template <class Index>
void apply_random_op(Index& index, std::uint64_t op_word, double fitness_draw) {
  const std::uint64_t choice = op_word % 4;
  if (choice == 0 || index.site_count() == 0) {
    index.insert_site(fitness_draw);
  } else if (choice == 1) {
    const std::uint64_t slot =
        static_cast<std::uint64_t>(fitness_draw * static_cast<double>(index.population()));
    index.increment_site(index.site_at_slot(slot).fitness);
  } else if (choice == 2) {
    const std::uint64_t rank =
        static_cast<std::uint64_t>(fitness_draw * static_cast<double>(index.site_count()));
    index.increment_site(index.site_at_rank(rank).fitness);
  } else {
    index.remove_lowest_member();
  }
}

template <class Index>
Index build_two_site_example() {
  Index index;
  REQUIRE(index.insert_site(0.2) == InsertOutcome::inserted);
  REQUIRE(index.insert_site(0.7) == InsertOutcome::inserted);
  index.increment_site(0.2);
  index.increment_site(0.2);
  return index;  // sites: (0.2, size 3), (0.7, size 1)
}

}  // namespace

TEST_CASE_TEMPLATE("slot selection walks sites in fitness order", Index, FenwickSiteIndex,
                   NaiveSiteIndex) {
  Index index = build_two_site_example<Index>();
  REQUIRE(index.population() == 4);
  REQUIRE(index.site_count() == 2);

  // Slots 0..2 belong to the size-3 site at fitness 0.2, slot 3 to 0.7.
  for (std::uint64_t slot = 0; slot < 3; ++slot) {
    CHECK(index.site_at_slot(slot).fitness == 0.2);
    CHECK(index.site_at_slot(slot).size == 3);
  }
  CHECK(index.site_at_slot(3).fitness == 0.7);
  CHECK_THROWS_AS((void)index.site_at_slot(4), std::logic_error);

  // v = 0.74 -> slot 2 -> low site; v = 0.76 -> slot 3 -> high site.
  CHECK(index.site_at_slot(static_cast<std::uint64_t>(0.74 * 4.0)).fitness == 0.2);
  CHECK(index.site_at_slot(static_cast<std::uint64_t>(0.76 * 4.0)).fitness == 0.7);

  CHECK(index.site_at_rank(0).fitness == 0.2);
  CHECK(index.site_at_rank(1).fitness == 0.7);
  CHECK_THROWS_AS((void)index.site_at_rank(2), std::logic_error);
}

TEST_CASE_TEMPLATE("weighted slot sampling reproduces sizes exactly", Index, FenwickSiteIndex,
                   NaiveSiteIndex) {
  Index index;
  const std::vector<Site> sites{{0.1, 5}, {0.35, 1}, {0.6, 7}, {0.9, 2}};
  for (const Site& site : sites) {
    index.insert_site(site.fitness);
    for (std::uint64_t i = 1; i < site.size; ++i) index.increment_site(site.fitness);
  }
  REQUIRE(index.population() == 15);

  // Enumerating every slot hits each site exactly size-many times: selecting
  // by floor(v * T) is sampling proportional to size.
  std::vector<std::uint64_t> hits(sites.size(), 0);
  for (std::uint64_t slot = 0; slot < index.population(); ++slot) {
    const Site chosen = index.site_at_slot(slot);
    for (std::size_t i = 0; i < sites.size(); ++i)
      if (sites[i].fitness == chosen.fitness) ++hits[i];
  }
  for (std::size_t i = 0; i < sites.size(); ++i) CHECK(hits[i] == sites[i].size);
}

TEST_CASE_TEMPLATE("duplicate fitness is rejected without state change", Index, FenwickSiteIndex,
                   NaiveSiteIndex) {
  Index index = build_two_site_example<Index>();
  CHECK(index.insert_site(0.2) == InsertOutcome::duplicate_fitness);
  CHECK(index.population() == 4);
  CHECK(index.site_count() == 2);
  CHECK(index.site_at_rank(0).size == 3);
}

TEST_CASE_TEMPLATE("lowest-member removal strikes the minimum fitness site", Index,
                   FenwickSiteIndex, NaiveSiteIndex) {
  Index index = build_two_site_example<Index>();

  RemovalResult removed = index.remove_lowest_member();
  CHECK(removed.fitness == 0.2);
  CHECK(removed.remaining_size == 2);
  CHECK(removed.removed_members == 1);
  CHECK(index.population() == 3);

  index.remove_lowest_member();
  removed = index.remove_lowest_member();  // site at 0.2 is now empty
  CHECK(removed.fitness == 0.2);
  CHECK(removed.remaining_size == 0);
  CHECK(index.site_count() == 1);
  CHECK(index.site_at_rank(0).fitness == 0.7);

  removed = index.remove_lowest_member();
  CHECK(removed.fitness == 0.7);
  CHECK(index.population() == 0);
  CHECK(index.site_count() == 0);
  CHECK_THROWS_AS((void)index.remove_lowest_member(), std::logic_error);
}

TEST_CASE_TEMPLATE("whole-site removal deletes the minimum fitness site", Index, FenwickSiteIndex,
                   NaiveSiteIndex) {
  Index index = build_two_site_example<Index>();
  const RemovalResult removed = index.remove_lowest_site();
  CHECK(removed.fitness == 0.2);
  CHECK(removed.removed_members == 3);
  CHECK(removed.remaining_size == 0);
  CHECK(index.population() == 1);
  CHECK(index.site_count() == 1);
}

TEST_CASE_TEMPLATE("histograms and threshold queries", Index, FenwickSiteIndex, NaiveSiteIndex) {
  Index index = build_two_site_example<Index>();

  const SizeHistogram all = index.size_histogram(0.0);
  REQUIRE(all.size() == 2);
  CHECK(all.at(1) == 1);
  CHECK(all.at(3) == 1);

  const SizeHistogram high = index.size_histogram(0.5);
  REQUIRE(high.size() == 1);
  CHECK(high.at(1) == 1);

  CHECK(index.population_at_or_below(0.1) == 0);
  CHECK(index.population_at_or_below(0.2) == 3);
  CHECK(index.population_at_or_below(0.7) == 4);
  CHECK(index.population_at_or_below(1.0) == 4);

  const std::vector<Site> sites = index.sites();
  REQUIRE(sites.size() == 2);
  CHECK(sites[0].fitness == 0.2);
  CHECK(sites[1].fitness == 0.7);
}

TEST_CASE("increment of a removed site's fitness throws") {
  FenwickSiteIndex index;
  index.insert_site(0.4);
  index.remove_lowest_member();
  CHECK_THROWS_AS(index.increment_site(0.4), std::invalid_argument);
}

TEST_CASE("fenwick and naive indexes stay bit-identical under random ops") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    FenwickSiteIndex fast;
    NaiveSiteIndex naive;
    const CounterRng ops(seed, 100);
    const CounterRng draws(seed, 101);
    for (std::uint64_t i = 0; i < 10000; ++i) {
      const std::uint64_t op_word = ops.word_at(i);
      const double fitness_draw = unit_from_word(draws.word_at(i));
      apply_random_op(fast, op_word, fitness_draw);
      apply_random_op(naive, op_word, fitness_draw);
      if (i % 997 == 0) {
        REQUIRE(fast.population() == naive.population());
        REQUIRE(fast.site_count() == naive.site_count());
      }
    }
    const std::vector<Site> a = fast.sites();
    const std::vector<Site> b = naive.sites();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      REQUIRE(a[i].fitness == b[i].fitness);
      REQUIRE(a[i].size == b[i].size);
    }
    fast.check_consistency();
  }
}

TEST_CASE("bucket growth preserves aggregates") {
  FenwickSiteIndex index;
  const CounterRng draws(7, 102);
  // Push well past the load factor so the bucket array doubles repeatedly.
  for (std::uint64_t i = 0; i < 40000; ++i) index.insert_site(unit_from_word(draws.word_at(i)));
  index.check_consistency();
  CHECK(index.site_count() == 40000);

  // Aggregate queries still resolve every site after growth.
  std::uint64_t seen = 0;
  for (std::uint64_t rank = 0; rank < index.site_count(); rank += 1111) {
    (void)index.site_at_rank(rank);
    ++seen;
  }
  CHECK(seen == 37);
  CHECK(index.population_at_or_below(1.0) == 40000);
}

TEST_CASE("slot selection stays fast at large site counts") {
  FenwickSiteIndex index;
  const CounterRng draws(11, 103);
  for (std::uint64_t i = 0; i < 1000000; ++i) index.insert_site(unit_from_word(draws.word_at(i)));

  const auto start = std::chrono::steady_clock::now();
  std::uint64_t checksum = 0;
  const std::uint64_t queries = 200000;
  for (std::uint64_t i = 0; i < queries; ++i) {
    const double v = unit_from_word(draws.word_at(2000000 + i));
    const auto slot = static_cast<std::uint64_t>(v * static_cast<double>(index.population()));
    checksum += index.site_at_slot(slot).size;
  }
  const auto elapsed = std::chrono::steady_clock::now() - start;
  const double per_query =
      std::chrono::duration<double, std::micro>(elapsed).count() / static_cast<double>(queries);
  CHECK(checksum == queries);  // all sites are singletons
  CHECK(per_query < 5.0);      // logarithmic selection, generous bound
}
