#pragma once

// Ordered collection of sites (fitness, size), fitness in [0,1] and unique.
// Two interchangeable implementations:
//
//   FenwickSiteIndex  - production structure. Sites live in buckets indexed
//                       by a fitness prefix; two Fenwick trees over the
//                       buckets cache (population sum, site count) per range,
//                       giving O(log S) insert, increment, removal and
//                       order-statistic selection by individual slot or by
//                       site rank. The bucket array doubles when average
//                       occupancy exceeds a constant, so depth tracks log S.
//
//   NaiveSiteIndex    - flat sorted vector with linear scans; the reference
//                       twin used to cross-check the indexed structure.
//
// Both resolve order statistics over the same total order: sites ascending
// by fitness, each site owning `size` consecutive individual slots. Given
// identical call sequences the two produce identical results bit for bit.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace fitsim {

struct Site {
  double fitness;
  std::uint64_t size;
};

enum class InsertOutcome { inserted, duplicate_fitness };

/// Result of removing one member (or a whole site): which site was hit and
/// what is left of it (remaining_size == 0 means the site was deleted).
struct RemovalResult {
  double fitness;
  std::uint64_t remaining_size;
  std::uint64_t removed_members;
};

using SizeHistogram = std::map<std::uint64_t, std::uint64_t>;

class FenwickSiteIndex {
 public:
  FenwickSiteIndex() { reset_buckets(kInitialBuckets); }

  [[nodiscard]] std::uint64_t population() const { return population_; }
  [[nodiscard]] std::uint64_t site_count() const { return site_count_; }

  /// Inserts a singleton site. O(log S). Duplicate fitness is rejected and the
  /// caller must resample.
  InsertOutcome insert_site(double fitness) {
    check_fitness(fitness);
    auto& bucket = buckets_[bucket_of(fitness)];
    auto it = lower_bound(bucket, fitness);
    if (it != bucket.end() && it->fitness == fitness) return InsertOutcome::duplicate_fitness;
    bucket.insert(it, Site{fitness, 1});
    fenwick_add(pop_tree_, bucket_of(fitness), 1);
    fenwick_add(cnt_tree_, bucket_of(fitness), 1);
    ++population_;
    ++site_count_;
    if (site_count_ > kMaxLoad * bucket_count_) grow();
    return InsertOutcome::inserted;
  }

  /// Adds one member to the site with this exact fitness. O(log S).
  std::uint64_t increment_site(double fitness) {
    auto& bucket = buckets_[bucket_of(fitness)];
    auto it = lower_bound(bucket, fitness);
    if (it == bucket.end() || it->fitness != fitness)
      throw std::invalid_argument("increment_site: no site with this fitness");
    ++it->size;
    fenwick_add(pop_tree_, bucket_of(fitness), 1);
    ++population_;
    return it->size;
  }

  /// Site owning individual slot `slot` in fitness-ascending prefix-sum
  /// order, slot in [0, population). O(log S).
  [[nodiscard]] Site site_at_slot(std::uint64_t slot) const {
    if (slot >= population_)
      throw std::logic_error("site_at_slot: slot out of range");
    auto [b, rem] = fenwick_descend(pop_tree_, slot);
    for (const Site& s : buckets_[b]) {
      if (rem < s.size) return s;
      rem -= s.size;
    }
    throw std::logic_error("site_at_slot: aggregate mismatch");
  }

  /// k-th site in fitness-ascending order, rank in [0, site_count). O(log S).
  [[nodiscard]] Site site_at_rank(std::uint64_t rank) const {
    if (rank >= site_count_)
      throw std::logic_error("site_at_rank: rank out of range");
    auto [b, rem] = fenwick_descend(cnt_tree_, rank);
    return buckets_[b][rem];
  }

  /// Removes one member from the minimum-fitness site. O(log S).
  RemovalResult remove_lowest_member() {
    if (population_ == 0) throw std::logic_error("remove_lowest_member: empty population");
    auto [b, rem] = fenwick_descend(cnt_tree_, 0);
    Site& s = buckets_[b][rem];
    RemovalResult out{s.fitness, s.size - 1, 1};
    --s.size;
    fenwick_add(pop_tree_, b, -1);
    --population_;
    if (s.size == 0) {
      buckets_[b].erase(buckets_[b].begin() + static_cast<std::ptrdiff_t>(rem));
      fenwick_add(cnt_tree_, b, -1);
      --site_count_;
    }
    return out;
  }

  /// Deletes the minimum-fitness site outright (uniform-variant death). O(log S).
  RemovalResult remove_lowest_site() {
    if (site_count_ == 0) throw std::logic_error("remove_lowest_site: no sites");
    auto [b, rem] = fenwick_descend(cnt_tree_, 0);
    Site s = buckets_[b][rem];
    buckets_[b].erase(buckets_[b].begin() + static_cast<std::ptrdiff_t>(rem));
    fenwick_add(pop_tree_, b, -static_cast<std::int64_t>(s.size));
    fenwick_add(cnt_tree_, b, -1);
    population_ -= s.size;
    --site_count_;
    return RemovalResult{s.fitness, 0, s.size};
  }

  /// Members at sites with fitness <= f. O(log S + bucket).
  [[nodiscard]] std::uint64_t population_at_or_below(double f) const {
    if (f < 0.0) return 0;
    std::uint64_t b = bucket_of(f < 1.0 ? f : 1.0);
    std::uint64_t total = fenwick_prefix(pop_tree_, b);  // buckets [0, b)
    for (const Site& s : buckets_[b]) {
      if (s.fitness > f) break;
      total += s.size;
    }
    return total;
  }

  /// size -> number of sites of that size among sites with fitness >= f.
  [[nodiscard]] SizeHistogram size_histogram(double f = 0.0) const {
    SizeHistogram h;
    for_each_site_at_or_above(f, [&](const Site& s) { ++h[s.size]; });
    return h;
  }

  /// Visits sites in fitness-ascending order, optionally restricted to >= f.
  template <class Fn>
  void for_each_site_at_or_above(double f, Fn&& fn) const {
    std::uint64_t b0 = f <= 0.0 ? 0 : bucket_of(f < 1.0 ? f : 1.0);
    for (std::uint64_t b = b0; b < bucket_count_; ++b)
      for (const Site& s : buckets_[b])
        if (s.fitness >= f) fn(s);
  }

  template <class Fn>
  void for_each_site(Fn&& fn) const {
    for_each_site_at_or_above(0.0, fn);
  }

  [[nodiscard]] std::vector<Site> sites() const {
    std::vector<Site> out;
    out.reserve(site_count_);
    for_each_site([&](const Site& s) { out.push_back(s); });
    return out;
  }

  /// Recomputes every cached aggregate from scratch; throws on mismatch.
  void check_consistency() const {
    std::uint64_t pop = 0, cnt = 0;
    double prev = -1.0;
    for (std::uint64_t b = 0; b < bucket_count_; ++b) {
      std::uint64_t bpop = 0;
      for (const Site& s : buckets_[b]) {
        if (s.fitness <= prev) throw std::logic_error("check_consistency: order violated");
        if (bucket_of(s.fitness) != b) throw std::logic_error("check_consistency: misplaced site");
        if (s.size == 0) throw std::logic_error("check_consistency: empty site");
        prev = s.fitness;
        bpop += s.size;
      }
      if (fenwick_range_one(pop_tree_, b) != static_cast<std::int64_t>(bpop) ||
          fenwick_range_one(cnt_tree_, b) != static_cast<std::int64_t>(buckets_[b].size()))
        throw std::logic_error("check_consistency: stale aggregate");
      pop += bpop;
      cnt += buckets_[b].size();
    }
    if (pop != population_ || cnt != site_count_)
      throw std::logic_error("check_consistency: totals drifted");
  }

  [[nodiscard]] std::uint64_t bucket_count() const { return bucket_count_; }

 private:
  static constexpr std::uint64_t kInitialBuckets = 1024;
  static constexpr std::uint64_t kMaxLoad = 8;

  static void check_fitness(double fitness) {
    if (!(fitness >= 0.0 && fitness <= 1.0))
      throw std::invalid_argument("fitness outside [0,1]");
  }

  [[nodiscard]] std::uint64_t bucket_of(double fitness) const {
    auto b = static_cast<std::uint64_t>(fitness * static_cast<double>(bucket_count_));
    return b < bucket_count_ ? b : bucket_count_ - 1;
  }

  static std::vector<Site>::iterator lower_bound(std::vector<Site>& bucket, double fitness) {
    auto it = bucket.begin();
    while (it != bucket.end() && it->fitness < fitness) ++it;
    return it;
  }

  // Fenwick trees are 1-indexed internally; tree[i] covers i - lowbit(i) .. i.
  void fenwick_add(std::vector<std::int64_t>& tree, std::uint64_t bucket, std::int64_t delta) {
    for (std::uint64_t i = bucket + 1; i <= bucket_count_; i += i & (~i + 1))
      tree[i] += delta;
  }

  // Sum over buckets [0, bucket).
  [[nodiscard]] std::uint64_t fenwick_prefix(const std::vector<std::int64_t>& tree,
                                             std::uint64_t bucket) const {
    std::int64_t sum = 0;
    for (std::uint64_t i = bucket; i > 0; i -= i & (~i + 1)) sum += tree[i];
    return static_cast<std::uint64_t>(sum);
  }

  [[nodiscard]] std::int64_t fenwick_range_one(const std::vector<std::int64_t>& tree,
                                               std::uint64_t bucket) const {
    return static_cast<std::int64_t>(fenwick_prefix(tree, bucket + 1)) -
           static_cast<std::int64_t>(fenwick_prefix(tree, bucket));
  }

  // First bucket whose inclusive prefix sum exceeds `target`; returns the
  // bucket and the remainder within it. Standard binary-lifting descent.
  [[nodiscard]] std::pair<std::uint64_t, std::uint64_t> fenwick_descend(
      const std::vector<std::int64_t>& tree, std::uint64_t target) const {
    std::uint64_t pos = 0;
    std::uint64_t bit = bucket_count_;  // bucket_count_ is a power of two
    std::int64_t rem = static_cast<std::int64_t>(target);
    while (bit > 0) {
      std::uint64_t next = pos + bit;
      if (next <= bucket_count_ && tree[next] <= rem) {
        rem -= tree[next];
        pos = next;
      }
      bit >>= 1;
    }
    return {pos, static_cast<std::uint64_t>(rem)};  // pos buckets fully skipped
  }

  void reset_buckets(std::uint64_t count) {
    bucket_count_ = count;
    buckets_.assign(count, {});
    pop_tree_.assign(count + 1, 0);
    cnt_tree_.assign(count + 1, 0);
  }

  void grow() {
    std::vector<Site> all = sites();
    reset_buckets(bucket_count_ * 2);
    // Sites arrive in ascending fitness, so each bucket stays sorted.
    for (const Site& s : all) {
      std::uint64_t b = bucket_of(s.fitness);
      buckets_[b].push_back(s);
      pop_tree_[b + 1] += static_cast<std::int64_t>(s.size);
      cnt_tree_[b + 1] += 1;
    }
    // O(B) Fenwick build from per-bucket totals.
    for (std::uint64_t i = 1; i <= bucket_count_; ++i) {
      std::uint64_t j = i + (i & (~i + 1));
      if (j <= bucket_count_) {
        pop_tree_[j] += pop_tree_[i];
        cnt_tree_[j] += cnt_tree_[i];
      }
    }
  }

  std::uint64_t bucket_count_ = 0;
  std::vector<std::vector<Site>> buckets_;
  std::vector<std::int64_t> pop_tree_;  // per-range member counts
  std::vector<std::int64_t> cnt_tree_;  // per-range site counts
  std::uint64_t population_ = 0;
  std::uint64_t site_count_ = 0;
};

// Reference implementation: one sorted vector, everything by linear scan.
class NaiveSiteIndex {
 public:
  [[nodiscard]] std::uint64_t population() const { return population_; }
  [[nodiscard]] std::uint64_t site_count() const { return sites_.size(); }

  InsertOutcome insert_site(double fitness) {
    if (!(fitness >= 0.0 && fitness <= 1.0))
      throw std::invalid_argument("fitness outside [0,1]");
    auto it = sites_.begin();
    while (it != sites_.end() && it->fitness < fitness) ++it;
    if (it != sites_.end() && it->fitness == fitness) return InsertOutcome::duplicate_fitness;
    sites_.insert(it, Site{fitness, 1});
    ++population_;
    return InsertOutcome::inserted;
  }

  std::uint64_t increment_site(double fitness) {
    for (Site& s : sites_) {
      if (s.fitness == fitness) {
        ++s.size;
        ++population_;
        return s.size;
      }
    }
    throw std::invalid_argument("increment_site: no site with this fitness");
  }

  [[nodiscard]] Site site_at_slot(std::uint64_t slot) const {
    if (slot >= population_) throw std::logic_error("site_at_slot: slot out of range");
    for (const Site& s : sites_) {
      if (slot < s.size) return s;
      slot -= s.size;
    }
    throw std::logic_error("site_at_slot: unreachable");
  }

  [[nodiscard]] Site site_at_rank(std::uint64_t rank) const {
    if (rank >= sites_.size()) throw std::logic_error("site_at_rank: rank out of range");
    return sites_[rank];
  }

  RemovalResult remove_lowest_member() {
    if (population_ == 0) throw std::logic_error("remove_lowest_member: empty population");
    Site& s = sites_.front();
    RemovalResult out{s.fitness, s.size - 1, 1};
    --s.size;
    --population_;
    if (s.size == 0) sites_.erase(sites_.begin());
    return out;
  }

  RemovalResult remove_lowest_site() {
    if (sites_.empty()) throw std::logic_error("remove_lowest_site: no sites");
    Site s = sites_.front();
    sites_.erase(sites_.begin());
    population_ -= s.size;
    return RemovalResult{s.fitness, 0, s.size};
  }

  [[nodiscard]] std::uint64_t population_at_or_below(double f) const {
    std::uint64_t total = 0;
    for (const Site& s : sites_) {
      if (s.fitness > f) break;
      total += s.size;
    }
    return total;
  }

  [[nodiscard]] SizeHistogram size_histogram(double f = 0.0) const {
    SizeHistogram h;
    for (const Site& s : sites_)
      if (s.fitness >= f) ++h[s.size];
    return h;
  }

  template <class Fn>
  void for_each_site_at_or_above(double f, Fn&& fn) const {
    for (const Site& s : sites_)
      if (s.fitness >= f) fn(s);
  }

  template <class Fn>
  void for_each_site(Fn&& fn) const {
    for (const Site& s : sites_) fn(s);
  }

  [[nodiscard]] std::vector<Site> sites() const { return sites_; }

  void check_consistency() const {
    std::uint64_t pop = 0;
    double prev = -1.0;
    for (const Site& s : sites_) {
      if (s.fitness <= prev || s.size == 0) throw std::logic_error("check_consistency: bad state");
      prev = s.fitness;
      pop += s.size;
    }
    if (pop != population_) throw std::logic_error("check_consistency: totals drifted");
  }

 private:
  std::vector<Site> sites_;  // ascending fitness
  std::uint64_t population_ = 0;
};

}  // namespace fitsim
