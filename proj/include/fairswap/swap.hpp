#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairswap/dataset.hpp"
#include "fairswap/random.hpp"

namespace fairswap {

inline constexpr double kUnboundedDistortion = std::numeric_limits<double>::infinity();

struct SwapConfig {
  double ratio = 0.5;      // fraction of rows selected, in (0, 1]
  double d_max = 0.2;      // kUnboundedDistortion disables the check
  std::uint64_t seed = 0;

  void validate() const;
};

// |I| = round(ratio * n) distinct rows drawn uniformly; returned ascending.
std::vector<std::size_t> select_swap_indices(std::size_t n, double ratio, Rng& rng);

// Mixed distance between two rows: simple matching on categorical features
// plus |u - v| / range on continuous ones (a zero range counts as 1).
double distortion(std::span<const double> u, std::span<const double> v, const FeatureSchema& schema);

// Contribution of a single feature to distortion().
double cell_distortion(const FeatureInfo& info, double u, double v);

// Uniform draw from the distinct observed values of the category opposite to
// `current`. Throws if `current` belongs to neither category.
double alternate_value(const FeaturePartition& partition, double current, Rng& rng);

struct SwapResult {
  TabularDataset data;
  std::vector<std::size_t> altered;  // I', ascending
  // Candidate distortion for every row of I, in the order of I.
  std::vector<double> distortions;
};

// Replaces feature `partition.feature` in rows I by a value from the opposite
// category. Categorical swaps always apply; continuous swaps apply only when
// the row distortion stays within d_max.
SwapResult single_swap(const TabularDataset& ds, const FeaturePartition& partition,
                       std::span<const std::size_t> rows, double d_max, Rng& rng);
SwapResult single_swap(const TabularDataset& ds, std::size_t feature,
                       std::span<const std::size_t> rows, double d_max, Rng& rng);

enum class OrderProvenance { UserSpecified, StatisticallyInferred };

struct OrderViolation {
  std::size_t earlier = 0;
  std::size_t later = 0;
  double p_earlier = 0.0;
  double p_later = 0.0;
};

// Total order over features used to decide which variables mediate which.
struct TemporalOrder {
  std::vector<std::size_t> order;        // feature index at each position
  std::vector<std::size_t> position;     // position of each feature
  std::vector<OrderProvenance> provenance;
  std::vector<double> event_probability; // empirical frequency of C1
  // User-declared pairs that fail p(earlier) > p(later).
  std::vector<OrderViolation> violations;

  OrderProvenance relation(std::size_t a, std::size_t b) const;
};

// User-declared prefix first, remaining features by descending C1 frequency
// with ties broken by feature index. Violations of the frequency condition in
// the user prefix are recorded; with `strict` they throw instead.
TemporalOrder temporal_order(const TabularDataset& ds, std::span<const std::string> user_partial,
                             bool strict = false);

// Every (feature, mediator) with position(feature) < position(mediator), in
// order of position.
std::vector<std::pair<std::size_t, std::size_t>> mediator_pairs(const TemporalOrder& order);

struct DoubleSwap {
  SwapResult first;   // X'
  SwapResult second;  // X''
};

// X' swaps the mediator, X'' then swaps the feature (natural direct impact).
DoubleSwap double_swap_scenario1(const TabularDataset& ds, const FeaturePartition& feature,
                                 const FeaturePartition& mediator,
                                 std::span<const std::size_t> rows, double d_max, Rng& rng);
// X' swaps the feature, X'' then swaps the mediator (natural indirect impact).
DoubleSwap double_swap_scenario2(const TabularDataset& ds, const FeaturePartition& feature,
                                 const FeaturePartition& mediator,
                                 std::span<const std::size_t> rows, double d_max, Rng& rng);

}  // namespace fairswap
