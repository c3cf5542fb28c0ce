#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairswap/dataset.hpp"
#include "fairswap/divergence.hpp"
#include "fairswap/model.hpp"
#include "fairswap/swap.hpp"

namespace fairswap {

struct ImpactSettings {
  std::size_t bins = 10;
  // Compare two-point hard-label distributions instead of probability histograms.
  bool label_mode = false;
};

PredictionDistribution output_distribution(const LogisticModel& model, const TabularDataset& ds,
                                           const ImpactSettings& settings);

// All three estimators seed one Rng from cfg.seed, draw the row set I from it
// and continue with the same stream for the swapped values. Equal seeds thus
// give NDI and NII the same treated rows.

// Divergence between predictions on `test` and on `test` with the feature swapped.
DivergenceScores controlled_direct_impact(const LogisticModel& model, const TabularDataset& test,
                                          const FeaturePartition& feature, const SwapConfig& cfg,
                                          const ImpactSettings& settings);
DivergenceScores controlled_direct_impact(const LogisticModel& model, const TabularDataset& test,
                                          std::size_t feature, const SwapConfig& cfg,
                                          const ImpactSettings& settings);

// Mediator swapped, then feature swapped; divergence between the two.
DivergenceScores natural_direct_impact(const LogisticModel& model, const TabularDataset& test,
                                       const FeaturePartition& feature,
                                       const FeaturePartition& mediator, const SwapConfig& cfg,
                                       const ImpactSettings& settings);
// Feature swapped, then mediator swapped; divergence between the two.
DivergenceScores natural_indirect_impact(const LogisticModel& model, const TabularDataset& test,
                                         const FeaturePartition& feature,
                                         const FeaturePartition& mediator, const SwapConfig& cfg,
                                         const ImpactSettings& settings);

struct PairImpact {
  std::size_t feature = 0;
  std::size_t mediator = 0;
  DivergenceScores ndi;
  DivergenceScores nii;
};

struct NaturalImpactTotal {
  DivergenceScores total;
  bool no_mediators = true;
};

// Sum of NDI + NII over the pairs whose feature is `feature`.
NaturalImpactTotal total_natural_impact(std::span<const PairImpact> pairs, std::size_t feature);

struct FoldImpact {
  std::size_t fold = 0;
  std::vector<std::vector<DivergenceScores>> cdi;  // [ratio][feature]
  std::vector<std::vector<PairImpact>> pairs;      // [ratio][pair]
  std::vector<double> importance;                  // mean |SHAP| on the test fold
};

struct ImpactReport {
  std::vector<std::string> features;
  std::vector<double> ratios;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<FoldImpact> folds;

  // Fold means.
  std::vector<std::vector<DivergenceScores>> cdi;            // [ratio][feature]
  std::vector<std::vector<PairImpact>> pair_mean;            // [ratio][pair]
  std::vector<std::vector<DivergenceScores>> total_natural;  // [ratio][feature]
  std::vector<bool> has_mediators;                           // [feature]
  std::vector<double> importance;                            // [feature]
};

// Seed of the swap task (fold, feature, mediator, ratio). CDI tasks use
// kNoMediator.
inline constexpr std::uint64_t kNoMediator = ~std::uint64_t{0};
std::uint64_t task_seed(std::uint64_t master, std::size_t fold, std::size_t feature,
                        std::uint64_t mediator, double ratio);

struct FoldTask {
  std::size_t fold = 0;
  std::uint64_t master_seed = 0;
  std::span<const double> ratios;
  double d_max = 0.2;
  // Partition per feature; features without one are skipped (scores 0).
  std::span<const std::optional<FeaturePartition>> partitions;
  std::span<const std::pair<std::size_t, std::size_t>> pairs;
  ImpactSettings settings;
};

FoldImpact analyze_fold(const LogisticModel& model, const TabularDataset& test, const FoldTask& task);

ImpactReport aggregate_impacts(std::vector<std::string> features, std::vector<double> ratios,
                               std::vector<std::pair<std::size_t, std::size_t>> pairs,
                               std::vector<FoldImpact> folds);

struct FeatureRanking {
  std::vector<std::size_t> ranks;  // ranks[feature], 1 = highest score
  std::vector<double> scores;
};

// Descending score; ties go to the lower feature index.
FeatureRanking rank_features(std::span<const double> scores);

// 1 - sum (ra_i - rb_i)^2 / (m (m^2 - 1)).
double ranking_stability(const FeatureRanking& a, const FeatureRanking& b);

enum class BiasImportanceLabel { MoreBiasMoreImportant, MoreBiasLessImportant,
                                 LessBiasMoreImportant, LessBiasLessImportant, Unlabeled };

std::string_view to_string(BiasImportanceLabel label);

// "More" means rank <= ceil(top_fraction * m), "less" rank >= m - ceil(top_fraction * m) + 1.
// When both hold (small m) "more" wins.
std::vector<BiasImportanceLabel> label_features(const FeatureRanking& bias,
                                                const FeatureRanking& importance,
                                                double top_fraction);

}  // namespace fairswap
