#include "fairswap/impact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairswap/attribution.hpp"
#include "fairswap/error.hpp"

namespace fairswap {

namespace {

DivergenceScores cdi_against(const PredictionDistribution& baseline, const LogisticModel& model,
                             const TabularDataset& test, const FeaturePartition& feature,
                             const SwapConfig& cfg, const ImpactSettings& settings) {
  cfg.validate();
  Rng rng(cfg.seed);
  const auto rows = select_swap_indices(test.n_rows(), cfg.ratio, rng);
  const SwapResult swapped = single_swap(test, feature, rows, cfg.d_max, rng);
  return all_divergences(baseline, output_distribution(model, swapped.data, settings));
}

DivergenceScores divergence_of(const DoubleSwap& swap, const LogisticModel& model,
                               const ImpactSettings& settings) {
  return all_divergences(output_distribution(model, swap.first.data, settings),
                         output_distribution(model, swap.second.data, settings));
}

std::vector<std::size_t> draw_rows(const TabularDataset& test, const SwapConfig& cfg, Rng& rng) {
  cfg.validate();
  return select_swap_indices(test.n_rows(), cfg.ratio, rng);
}

}  // namespace

PredictionDistribution output_distribution(const LogisticModel& model, const TabularDataset& ds,
                                           const ImpactSettings& settings) {
  const auto probs = predict_proba(model, ds);
  return settings.label_mode ? label_distribution(probs)
                             : prediction_distribution(probs, settings.bins);
}

DivergenceScores controlled_direct_impact(const LogisticModel& model, const TabularDataset& test,
                                          const FeaturePartition& feature, const SwapConfig& cfg,
                                          const ImpactSettings& settings) {
  return cdi_against(output_distribution(model, test, settings), model, test, feature, cfg,
                     settings);
}

DivergenceScores controlled_direct_impact(const LogisticModel& model, const TabularDataset& test,
                                          std::size_t feature, const SwapConfig& cfg,
                                          const ImpactSettings& settings) {
  return controlled_direct_impact(model, test, partition_feature(test, feature), cfg, settings);
}

DivergenceScores natural_direct_impact(const LogisticModel& model, const TabularDataset& test,
                                       const FeaturePartition& feature,
                                       const FeaturePartition& mediator, const SwapConfig& cfg,
                                       const ImpactSettings& settings) {
  Rng rng(cfg.seed);
  const auto rows = draw_rows(test, cfg, rng);
  return divergence_of(double_swap_scenario1(test, feature, mediator, rows, cfg.d_max, rng), model,
                       settings);
}

DivergenceScores natural_indirect_impact(const LogisticModel& model, const TabularDataset& test,
                                         const FeaturePartition& feature,
                                         const FeaturePartition& mediator, const SwapConfig& cfg,
                                         const ImpactSettings& settings) {
  Rng rng(cfg.seed);
  const auto rows = draw_rows(test, cfg, rng);
  return divergence_of(double_swap_scenario2(test, feature, mediator, rows, cfg.d_max, rng), model,
                       settings);
}

NaturalImpactTotal total_natural_impact(std::span<const PairImpact> pairs, std::size_t feature) {
  NaturalImpactTotal out;
  for (const auto& p : pairs) {
    if (p.feature != feature) continue;
    out.no_mediators = false;
    out.total += p.ndi;
    out.total += p.nii;
  }
  return out;
}

std::uint64_t task_seed(std::uint64_t master, std::size_t fold, std::size_t feature,
                        std::uint64_t mediator, double ratio) {
  return derive_seed(master, {fold, feature, mediator, seed_component(ratio)});
}

FoldImpact analyze_fold(const LogisticModel& model, const TabularDataset& test, const FoldTask& task) {
  const std::size_t m = test.n_features();
  if (task.partitions.size() != m) throw Error("analyze_fold: one partition slot per feature required");
  FoldImpact out;
  out.fold = task.fold;
  const PredictionDistribution baseline = output_distribution(model, test, task.settings);

  for (double ratio : task.ratios) {
    std::vector<DivergenceScores> cdi(m);
    for (std::size_t j = 0; j < m; ++j) {
      if (!task.partitions[j]) continue;
      const SwapConfig cfg{ratio, task.d_max, task_seed(task.master_seed, task.fold, j, kNoMediator, ratio)};
      cdi[j] = cdi_against(baseline, model, test, *task.partitions[j], cfg, task.settings);
    }
    out.cdi.push_back(std::move(cdi));

    std::vector<PairImpact> pairs;
    pairs.reserve(task.pairs.size());
    for (const auto& [j, med] : task.pairs) {
      PairImpact p{j, med, {}, {}};
      if (task.partitions[j] && task.partitions[med]) {
        const SwapConfig cfg{ratio, task.d_max, task_seed(task.master_seed, task.fold, j, med, ratio)};
        p.ndi = natural_direct_impact(model, test, *task.partitions[j], *task.partitions[med], cfg,
                                      task.settings);
        p.nii = natural_indirect_impact(model, test, *task.partitions[j], *task.partitions[med], cfg,
                                        task.settings);
      }
      pairs.push_back(p);
    }
    out.pairs.push_back(std::move(pairs));
  }
  out.importance = global_importance(shap_linear(model, test));
  return out;
}

ImpactReport aggregate_impacts(std::vector<std::string> features, std::vector<double> ratios,
                               std::vector<std::pair<std::size_t, std::size_t>> pairs,
                               std::vector<FoldImpact> folds) {
  if (folds.empty()) throw Error("aggregate: no folds");
  ImpactReport r;
  r.features = std::move(features);
  r.ratios = std::move(ratios);
  r.pairs = std::move(pairs);
  r.folds = std::move(folds);
  const std::size_t m = r.features.size();
  const double k = static_cast<double>(r.folds.size());

  auto scale = [k](DivergenceScores s) {
    for (double& v : s.values) v /= k;
    return s;
  };

  r.cdi.assign(r.ratios.size(), std::vector<DivergenceScores>(m));
  r.pair_mean.resize(r.ratios.size());
  r.total_natural.assign(r.ratios.size(), std::vector<DivergenceScores>(m));
  for (std::size_t ri = 0; ri < r.ratios.size(); ++ri) {
    for (std::size_t j = 0; j < m; ++j) {
      DivergenceScores sum;
      for (const auto& f : r.folds) sum += f.cdi.at(ri).at(j);
      r.cdi[ri][j] = scale(sum);
    }
    for (std::size_t pi = 0; pi < r.pairs.size(); ++pi) {
      PairImpact mean{r.pairs[pi].first, r.pairs[pi].second, {}, {}};
      for (const auto& f : r.folds) {
        mean.ndi += f.pairs.at(ri).at(pi).ndi;
        mean.nii += f.pairs.at(ri).at(pi).nii;
      }
      mean.ndi = scale(mean.ndi);
      mean.nii = scale(mean.nii);
      r.pair_mean[ri].push_back(mean);
    }
    for (std::size_t j = 0; j < m; ++j) {
      r.total_natural[ri][j] = total_natural_impact(r.pair_mean[ri], j).total;
    }
  }
  r.has_mediators.assign(m, false);
  for (const auto& [j, med] : r.pairs) r.has_mediators[j] = true;

  r.importance.assign(m, 0.0);
  for (const auto& f : r.folds) {
    for (std::size_t j = 0; j < m; ++j) r.importance[j] += f.importance.at(j);
  }
  for (double& v : r.importance) v /= k;
  return r;
}

FeatureRanking rank_features(std::span<const double> scores) {
  FeatureRanking r;
  r.scores.assign(scores.begin(), scores.end());
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  r.ranks.resize(scores.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) r.ranks[order[pos]] = pos + 1;
  return r;
}

double ranking_stability(const FeatureRanking& a, const FeatureRanking& b) {
  if (a.ranks.size() != b.ranks.size()) throw Error("stability: rankings cover different feature sets");
  const std::size_t m = a.ranks.size();
  if (m < 2) throw Error("stability: need at least two features");
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = static_cast<double>(a.ranks[i]) - static_cast<double>(b.ranks[i]);
    sum += d * d;
  }
  // integers up to 2^53 are exact, so a single division rounds once
  const double md = static_cast<double>(m);
  const double denom = md * (md * md - 1.0);
  return (denom - sum) / denom;
}

std::string_view to_string(BiasImportanceLabel label) {
  switch (label) {
    case BiasImportanceLabel::MoreBiasMoreImportant: return "M_I M_Phi";
    case BiasImportanceLabel::MoreBiasLessImportant: return "M_I L_Phi";
    case BiasImportanceLabel::LessBiasMoreImportant: return "L_I M_Phi";
    case BiasImportanceLabel::LessBiasLessImportant: return "L_I L_Phi";
    case BiasImportanceLabel::Unlabeled: return "-";
  }
  return "-";
}

std::vector<BiasImportanceLabel> label_features(const FeatureRanking& bias,
                                                const FeatureRanking& importance,
                                                double top_fraction) {
  if (bias.ranks.size() != importance.ranks.size()) {
    throw Error("label_features: rankings cover different feature sets");
  }
  if (!(top_fraction > 0.0 && top_fraction <= 0.5)) {
    throw Error("label_features: top_fraction must lie in (0, 0.5]");
  }
  const std::size_t m = bias.ranks.size();
  const auto cut = static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(m)));
  enum class Level { More, Less, None };
  auto level = [&](std::size_t rank) {
    if (rank <= cut) return Level::More;
    if (rank + cut >= m + 1) return Level::Less;
    return Level::None;
  };
  std::vector<BiasImportanceLabel> out(m, BiasImportanceLabel::Unlabeled);
  for (std::size_t j = 0; j < m; ++j) {
    const Level b = level(bias.ranks[j]);
    const Level i = level(importance.ranks[j]);
    if (b == Level::None || i == Level::None) continue;
    if (b == Level::More) {
      out[j] = i == Level::More ? BiasImportanceLabel::MoreBiasMoreImportant
                                : BiasImportanceLabel::MoreBiasLessImportant;
    } else {
      out[j] = i == Level::More ? BiasImportanceLabel::LessBiasMoreImportant
                                : BiasImportanceLabel::LessBiasLessImportant;
    }
  }
  return out;
}

}  // namespace fairswap
