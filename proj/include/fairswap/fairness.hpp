#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairswap/dataset.hpp"
#include "fairswap/model.hpp"

namespace fairswap {

// Percentages in [0, 100].
struct PerformanceMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Group-fairness metrics; smaller is better for all of them. Rates with an
// empty denominator are taken as 0.
struct FairnessMetrics {
  double false_alarm = 0.0;     // FP / (FP + TN) over all rows
  double aod = 0.0;             // (|TPR_u - TPR_p| + |FPR_u - FPR_p|) / 2
  double spd = 0.0;             // |P(y^=1 | u) - P(y^=1 | p)|
  std::optional<double> dir;    // P(y^=1 | u) / P(y^=1 | p); empty when undefined
  double fpr_difference = 0.0;  // |FPR_u - FPR_p|
};

PerformanceMetrics performance_metrics(std::span<const int> y_true, std::span<const int> y_pred);

// `privileged[i]` is 1 for rows of the privileged group, 0 otherwise.
FairnessMetrics fairness_metrics(std::span<const int> y_true, std::span<const int> y_pred,
                                 std::span<const int> privileged);

struct TScore {
  double value = 0.0;
  bool dir_excluded = false;
};

// Sum of performance percentages minus sum of fairness metrics.
TScore t_score(const PerformanceMetrics& perf, const FairnessMetrics& fair);

// Two-sided rank-sum test. Exact enumeration when |a| + |b| <= 12, otherwise
// the tie- and continuity-corrected normal approximation.
double wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);
double wilcoxon_rank_sum_exact(std::span<const double> a, std::span<const double> b);
double wilcoxon_rank_sum_normal(std::span<const double> a, std::span<const double> b);

double cliffs_delta(std::span<const double> a, std::span<const double> b);

enum class Verdict { Win, Tie, Loss };
std::string_view to_string(Verdict v);

inline constexpr double kSignificance = 0.05;
inline constexpr double kNegligibleDelta = 0.147;

Verdict wtl_label(double p_value, double delta);

// Per-row weight P(g) P(c) / P(g, c). Throws if any group/class cell is empty.
std::vector<double> reweigh(std::span<const int> group, std::span<const int> target);

// Which side of a feature partition counts as privileged.
struct GroupSpec {
  std::size_t feature = 0;
  FeaturePartition partition;
  Category privileged = Category::C2;
};

GroupSpec make_group(const TabularDataset& ds, std::size_t feature,
                     Category privileged = Category::C2);
std::vector<int> group_membership(const TabularDataset& ds, const GroupSpec& group);

enum class ScenarioKind { Default, DropFeature, Reweigh };

struct Scenario {
  ScenarioKind kind = ScenarioKind::Default;
  std::string feature;  // DropFeature only

  std::string id() const;
};

inline constexpr std::array<std::string_view, 9> kScenarioMetrics = {
    "ACC", "PRE", "Recall", "F1", "F-alarm", "AOD", "SPD", "DIR", "FPR_D"};

struct FoldMetrics {
  PerformanceMetrics perf;
  FairnessMetrics fair;
};

struct ScenarioEvaluation {
  Scenario scenario;
  PerformanceMetrics perf;  // fold means
  FairnessMetrics fair;     // fold means; DIR over folds where it is defined
  TScore tscore;
  std::size_t rank = 0;     // by T-Score, 1 = best
  std::vector<FoldMetrics> per_fold;
  std::array<Verdict, kScenarioMetrics.size()> wtl{};  // vs Default
};

// Value of metric `index` (kScenarioMetrics order); empty for undefined DIR.
std::optional<double> metric_value(const FoldMetrics& m, std::size_t index);

// Trains one model per fold with the scenario applied and evaluates it on the
// test fold at threshold 0.5.
ScenarioEvaluation evaluate_scenario(const TabularDataset& ds, const ModelConfig& model,
                                     const Scenario& scenario, const GroupSpec& group,
                                     std::span<const FoldSplit> folds);

// Fills `wtl` from per-fold samples. Performance metrics win when higher,
// fairness metrics when lower.
void compare_to_default(ScenarioEvaluation& candidate, const ScenarioEvaluation& baseline);

void rank_scenarios(std::vector<ScenarioEvaluation>& evaluations);

}  // namespace fairswap
