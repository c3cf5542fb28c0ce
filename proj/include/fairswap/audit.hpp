#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fairswap/dataset.hpp"
#include "fairswap/divergence.hpp"
#include "fairswap/fairness.hpp"
#include "fairswap/impact.hpp"
#include "fairswap/model.hpp"
#include "fairswap/swap.hpp"

namespace fairswap {

using ordered_json = nlohmann::ordered_json;

struct AuditConfig {
  std::string data_path;
  std::string target;
  std::string positive_label;
  // Fairness metrics and reweighing are computed against this feature.
  // Empty: no scenario evaluation.
  std::string group_feature;
  // "C1" or "C2": which side of the group feature's partition is privileged.
  std::string privileged = "C2";
  std::vector<std::string> categorical;
  std::vector<std::string> continuous;
  std::vector<std::string> temporal_order;
  bool strict_order = false;
  std::vector<double> swap_ratios = {0.1, 0.3, 0.5, 0.7};
  double d_max = 0.2;  // kUnboundedDistortion (JSON null) disables the check
  std::size_t bins = 10;
  bool label_mode = false;
  std::size_t folds = 10;
  double correlation_threshold = 0.8;
  std::uint64_t seed = 0;
  std::vector<DivergenceKind> divergences = {kAllDivergences.begin(), kAllDivergences.end()};
  // "default", "reweigh", "drop:<feature>", "drop:top_bias"
  std::vector<std::string> scenarios = {"default", "drop:top_bias", "reweigh"};
  double top_fraction = 1.0 / 3.0;
  // Ratio whose scores feed rankings, labels and the top_bias scenario; the
  // closest configured ratio is used.
  double reference_ratio = 0.5;
  ModelConfig model;
  std::size_t threads = 1;
  std::string output_dir = "audit_out";

  void validate() const;
};

AuditConfig config_from_json(const nlohmann::json& doc);
ordered_json to_json(const AuditConfig& config);
AuditConfig load_config(const std::filesystem::path& path);

struct DivergenceRanking {
  DivergenceKind kind = DivergenceKind::Hellinger;
  FeatureRanking single_swap;
  FeatureRanking double_swap;
  double stability_single = 0.0;  // vs SHAP ranking
  double stability_double = 0.0;
  std::vector<BiasImportanceLabel> labels;  // single-swap ranking vs SHAP
};

struct AuditReport {
  AuditConfig config;
  std::string version;
  FeatureSchema schema;  // analysed features
  std::size_t n_rows = 0;
  std::vector<std::string> dropped_correlated;
  std::vector<std::string> dropped_constant;
  std::vector<std::string> warnings;
  TemporalOrder order;
  ImpactReport impact;
  double reference_ratio = 0.0;
  FeatureRanking importance_ranking;
  std::vector<DivergenceRanking> rankings;
  std::vector<ScenarioEvaluation> scenarios;
  std::vector<std::string> scenario_labels;
  std::vector<LogisticModel> fold_models;
};

// load -> filter -> order -> folds -> per-fold analysis -> aggregate ->
// rankings -> scenarios. Nothing is written; failures throw StageError.
AuditReport run_audit(const AuditConfig& config);
AuditReport run_audit(const AuditConfig& config, const TabularDataset& data);

ordered_json report_to_json(const AuditReport& report);

// Impact table CSV: one row per
// (divergence, ratio, feature) with a column per mediator.
std::string render_impact_table(const ordered_json& report);
std::string render_scenario_table(const ordered_json& report);

struct PlotBundle {
  std::string name;  // file name
  std::string csv;
};

inline constexpr std::string_view kPlotHeader = "feature,ratio,divergence,metric,value";

// Long-format CSV per figure family: single_swap.csv, double_swap.csv,
// importance.csv. Header: feature,ratio,divergence,metric,value.
std::vector<PlotBundle> emit_plot_data(const AuditReport& report);

struct PlotRow {
  std::string feature;
  std::optional<double> ratio;
  std::string divergence;
  std::string metric;
  double value = 0.0;
};

std::vector<PlotRow> parse_plot_csv(std::string_view text);

// Writes report.json, models.json, impact_table.csv, scenarios.csv and the
// plot bundles under plots/. Everything is rendered before the first write.
void write_report(const AuditReport& report, const std::filesystem::path& dir);

}  // namespace fairswap
