#include "fairswap/audit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "fairswap/attribution.hpp"
#include "fairswap/csv.hpp"
#include "fairswap/error.hpp"

#ifndef FAIRSWAP_VERSION
#define FAIRSWAP_VERSION "dev"
#endif

namespace fairswap {

namespace {

using nlohmann::json;

const std::set<std::string> kConfigKeys = {
    "data", "target", "positive_label", "group_feature", "privileged", "categorical",
    "continuous", "temporal_order", "strict_order", "swap_ratios", "d_max", "bins",
    "label_mode", "folds", "correlation_threshold", "seed", "divergences", "scenarios",
    "top_fraction", "reference_ratio", "model", "threads", "output_dir"};

const std::set<std::string> kModelKeys = {"learning_rate", "max_iterations", "l2", "tolerance"};

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string ratio_key(double r) { return csv::format_double(r); }

std::size_t reference_index(const std::vector<double>& ratios, double reference) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    if (std::abs(ratios[i] - reference) < std::abs(ratios[best] - reference)) best = i;
  }
  return best;
}

std::vector<double> scores_for(const std::vector<DivergenceScores>& per_feature, DivergenceKind kind) {
  std::vector<double> out;
  out.reserve(per_feature.size());
  for (const auto& s : per_feature) out.push_back(s[kind]);
  return out;
}

ordered_json scores_json(const DivergenceScores& s, const std::vector<DivergenceKind>& kinds) {
  ordered_json out = ordered_json::object();
  for (DivergenceKind k : kinds) out[std::string(to_string(k))] = s[k];
  return out;
}

Scenario parse_scenario(const std::string& spec, const std::string& top_bias) {
  if (spec == "default") return {ScenarioKind::Default, ""};
  if (spec == "reweigh") return {ScenarioKind::Reweigh, ""};
  if (spec.rfind("drop:", 0) == 0) {
    std::string feature = spec.substr(5);
    if (feature == "top_bias") feature = top_bias;
    return {ScenarioKind::DropFeature, feature};
  }
  throw Error("unknown scenario '" + spec + "'");
}

std::string joined_rows(const std::vector<csv::Row>& rows) {
  std::ostringstream out;
  for (const auto& r : rows) csv::write_row(out, r);
  return out.str();
}

std::string cell(const json& v) {
  if (v.is_null()) return "-";
  if (v.is_number()) return csv::format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

void AuditConfig::validate() const {
  if (target.empty()) throw Error("config: 'target' is required");
  if (swap_ratios.empty()) throw Error("config: 'swap_ratios' must not be empty");
  for (double r : swap_ratios) {
    if (!(r > 0.0 && r <= 1.0)) throw Error("config: swap ratios must lie in (0, 1]");
  }
  if (!(d_max >= 0.0)) throw Error("config: 'd_max' must be non-negative");
  if (bins < 2) throw Error("config: 'bins' must be at least 2");
  if (folds < 2) throw Error("config: 'folds' must be at least 2");
  if (!(correlation_threshold >= 0.0 && correlation_threshold <= 1.0)) {
    throw Error("config: 'correlation_threshold' must lie in [0, 1]");
  }
  if (divergences.empty()) throw Error("config: 'divergences' must not be empty");
  if (!(top_fraction > 0.0 && top_fraction <= 0.5)) throw Error("config: 'top_fraction' must lie in (0, 0.5]");
  if (privileged != "C1" && privileged != "C2") throw Error("config: 'privileged' must be C1 or C2");
  if (threads < 1) throw Error("config: 'threads' must be at least 1");
  if (!(model.learning_rate > 0.0) || model.l2 < 0.0) throw Error("config: invalid model settings");
}

AuditConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw Error("config: expected a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!kConfigKeys.count(key)) throw Error("config: unknown key '" + key + "'");
  }
  AuditConfig c;
  try {
    c.data_path = doc.value("data", c.data_path);
    c.target = doc.value("target", c.target);
    c.positive_label = doc.value("positive_label", c.positive_label);
    c.group_feature = doc.value("group_feature", c.group_feature);
    c.privileged = doc.value("privileged", c.privileged);
    c.categorical = doc.value("categorical", c.categorical);
    c.continuous = doc.value("continuous", c.continuous);
    c.temporal_order = doc.value("temporal_order", c.temporal_order);
    c.strict_order = doc.value("strict_order", c.strict_order);
    c.swap_ratios = doc.value("swap_ratios", c.swap_ratios);
    if (doc.contains("d_max")) {
      c.d_max = doc["d_max"].is_null() ? kUnboundedDistortion : doc["d_max"].get<double>();
    }
    c.bins = doc.value("bins", c.bins);
    c.label_mode = doc.value("label_mode", c.label_mode);
    c.folds = doc.value("folds", c.folds);
    c.correlation_threshold = doc.value("correlation_threshold", c.correlation_threshold);
    c.seed = doc.value("seed", c.seed);
    if (doc.contains("divergences")) {
      c.divergences.clear();
      for (const auto& name : doc["divergences"]) {
        const auto kind = parse_divergence(name.get<std::string>());
        if (!kind) throw Error("config: unknown divergence '" + name.get<std::string>() + "'");
        if (std::find(c.divergences.begin(), c.divergences.end(), *kind) == c.divergences.end()) {
          c.divergences.push_back(*kind);
        }
      }
    }
    c.scenarios = doc.value("scenarios", c.scenarios);
    c.top_fraction = doc.value("top_fraction", c.top_fraction);
    c.reference_ratio = doc.value("reference_ratio", c.reference_ratio);
    if (doc.contains("model")) {
      const auto& m = doc["model"];
      for (const auto& [key, _] : m.items()) {
        if (!kModelKeys.count(key)) throw Error("config: unknown model key '" + key + "'");
      }
      c.model.learning_rate = m.value("learning_rate", c.model.learning_rate);
      c.model.max_iterations = m.value("max_iterations", c.model.max_iterations);
      c.model.l2 = m.value("l2", c.model.l2);
      c.model.tolerance = m.value("tolerance", c.model.tolerance);
    }
    c.threads = doc.value("threads", c.threads);
    c.output_dir = doc.value("output_dir", c.output_dir);
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.model.seed = c.seed;
  return c;
}

ordered_json to_json(const AuditConfig& c) {
  ordered_json kinds = ordered_json::array();
  for (DivergenceKind k : c.divergences) kinds.push_back(std::string(to_string(k)));
  ordered_json out;
  out["data"] = c.data_path;
  out["target"] = c.target;
  out["positive_label"] = c.positive_label;
  out["group_feature"] = c.group_feature;
  out["privileged"] = c.privileged;
  out["categorical"] = c.categorical;
  out["continuous"] = c.continuous;
  out["temporal_order"] = c.temporal_order;
  out["strict_order"] = c.strict_order;
  out["swap_ratios"] = c.swap_ratios;
  out["d_max"] = std::isinf(c.d_max) ? ordered_json(nullptr) : ordered_json(c.d_max);
  out["bins"] = c.bins;
  out["label_mode"] = c.label_mode;
  out["folds"] = c.folds;
  out["correlation_threshold"] = c.correlation_threshold;
  out["seed"] = c.seed;
  out["divergences"] = kinds;
  out["scenarios"] = c.scenarios;
  out["top_fraction"] = c.top_fraction;
  out["reference_ratio"] = c.reference_ratio;
  out["model"] = {{"learning_rate", c.model.learning_rate},
                  {"max_iterations", c.model.max_iterations},
                  {"l2", c.model.l2},
                  {"tolerance", c.model.tolerance}};
  out["threads"] = c.threads;
  out["output_dir"] = c.output_dir;
  return out;
}

AuditConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("config: " + std::string(e.what()));
  }
  AuditConfig c = config_from_json(doc);
  // data paths are relative to the config file
  if (!c.data_path.empty() && std::filesystem::path(c.data_path).is_relative()) {
    c.data_path = (path.parent_path() / c.data_path).lexically_normal().string();
  }
  return c;
}

AuditReport run_audit(const AuditConfig& config) {
  stage("config", [&] { config.validate(); });
  if (config.data_path.empty()) throw StageError("config", "'data' is required");
  const TabularDataset data = stage("load", [&] {
    LoadOptions opts;
    opts.target = config.target;
    opts.categorical = config.categorical;
    opts.continuous = config.continuous;
    opts.positive_label = config.positive_label;
    return load_csv(config.data_path, opts);
  });
  return run_audit(config, data);
}

AuditReport run_audit(const AuditConfig& config, const TabularDataset& data) {
  stage("config", [&] { config.validate(); });
  AuditReport report;
  report.config = config;
  report.version = FAIRSWAP_VERSION;

  // Filter correlated and constant features.
  const TabularDataset ds = stage("filter", [&] {
    auto filtered = drop_correlated(data, config.correlation_threshold);
    report.dropped_correlated = filtered.dropped;
    std::vector<std::size_t> constant;
    for (std::size_t j = 0; j < filtered.dataset.n_features(); ++j) {
      const auto col = filtered.dataset.column(j);
      if (std::adjacent_find(col.begin(), col.end(), std::not_equal_to<>()) == col.end()) {
        constant.push_back(j);
        report.dropped_constant.push_back(filtered.dataset.name(j));
      }
    }
    TabularDataset out = filtered.dataset.without_features(constant);
    if (out.n_features() == 0) throw Error("no features left after filtering");
    return out;
  });
  report.schema = ds.schema();
  report.n_rows = ds.n_rows();

  report.order = stage("order", [&] {
    std::vector<std::string> user;
    for (const auto& name : config.temporal_order) {
      if (!data.index_of(name)) throw Error("temporal order names unknown feature '" + name + "'");
      if (!ds.index_of(name)) {
        report.warnings.push_back("temporal order: '" + name + "' was removed by filtering and is ignored");
        continue;
      }
      user.push_back(name);
    }
    TemporalOrder order = temporal_order(ds, user, config.strict_order);
    for (const auto& v : order.violations) {
      report.warnings.push_back("temporal order: '" + ds.name(v.earlier) + "' precedes '" +
                                ds.name(v.later) + "' but its event frequency " +
                                csv::format_double(v.p_earlier) + " is not above " +
                                csv::format_double(v.p_later));
    }
    return order;
  });

  const auto folds = stage("folds", [&] {
    return kfold_split(ds.n_rows(), config.folds, derive_seed(config.seed, {0xF01DULL}));
  });

  std::vector<std::optional<FeaturePartition>> partitions(ds.n_features());
  stage("partition", [&] {
    for (std::size_t j = 0; j < ds.n_features(); ++j) partitions[j] = partition_feature(ds, j);
  });
  const auto pairs = mediator_pairs(report.order);

  // Per-fold analysis; folds are independent and seeded by index.
  std::vector<FoldImpact> fold_results(folds.size());
  report.fold_models.resize(folds.size());
  stage("analysis", [&] {
    std::vector<std::exception_ptr> errors(folds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t f = next++; f < folds.size(); f = next++) {
        try {
          const TabularDataset train = ds.subset(folds[f].train);
          const TabularDataset test = ds.subset(folds[f].test);
          report.fold_models[f] = fit_logistic(train, config.model);
          FoldTask task;
          task.fold = f;
          task.master_seed = config.seed;
          task.ratios = config.swap_ratios;
          task.d_max = config.d_max;
          task.partitions = partitions;
          task.pairs = pairs;
          task.settings = {config.bins, config.label_mode};
          fold_results[f] = analyze_fold(report.fold_models[f], test, task);
        } catch (...) {
          errors[f] = std::current_exception();
        }
      }
    };
    const std::size_t n_threads = std::min(config.threads, folds.size());
    if (n_threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    for (std::size_t f = 0; f < errors.size(); ++f) {
      if (!errors[f]) continue;
      try {
        std::rethrow_exception(errors[f]);
      } catch (const std::exception& e) {
        throw Error("fold " + std::to_string(f) + ": " + e.what());
      }
    }
  });

  report.impact = stage("aggregate", [&] {
    return aggregate_impacts(ds.feature_names(), config.swap_ratios, pairs, std::move(fold_results));
  });

  stage("rank", [&] {
    const std::size_t ri = reference_index(config.swap_ratios, config.reference_ratio);
    report.reference_ratio = config.swap_ratios[ri];
    report.importance_ranking = rank_features(report.impact.importance);
    for (DivergenceKind kind : config.divergences) {
      DivergenceRanking r;
      r.kind = kind;
      r.single_swap = rank_features(scores_for(report.impact.cdi[ri], kind));
      r.double_swap = rank_features(scores_for(report.impact.total_natural[ri], kind));
      if (ds.n_features() >= 2) {
        r.stability_single = ranking_stability(r.single_swap, report.importance_ranking);
        r.stability_double = ranking_stability(r.double_swap, report.importance_ranking);
      } else {
        r.stability_single = r.stability_double = 1.0;
      }
      r.labels = label_features(r.single_swap, report.importance_ranking, config.top_fraction);
      report.rankings.push_back(std::move(r));
    }
  });

  if (!config.group_feature.empty()) {
    stage("scenarios", [&] {
      const auto g = ds.index_of(config.group_feature);
      if (!g) {
        throw Error(data.index_of(config.group_feature)
                        ? "group feature '" + config.group_feature + "' was removed by filtering"
                        : "unknown group feature '" + config.group_feature + "'");
      }
      const GroupSpec group{*g, *partitions[*g],
                            config.privileged == "C1" ? Category::C1 : Category::C2};

      const auto& primary = report.rankings.front();
      std::size_t top = 0;
      for (std::size_t j = 0; j < ds.n_features(); ++j) {
        if (primary.single_swap.ranks[j] == 1) top = j;
      }
      std::vector<Scenario> scenarios{{ScenarioKind::Default, ""}};
      std::set<std::string> seen{"default"};
      for (const auto& spec : config.scenarios) {
        Scenario s = parse_scenario(spec, ds.name(top));
        if (s.kind == ScenarioKind::DropFeature && !ds.index_of(s.feature)) {
          throw Error("scenario '" + spec + "' names unknown feature '" + s.feature + "'");
        }
        if (seen.insert(s.id()).second) scenarios.push_back(s);
      }
      for (const auto& s : scenarios) {
        report.scenarios.push_back(evaluate_scenario(ds, config.model, s, group, folds));
        std::string label = "Default";
        if (s.kind == ScenarioKind::Reweigh) label = "Reweighing";
        if (s.kind == ScenarioKind::DropFeature) {
          label = std::string(to_string(primary.labels[*ds.index_of(s.feature)]));
        }
        report.scenario_labels.push_back(label);
      }
      for (auto& e : report.scenarios) compare_to_default(e, report.scenarios.front());
      rank_scenarios(report.scenarios);
    });
  }
  return report;
}

ordered_json report_to_json(const AuditReport& r) {
  const auto& kinds = r.config.divergences;
  const auto& names = r.impact.features;
  ordered_json out;
  out["version"] = r.version;
  // execution settings do not influence results and stay out of the report
  ordered_json echo = to_json(r.config);
  echo.erase("threads");
  echo.erase("output_dir");
  out["config"] = echo;

  ordered_json schema = ordered_json::array();
  for (const auto& f : r.schema.features) {
    ordered_json item;
    item["name"] = f.name;
    item["kind"] = to_string(f.kind);
    item["min"] = f.min;
    item["max"] = f.max;
    if (f.kind == FeatureKind::Categorical) item["codes"] = f.codes;
    if (!f.levels.empty()) item["levels"] = f.levels;
    schema.push_back(item);
  }
  out["data"] = {{"rows", r.n_rows},
                 {"schema", schema},
                 {"dropped_correlated", r.dropped_correlated},
                 {"dropped_constant", r.dropped_constant}};
  out["warnings"] = r.warnings;

  ordered_json order;
  ordered_json order_names = ordered_json::array();
  ordered_json order_detail = ordered_json::array();
  for (std::size_t j : r.order.order) {
    order_names.push_back(names[j]);
    order_detail.push_back({{"feature", names[j]},
                            {"provenance", r.order.provenance[j] == OrderProvenance::UserSpecified
                                               ? "user"
                                               : "inferred"},
                            {"event_probability", r.order.event_probability[j]}});
  }
  order["order"] = order_names;
  order["features"] = order_detail;
  ordered_json violations = ordered_json::array();
  for (const auto& v : r.order.violations) {
    violations.push_back({{"earlier", names[v.earlier]}, {"later", names[v.later]},
                          {"p_earlier", v.p_earlier}, {"p_later", v.p_later}});
  }
  order["violations"] = violations;
  out["temporal_order"] = order;

  // impact: fold -> feature -> mediator -> ratio -> kind -> score
  const auto& imp = r.impact;
  auto feature_block = [&](const std::vector<std::vector<DivergenceScores>>& cdi,
                           const std::vector<std::vector<PairImpact>>& pairs, std::size_t j) {
    ordered_json block;
    ordered_json cdi_json;
    for (std::size_t ri = 0; ri < imp.ratios.size(); ++ri) {
      cdi_json[ratio_key(imp.ratios[ri])] = scores_json(cdi[ri][j], kinds);
    }
    block["cdi"] = cdi_json;
    ordered_json meds = ordered_json::object();
    for (std::size_t pi = 0; pi < imp.pairs.size(); ++pi) {
      if (imp.pairs[pi].first != j) continue;
      ordered_json per_ratio;
      for (std::size_t ri = 0; ri < imp.ratios.size(); ++ri) {
        per_ratio[ratio_key(imp.ratios[ri])] = {{"ndi", scores_json(pairs[ri][pi].ndi, kinds)},
                                                {"nii", scores_json(pairs[ri][pi].nii, kinds)}};
      }
      meds[names[imp.pairs[pi].second]] = per_ratio;
    }
    block["mediators"] = meds;
    return block;
  };

  ordered_json impact;
  impact["ratios"] = imp.ratios;
  impact["reference_ratio"] = r.reference_ratio;
  ordered_json folds = ordered_json::array();
  for (const auto& f : imp.folds) {
    ordered_json fj;
    fj["fold"] = f.fold;
    ordered_json features;
    for (std::size_t j = 0; j < names.size(); ++j) {
      auto block = feature_block(f.cdi, f.pairs, j);
      block["shap_importance"] = f.importance[j];
      features[names[j]] = block;
    }
    fj["features"] = features;
    folds.push_back(fj);
  }
  impact["folds"] = folds;
  ordered_json mean;
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto block = feature_block(imp.cdi, imp.pair_mean, j);
    ordered_json tni;
    for (std::size_t ri = 0; ri < imp.ratios.size(); ++ri) {
      tni[ratio_key(imp.ratios[ri])] = scores_json(imp.total_natural[ri][j], kinds);
    }
    block["total_natural"] = tni;
    block["no_mediators"] = !imp.has_mediators[j];
    block["shap_importance"] = imp.importance[j];
    mean[names[j]] = block;
  }
  impact["mean"] = mean;
  out["impact"] = impact;

  ordered_json rankings = ordered_json::array();
  for (const auto& rk : r.rankings) {
    ordered_json item;
    item["divergence"] = to_string(rk.kind);
    item["stability_single_vs_shap"] = rk.stability_single;
    item["stability_double_vs_shap"] = rk.stability_double;
    ordered_json feats = ordered_json::array();
    for (std::size_t j = 0; j < names.size(); ++j) {
      feats.push_back({{"feature", names[j]},
                       {"single_score", rk.single_swap.scores[j]},
                       {"single_rank", rk.single_swap.ranks[j]},
                       {"double_score", rk.double_swap.scores[j]},
                       {"double_rank", rk.double_swap.ranks[j]},
                       {"shap_importance", r.importance_ranking.scores[j]},
                       {"shap_rank", r.importance_ranking.ranks[j]},
                       {"label", to_string(rk.labels[j])}});
    }
    item["features"] = feats;
    rankings.push_back(item);
  }
  out["rankings"] = rankings;

  ordered_json scenarios = ordered_json::array();
  for (std::size_t s = 0; s < r.scenarios.size(); ++s) {
    const auto& e = r.scenarios[s];
    ordered_json item;
    item["id"] = e.scenario.id();
    item["feature"] = r.config.group_feature;
    item["label"] = r.scenario_labels[s];
    item["pbf"] = e.scenario.kind == ScenarioKind::DropFeature ? e.scenario.feature : "-";
    ordered_json metrics;
    FoldMetrics means{e.perf, e.fair};
    for (std::size_t m = 0; m < kScenarioMetrics.size(); ++m) {
      const auto v = metric_value(means, m);
      metrics[std::string(kScenarioMetrics[m])] = v ? ordered_json(*v) : ordered_json(nullptr);
    }
    item["metrics"] = metrics;
    item["t_score"] = e.tscore.value;
    item["dir_excluded"] = e.tscore.dir_excluded;
    item["rank"] = e.rank;
    ordered_json wtl;
    for (std::size_t m = 0; m < kScenarioMetrics.size(); ++m) {
      wtl[std::string(kScenarioMetrics[m])] = to_string(e.wtl[m]);
    }
    item["wtl"] = wtl;
    ordered_json per_fold = ordered_json::array();
    for (const auto& f : e.per_fold) {
      ordered_json fm;
      for (std::size_t m = 0; m < kScenarioMetrics.size(); ++m) {
        const auto v = metric_value(f, m);
        fm[std::string(kScenarioMetrics[m])] = v ? ordered_json(*v) : ordered_json(nullptr);
      }
      per_fold.push_back(fm);
    }
    item["per_fold"] = per_fold;
    scenarios.push_back(item);
  }
  out["scenarios"] = scenarios;
  return out;
}

std::string render_impact_table(const ordered_json& report) {
  try {
    const auto& order = report.at("temporal_order").at("order");
    const auto& impact = report.at("impact");
    const auto& mean = impact.at("mean");
    std::vector<std::string> names;
    for (const auto& n : order) names.push_back(n.get<std::string>());

    std::vector<csv::Row> rows;
    csv::Row header{"divergence", "ratio", "feature", "cdi"};
    for (const auto& n : names) header.push_back(n);
    header.push_back("total_natural");
    rows.push_back(header);
    for (const auto& kind_json : report.at("config").at("divergences")) {
      const std::string kind = kind_json.get<std::string>();
      for (const auto& ratio_json : impact.at("ratios")) {
        const std::string rk = ratio_key(ratio_json.get<double>());
        for (const auto& name : names) {
          const auto& block = mean.at(name);
          csv::Row row{kind, rk, name, cell(block.at("cdi").at(rk).at(kind))};
          const auto& meds = block.at("mediators");
          for (const auto& med : names) {
            if (!meds.contains(med)) {
              row.emplace_back("");
              continue;
            }
            const auto& pr = meds.at(med).at(rk);
            row.push_back(csv::format_double(pr.at("ndi").at(kind).get<double>() +
                                             pr.at("nii").at(kind).get<double>()));
          }
          row.push_back(cell(block.at("total_natural").at(rk).at(kind)));
          rows.push_back(std::move(row));
        }
      }
    }
    return joined_rows(rows);
  } catch (const json::exception& e) {
    throw Error(std::string("report: malformed impact section: ") + e.what());
  }
}

std::string render_scenario_table(const ordered_json& report) {
  try {
    std::vector<csv::Row> rows;
    csv::Row header{"Feature", "Label", "PBF"};
    for (auto m : kScenarioMetrics) header.emplace_back(m);
    header.push_back("T-Score");
    header.push_back("RANK");
    for (auto m : kScenarioMetrics) header.push_back("WTL_" + std::string(m));
    rows.push_back(header);
    for (const auto& s : report.at("scenarios")) {
      csv::Row row{cell(s.at("feature")), cell(s.at("label")), cell(s.at("pbf"))};
      for (auto m : kScenarioMetrics) row.push_back(cell(s.at("metrics").at(std::string(m))));
      row.push_back(cell(s.at("t_score")));
      row.push_back(cell(s.at("rank")));
      for (auto m : kScenarioMetrics) row.push_back(cell(s.at("wtl").at(std::string(m))));
      rows.push_back(std::move(row));
    }
    return joined_rows(rows);
  } catch (const json::exception& e) {
    throw Error(std::string("report: malformed scenario section: ") + e.what());
  }
}

std::vector<PlotBundle> emit_plot_data(const AuditReport& report) {
  const auto& imp = report.impact;
  const auto& names = imp.features;
  const auto& kinds = report.config.divergences;
  const csv::Row header{"feature", "ratio", "divergence", "metric", "value"};

  std::vector<csv::Row> single{header};
  std::vector<csv::Row> dbl{header};
  for (std::size_t j = 0; j < names.size(); ++j) {
    for (std::size_t ri = 0; ri < imp.ratios.size(); ++ri) {
      const std::string rk = ratio_key(imp.ratios[ri]);
      for (DivergenceKind k : kinds) {
        const std::string kind(to_string(k));
        single.push_back({names[j], rk, kind, "cdi", csv::format_double(imp.cdi[ri][j][k])});
        for (std::size_t pi = 0; pi < imp.pairs.size(); ++pi) {
          if (imp.pairs[pi].first != j) continue;
          const auto& med = names[imp.pairs[pi].second];
          dbl.push_back({names[j], rk, kind, "ndi:" + med,
                         csv::format_double(imp.pair_mean[ri][pi].ndi[k])});
          dbl.push_back({names[j], rk, kind, "nii:" + med,
                         csv::format_double(imp.pair_mean[ri][pi].nii[k])});
        }
        dbl.push_back({names[j], rk, kind, "total_natural",
                       csv::format_double(imp.total_natural[ri][j][k])});
        if (!imp.has_mediators[j]) dbl.push_back({names[j], rk, kind, "no_mediators", "1"});
      }
    }
  }
  std::vector<csv::Row> importance{header};
  for (std::size_t j = 0; j < names.size(); ++j) {
    importance.push_back({names[j], "-", "shap", "mean_abs_phi", csv::format_double(imp.importance[j])});
  }
  return {{"single_swap.csv", joined_rows(single)},
          {"double_swap.csv", joined_rows(dbl)},
          {"importance.csv", joined_rows(importance)}};
}

std::vector<PlotRow> parse_plot_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw Error("plot csv: empty");
  std::string header;
  for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
  if (header != kPlotHeader) throw Error("plot csv: unexpected header '" + header + "'");
  std::vector<PlotRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 5) throw Error("plot csv: row " + std::to_string(r + 1) + " has wrong width");
    PlotRow p;
    p.feature = row[0];
    if (row[1] != "-") {
      double v = 0.0;
      if (!csv::parse_double(row[1], v)) throw Error("plot csv: bad ratio '" + row[1] + "'");
      p.ratio = v;
    }
    p.divergence = row[2];
    p.metric = row[3];
    if (!csv::parse_double(row[4], p.value)) throw Error("plot csv: bad value '" + row[4] + "'");
    out.push_back(std::move(p));
  }
  return out;
}

void write_report(const AuditReport& report, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const ordered_json doc = report_to_json(report);
  // render everything before touching the filesystem
  std::vector<std::pair<fs::path, std::string>> files;
  files.emplace_back("report.json", doc.dump(2) + "\n");
  ordered_json models = ordered_json::array();
  for (std::size_t f = 0; f < report.fold_models.size(); ++f) {
    ordered_json m = to_json(report.fold_models[f]);
    m["fold"] = f;
    models.push_back(m);
  }
  files.emplace_back("models.json", models.dump(2) + "\n");
  files.emplace_back("impact_table.csv", render_impact_table(doc));
  if (!report.scenarios.empty()) files.emplace_back("scenarios.csv", render_scenario_table(doc));
  for (auto& bundle : emit_plot_data(report)) {
    files.emplace_back(fs::path("plots") / bundle.name, std::move(bundle.csv));
  }

  std::error_code ec;
  fs::create_directories(dir / "plots", ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  for (const auto& [name, text] : files) write_text(dir / name, text);
}

}  // namespace fairswap
