#include "fairswap/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairswap/error.hpp"

namespace fairswap {

namespace {

double rate(double num, double den) { return den > 0.0 ? num / den : 0.0; }

struct Confusion {
  double tp = 0, fp = 0, tn = 0, fn = 0;

  void add(int truth, int pred) {
    if (truth) (pred ? tp : fn) += 1;
    else (pred ? fp : tn) += 1;
  }
  double tpr() const { return rate(tp, tp + fn); }
  double fpr() const { return rate(fp, fp + tn); }
  double positive_rate() const { return rate(tp + fp, tp + fp + tn + fn); }
};

void check_binary(std::span<const int> v, const char* what) {
  for (int x : v) {
    if (x != 0 && x != 1) throw Error(std::string(what) + " must be 0/1");
  }
}

// Mid-ranks of the pooled sample, doubled so they are integers.
std::vector<long> doubled_midranks(std::span<const double> pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<long> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t k = i;
    while (k + 1 < n && pooled[order[k + 1]] == pooled[order[i]]) ++k;
    // positions i..k share rank ((i+1) + (k+1)) / 2
    const long doubled = static_cast<long>(i + 1 + k + 1);
    for (std::size_t t = i; t <= k; ++t) ranks[order[t]] = doubled;
    i = k + 1;
  }
  return ranks;
}

std::vector<double> pooled(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void check_samples(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error("rank-sum: both samples must be non-empty");
}

bool lower_is_better(std::size_t metric) { return metric >= 4; }

}  // namespace

PerformanceMetrics performance_metrics(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) {
    throw Error("performance_metrics: label vectors must be non-empty and equal length");
  }
  check_binary(y_true, "y_true");
  check_binary(y_pred, "y_pred");
  Confusion c;
  for (std::size_t i = 0; i < y_true.size(); ++i) c.add(y_true[i], y_pred[i]);
  PerformanceMetrics m;
  m.accuracy = 100.0 * (c.tp + c.tn) / static_cast<double>(y_true.size());
  const double precision = rate(c.tp, c.tp + c.fp);
  const double recall = rate(c.tp, c.tp + c.fn);
  m.precision = 100.0 * precision;
  m.recall = 100.0 * recall;
  m.f1 = precision + recall > 0.0 ? 100.0 * 2.0 * precision * recall / (precision + recall) : 0.0;
  return m;
}

FairnessMetrics fairness_metrics(std::span<const int> y_true, std::span<const int> y_pred,
                                 std::span<const int> privileged) {
  if (y_true.size() != y_pred.size() || y_true.size() != privileged.size()) {
    throw Error("fairness_metrics: vectors must have equal length");
  }
  check_binary(y_true, "y_true");
  check_binary(y_pred, "y_pred");
  check_binary(privileged, "group membership");
  Confusion all, priv, unpriv;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    all.add(y_true[i], y_pred[i]);
    (privileged[i] ? priv : unpriv).add(y_true[i], y_pred[i]);
  }
  if (priv.tp + priv.fp + priv.tn + priv.fn == 0) throw Error("fairness_metrics: privileged group is empty");
  if (unpriv.tp + unpriv.fp + unpriv.tn + unpriv.fn == 0) {
    throw Error("fairness_metrics: unprivileged group is empty");
  }
  FairnessMetrics f;
  f.false_alarm = all.fpr();
  f.spd = std::abs(unpriv.positive_rate() - priv.positive_rate());
  f.fpr_difference = std::abs(unpriv.fpr() - priv.fpr());
  f.aod = 0.5 * (std::abs(unpriv.tpr() - priv.tpr()) + f.fpr_difference);
  if (priv.positive_rate() > 0.0) f.dir = unpriv.positive_rate() / priv.positive_rate();
  return f;
}

TScore t_score(const PerformanceMetrics& perf, const FairnessMetrics& fair) {
  TScore t;
  const double gain = perf.accuracy + perf.precision + perf.recall + perf.f1;
  double cost = fair.false_alarm + fair.aod + fair.spd + fair.fpr_difference;
  if (fair.dir) cost += *fair.dir;
  t.dir_excluded = !fair.dir.has_value();
  t.value = gain - cost;
  return t;
}

double wilcoxon_rank_sum_exact(std::span<const double> a, std::span<const double> b) {
  check_samples(a, b);
  const auto all = pooled(a, b);
  const auto ranks = doubled_midranks(all);
  const std::size_t n1 = a.size();
  const std::size_t n = all.size();
  const long max_sum = std::accumulate(ranks.begin(), ranks.end(), 0L);

  // ways[k][s]: number of k-subsets of the pooled ranks with doubled rank sum s
  std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
  ways[0][0] = 1.0;
  for (std::size_t item = 0; item < n; ++item) {
    const auto r = static_cast<std::size_t>(ranks[item]);
    for (std::size_t k = std::min(n1, item + 1); k >= 1; --k) {
      for (std::size_t s = static_cast<std::size_t>(max_sum); s >= r; --s) {
        ways[k][s] += ways[k - 1][s - r];
        if (s == r) break;
      }
    }
  }

  // doubled rank sum of `a` has mean n1 * (n + 1)
  long observed = 0;
  for (std::size_t i = 0; i < n1; ++i) observed += ranks[i];
  const long centre = static_cast<long>(n1 * (n + 1));
  const long observed_dev = std::labs(observed - centre);
  double extreme = 0.0, total = 0.0;
  for (std::size_t s = 0; s < ways[n1].size(); ++s) {
    if (ways[n1][s] == 0.0) continue;
    total += ways[n1][s];
    if (std::labs(static_cast<long>(s) - centre) >= observed_dev) extreme += ways[n1][s];
  }
  return std::min(1.0, extreme / total);
}

double wilcoxon_rank_sum_normal(std::span<const double> a, std::span<const double> b) {
  check_samples(a, b);
  const auto all = pooled(a, b);
  const auto ranks = doubled_midranks(all);
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  const double n = n1 + n2;

  double w = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) w += 0.5 * static_cast<double>(ranks[i]);
  const double mean = n1 * (n + 1.0) / 2.0;

  std::vector<double> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t k = i;
    while (k < sorted.size() && sorted[k] == sorted[i]) ++k;
    const double t = static_cast<double>(k - i);
    tie_term += t * t * t - t;
    i = k;
  }
  const double variance = n1 * n2 / 12.0 * ((n + 1.0) - (n > 1.0 ? tie_term / (n * (n - 1.0)) : 0.0));
  if (!(variance > 0.0)) return 1.0;
  const double z = std::max(0.0, std::abs(w - mean) - 0.5) / std::sqrt(variance);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

double wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) {
  return a.size() + b.size() <= 12 ? wilcoxon_rank_sum_exact(a, b) : wilcoxon_rank_sum_normal(a, b);
}

double cliffs_delta(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error("cliffs_delta: both samples must be non-empty");
  long more = 0, less = 0;
  for (double x : a) {
    for (double y : b) {
      if (x > y) ++more;
      else if (x < y) ++less;
    }
  }
  return static_cast<double>(more - less) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Win: return "W";
    case Verdict::Tie: return "T";
    case Verdict::Loss: return "L";
  }
  return "T";
}

Verdict wtl_label(double p_value, double delta) {
  if (p_value < kSignificance && delta > kNegligibleDelta) return Verdict::Win;
  if (p_value < kSignificance && delta < -kNegligibleDelta) return Verdict::Loss;
  return Verdict::Tie;
}

std::vector<double> reweigh(std::span<const int> group, std::span<const int> target) {
  if (group.size() != target.size() || group.empty()) {
    throw Error("reweigh: group and target must be non-empty and equal length");
  }
  check_binary(group, "group membership");
  check_binary(target, "target");
  double cell[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < group.size(); ++i) cell[group[i]][target[i]] += 1.0;
  for (int g = 0; g < 2; ++g) {
    for (int c = 0; c < 2; ++c) {
      if (cell[g][c] == 0.0) {
        throw Error("reweigh: empty cell (group=" + std::to_string(g) + ", class=" + std::to_string(c) + ")");
      }
    }
  }
  const double n = static_cast<double>(group.size());
  double weight[2][2];
  for (int g = 0; g < 2; ++g) {
    for (int c = 0; c < 2; ++c) {
      const double n_g = cell[g][0] + cell[g][1];
      const double n_c = cell[0][c] + cell[1][c];
      weight[g][c] = (n_g * n_c) / (n * cell[g][c]);
    }
  }
  std::vector<double> out(group.size());
  for (std::size_t i = 0; i < group.size(); ++i) out[i] = weight[group[i]][target[i]];
  return out;
}

GroupSpec make_group(const TabularDataset& ds, std::size_t feature, Category privileged) {
  return GroupSpec{feature, partition_feature(ds, feature), privileged};
}

std::vector<int> group_membership(const TabularDataset& ds, const GroupSpec& group) {
  const auto col = ds.column(group.feature);
  std::vector<int> out(col.size());
  for (std::size_t i = 0; i < col.size(); ++i) {
    const auto c = group.partition.category_of(col[i]);
    if (!c) throw Error("group: value outside the group feature's partition");
    out[i] = *c == group.privileged ? 1 : 0;
  }
  return out;
}

std::string Scenario::id() const {
  switch (kind) {
    case ScenarioKind::Default: return "default";
    case ScenarioKind::DropFeature: return "drop:" + feature;
    case ScenarioKind::Reweigh: return "reweigh";
  }
  return "default";
}

std::optional<double> metric_value(const FoldMetrics& m, std::size_t index) {
  switch (index) {
    case 0: return m.perf.accuracy;
    case 1: return m.perf.precision;
    case 2: return m.perf.recall;
    case 3: return m.perf.f1;
    case 4: return m.fair.false_alarm;
    case 5: return m.fair.aod;
    case 6: return m.fair.spd;
    case 7: return m.fair.dir;
    case 8: return m.fair.fpr_difference;
  }
  throw Error("metric_value: index out of range");
}

ScenarioEvaluation evaluate_scenario(const TabularDataset& ds, const ModelConfig& model,
                                     const Scenario& scenario, const GroupSpec& group,
                                     std::span<const FoldSplit> folds) {
  if (folds.empty()) throw Error("scenario: no folds");
  std::vector<std::size_t> dropped;
  if (scenario.kind == ScenarioKind::DropFeature) {
    const auto j = ds.index_of(scenario.feature);
    if (!j) throw Error("scenario: unknown feature '" + scenario.feature + "'");
    if (ds.n_features() < 2) throw Error("scenario: dropping '" + scenario.feature + "' leaves no features");
    dropped.push_back(*j);
  }
  const TabularDataset inputs = dropped.empty() ? ds : ds.without_features(dropped);
  const auto membership = group_membership(ds, group);

  ScenarioEvaluation eval;
  eval.scenario = scenario;
  for (const auto& fold : folds) {
    const TabularDataset train = inputs.subset(fold.train);
    const TabularDataset test = inputs.subset(fold.test);
    std::vector<double> weights;
    if (scenario.kind == ScenarioKind::Reweigh) {
      std::vector<int> g;
      for (std::size_t i : fold.train) g.push_back(membership[i]);
      weights = reweigh(g, train.target());
    }
    const LogisticModel fitted = fit_logistic(train, model, weights);
    const auto probs = predict_proba(fitted, test);
    std::vector<int> pred(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) pred[i] = probs[i] >= 0.5 ? 1 : 0;
    std::vector<int> g;
    for (std::size_t i : fold.test) g.push_back(membership[i]);
    const std::vector<int> truth(test.target().begin(), test.target().end());
    eval.per_fold.push_back({performance_metrics(truth, pred), fairness_metrics(truth, pred, g)});
  }

  const double k = static_cast<double>(eval.per_fold.size());
  double dir_sum = 0.0;
  std::size_t dir_count = 0;
  for (const auto& f : eval.per_fold) {
    eval.perf.accuracy += f.perf.accuracy / k;
    eval.perf.precision += f.perf.precision / k;
    eval.perf.recall += f.perf.recall / k;
    eval.perf.f1 += f.perf.f1 / k;
    eval.fair.false_alarm += f.fair.false_alarm / k;
    eval.fair.aod += f.fair.aod / k;
    eval.fair.spd += f.fair.spd / k;
    eval.fair.fpr_difference += f.fair.fpr_difference / k;
    if (f.fair.dir) {
      dir_sum += *f.fair.dir;
      ++dir_count;
    }
  }
  if (dir_count > 0) eval.fair.dir = dir_sum / static_cast<double>(dir_count);
  eval.tscore = t_score(eval.perf, eval.fair);
  eval.wtl.fill(Verdict::Tie);
  return eval;
}

void compare_to_default(ScenarioEvaluation& candidate, const ScenarioEvaluation& baseline) {
  for (std::size_t metric = 0; metric < kScenarioMetrics.size(); ++metric) {
    std::vector<double> ours, theirs;
    for (const auto& f : candidate.per_fold) {
      if (auto v = metric_value(f, metric)) ours.push_back(*v);
    }
    for (const auto& f : baseline.per_fold) {
      if (auto v = metric_value(f, metric)) theirs.push_back(*v);
    }
    if (ours.empty() || theirs.empty()) {
      candidate.wtl[metric] = Verdict::Tie;
      continue;
    }
    const double p = wilcoxon_rank_sum(ours, theirs);
    const double delta = lower_is_better(metric) ? cliffs_delta(theirs, ours) : cliffs_delta(ours, theirs);
    candidate.wtl[metric] = wtl_label(p, delta);
  }
}

void rank_scenarios(std::vector<ScenarioEvaluation>& evaluations) {
  std::vector<std::size_t> order(evaluations.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return evaluations[a].tscore.value > evaluations[b].tscore.value;
  });
  for (std::size_t pos = 0; pos < order.size(); ++pos) evaluations[order[pos]].rank = pos + 1;
}

}  // namespace fairswap
