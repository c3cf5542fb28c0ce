#include "fairswap/swap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairswap/error.hpp"

namespace fairswap {

void SwapConfig::validate() const {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw Error("swap: ratio must lie in (0, 1]");
  if (!(d_max >= 0.0)) throw Error("swap: d_max must be non-negative");
}

std::vector<std::size_t> select_swap_indices(std::size_t n, double ratio, Rng& rng) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw Error("swap: ratio must lie in (0, 1]");
  const auto count = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  // partial Fisher-Yates
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t k = i + static_cast<std::size_t>(rng.uniform_index(n - i));
    std::swap(pool[i], pool[k]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

double cell_distortion(const FeatureInfo& info, double u, double v) {
  if (info.kind == FeatureKind::Categorical) return u != v ? 1.0 : 0.0;
  const double range = info.range() > 0.0 ? info.range() : 1.0;
  return std::abs(u - v) / range;
}

double distortion(std::span<const double> u, std::span<const double> v, const FeatureSchema& schema) {
  if (u.size() != v.size() || u.size() != schema.size()) {
    throw Error("distortion: rows do not match the schema");
  }
  double d = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) d += cell_distortion(schema[j], u[j], v[j]);
  return d;
}

double alternate_value(const FeaturePartition& partition, double current, Rng& rng) {
  const auto category = partition.category_of(current);
  if (!category) {
    throw Error("swap: value " + std::to_string(current) + " of feature " +
                std::to_string(partition.feature) + " lies in neither partition category");
  }
  const auto& pool = partition.members(*category == Category::C1 ? Category::C2 : Category::C1);
  if (pool.empty()) throw Error("swap: partition has an empty category");
  return pool[rng.uniform_index(pool.size())];
}

SwapResult single_swap(const TabularDataset& ds, const FeaturePartition& partition,
                       std::span<const std::size_t> rows, double d_max, Rng& rng) {
  const std::size_t j = partition.feature;
  if (j >= ds.n_features()) throw Error("swap: feature index out of range");
  const FeatureInfo& info = ds.schema()[j];
  const bool categorical = info.kind == FeatureKind::Categorical;

  const auto source = ds.column(j);
  TabularDataset::Column column(source.begin(), source.end());
  SwapResult result;
  result.distortions.reserve(rows.size());
  for (std::size_t i : rows) {
    if (i >= ds.n_rows()) throw Error("swap: row index out of range");
    const double candidate = alternate_value(partition, source[i], rng);
    // only column j differs, so the row distortion reduces to this cell
    const double d = cell_distortion(info, source[i], candidate);
    result.distortions.push_back(d);
    if (categorical || d <= d_max) {
      column[i] = candidate;
      result.altered.push_back(i);
    }
  }
  std::sort(result.altered.begin(), result.altered.end());
  result.data = result.altered.empty() ? ds : ds.with_column(j, std::move(column));
  return result;
}

SwapResult single_swap(const TabularDataset& ds, std::size_t feature,
                       std::span<const std::size_t> rows, double d_max, Rng& rng) {
  return single_swap(ds, partition_feature(ds, feature), rows, d_max, rng);
}

OrderProvenance TemporalOrder::relation(std::size_t a, std::size_t b) const {
  return provenance.at(a) == OrderProvenance::UserSpecified &&
                 provenance.at(b) == OrderProvenance::UserSpecified
             ? OrderProvenance::UserSpecified
             : OrderProvenance::StatisticallyInferred;
}

TemporalOrder temporal_order(const TabularDataset& ds, std::span<const std::string> user_partial,
                             bool strict) {
  const std::size_t m = ds.n_features();
  TemporalOrder out;
  out.event_probability.resize(m);
  out.provenance.assign(m, OrderProvenance::StatisticallyInferred);
  for (std::size_t j = 0; j < m; ++j) {
    double p = 1.0;  // constant feature: every value falls in C1
    if (ds.n_rows() > 0) {
      try {
        const FeaturePartition part = partition_feature(ds, j);
        std::size_t hits = 0;
        for (double v : ds.column(j)) hits += part.category_of(v) == Category::C1 ? 1 : 0;
        p = static_cast<double>(hits) / static_cast<double>(ds.n_rows());
      } catch (const Error&) {
      }
    }
    out.event_probability[j] = p;
  }

  std::vector<bool> placed(m, false);
  for (const auto& name : user_partial) {
    const auto j = ds.index_of(name);
    if (!j) throw Error("temporal order: unknown feature '" + name + "'");
    if (placed[*j]) throw Error("temporal order: feature '" + name + "' listed twice");
    placed[*j] = true;
    out.order.push_back(*j);
    out.provenance[*j] = OrderProvenance::UserSpecified;
  }
  for (std::size_t a = 0; a < out.order.size(); ++a) {
    for (std::size_t b = a + 1; b < out.order.size(); ++b) {
      const std::size_t ja = out.order[a];
      const std::size_t jb = out.order[b];
      if (!(out.event_probability[ja] > out.event_probability[jb])) {
        if (strict) {
          throw Error("temporal order: '" + ds.name(ja) + "' before '" + ds.name(jb) +
                      "' violates the frequency condition (" +
                      std::to_string(out.event_probability[ja]) + " <= " +
                      std::to_string(out.event_probability[jb]) + ")");
        }
        out.violations.push_back(
            {ja, jb, out.event_probability[ja], out.event_probability[jb]});
      }
    }
  }

  std::vector<std::size_t> rest;
  for (std::size_t j = 0; j < m; ++j) {
    if (!placed[j]) rest.push_back(j);
  }
  std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
    return out.event_probability[a] > out.event_probability[b];
  });
  out.order.insert(out.order.end(), rest.begin(), rest.end());

  out.position.resize(m);
  for (std::size_t pos = 0; pos < m; ++pos) out.position[out.order[pos]] = pos;
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> mediator_pairs(const TemporalOrder& order) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t m = order.order.size();
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) pairs.emplace_back(order.order[a], order.order[b]);
  }
  return pairs;
}

DoubleSwap double_swap_scenario1(const TabularDataset& ds, const FeaturePartition& feature,
                                 const FeaturePartition& mediator,
                                 std::span<const std::size_t> rows, double d_max, Rng& rng) {
  DoubleSwap out;
  out.first = single_swap(ds, mediator, rows, d_max, rng);
  out.second = single_swap(out.first.data, feature, rows, d_max, rng);
  return out;
}

DoubleSwap double_swap_scenario2(const TabularDataset& ds, const FeaturePartition& feature,
                                 const FeaturePartition& mediator,
                                 std::span<const std::size_t> rows, double d_max, Rng& rng) {
  DoubleSwap out;
  out.first = single_swap(ds, feature, rows, d_max, rng);
  out.second = single_swap(out.first.data, mediator, rows, d_max, rng);
  return out;
}

}  // namespace fairswap
