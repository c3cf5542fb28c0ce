#include "fairswap/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "fairswap/csv.hpp"
#include "fairswap/error.hpp"
#include "fairswap/random.hpp"

namespace fairswap {

namespace {

std::vector<double> distinct_sorted(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

FeatureInfo describe(std::string name, FeatureKind kind, std::span<const double> values) {
  FeatureInfo info;
  info.name = std::move(name);
  info.kind = kind;
  if (!values.empty()) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    info.min = *lo;
    info.max = *hi;
  }
  if (kind == FeatureKind::Categorical) info.codes = distinct_sorted(values);
  return info;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool contains(const std::vector<std::string>& names, const std::string& name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

const char* to_string(FeatureKind kind) {
  return kind == FeatureKind::Categorical ? "categorical" : "continuous";
}

TabularDataset::TabularDataset(std::vector<Column> columns, std::vector<int> target,
                               FeatureSchema schema, std::string target_name)
    : target_(std::move(target)), schema_(std::move(schema)), target_name_(std::move(target_name)) {
  if (columns.size() != schema_.size()) {
    throw Error("dataset: " + std::to_string(columns.size()) + " columns but schema describes " +
                std::to_string(schema_.size()));
  }
  columns_.reserve(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != target_.size()) {
      throw Error("dataset: column '" + schema_[j].name + "' has " +
                  std::to_string(columns[j].size()) + " rows, target has " +
                  std::to_string(target_.size()));
    }
    columns_.push_back(std::make_shared<const Column>(std::move(columns[j])));
  }
}

TabularDataset TabularDataset::from_columns(std::vector<std::string> names,
                                            std::vector<Column> columns, std::vector<int> target,
                                            std::optional<std::vector<FeatureKind>> kinds,
                                            std::string target_name) {
  if (names.size() != columns.size()) throw Error("dataset: names/columns size mismatch");
  if (kinds && kinds->size() != columns.size()) throw Error("dataset: kinds/columns size mismatch");
  FeatureSchema schema;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    FeatureKind kind;
    if (kinds) {
      kind = (*kinds)[j];
    } else {
      kind = distinct_sorted(columns[j]).size() <= 2 ? FeatureKind::Categorical
                                                     : FeatureKind::Continuous;
    }
    schema.features.push_back(describe(names[j], kind, columns[j]));
  }
  return TabularDataset(std::move(columns), std::move(target), std::move(schema),
                        std::move(target_name));
}

std::vector<double> TabularDataset::row(std::size_t i) const {
  std::vector<double> out(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) out[j] = (*columns_[j])[i];
  return out;
}

std::vector<std::string> TabularDataset::feature_names() const {
  std::vector<std::string> out;
  for (const auto& f : schema_.features) out.push_back(f.name);
  return out;
}

std::optional<std::size_t> TabularDataset::index_of(const std::string& name) const {
  for (std::size_t j = 0; j < schema_.size(); ++j) {
    if (schema_[j].name == name) return j;
  }
  return std::nullopt;
}

TabularDataset TabularDataset::subset(std::span<const std::size_t> rows) const {
  std::vector<Column> cols(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    cols[j].reserve(rows.size());
    for (std::size_t i : rows) cols[j].push_back((*columns_[j]).at(i));
  }
  std::vector<int> tgt;
  tgt.reserve(rows.size());
  for (std::size_t i : rows) tgt.push_back(target_.at(i));
  return TabularDataset(std::move(cols), std::move(tgt), schema_, target_name_);
}

TabularDataset TabularDataset::without_features(std::span<const std::size_t> features) const {
  TabularDataset out;
  out.target_ = target_;
  out.target_name_ = target_name_;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (std::find(features.begin(), features.end(), j) != features.end()) continue;
    out.columns_.push_back(columns_[j]);
    out.schema_.features.push_back(schema_[j]);
  }
  return out;
}

TabularDataset TabularDataset::with_column(std::size_t j, Column values) const {
  if (j >= columns_.size()) throw Error("dataset: column index out of range");
  if (values.size() != n_rows()) throw Error("dataset: replacement column has wrong length");
  TabularDataset out = *this;
  out.columns_[j] = std::make_shared<const Column>(std::move(values));
  return out;
}

bool TabularDataset::operator==(const TabularDataset& other) const {
  if (target_ != other.target_ || columns_.size() != other.columns_.size()) return false;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j] != other.columns_[j] && *columns_[j] != *other.columns_[j]) return false;
    if (schema_[j].name != other.schema_[j].name) return false;
  }
  return true;
}

bool is_missing_cell(std::string_view cell) {
  cell = trim(cell);
  return cell.empty() || cell == "?" || cell == "NA" || cell == "N/A" || cell == "nan" ||
         cell == "NaN" || cell == "null" || cell == "NULL";
}

TabularDataset parse_csv_dataset(std::string_view text, const LoadOptions& options) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw Error("csv: missing header row");
  std::vector<std::string> header;
  for (const auto& h : rows.front()) header.emplace_back(trim(h));

  const auto target_it = std::find(header.begin(), header.end(), options.target);
  if (target_it == header.end()) {
    throw Error("csv: target column '" + options.target + "' not found in header");
  }
  const std::size_t target_col = static_cast<std::size_t>(target_it - header.begin());
  for (const auto& name : options.categorical) {
    if (!contains(header, name)) throw Error("csv: categorical override '" + name + "' not in header");
  }
  for (const auto& name : options.continuous) {
    if (!contains(header, name)) throw Error("csv: continuous override '" + name + "' not in header");
    if (contains(options.categorical, name)) {
      throw Error("csv: feature '" + name + "' forced both categorical and continuous");
    }
  }

  // Complete rows only.
  std::vector<const csv::Row*> kept;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && trim(row[0]).empty()) continue;  // blank line
    if (row.size() != header.size()) {
      throw Error("csv: row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                  " fields, header has " + std::to_string(header.size()));
    }
    if (std::any_of(row.begin(), row.end(), [](const std::string& c) { return is_missing_cell(c); })) {
      continue;
    }
    kept.push_back(&row);
  }
  if (kept.empty()) throw Error("csv: no usable rows after dropping rows with missing values");

  const std::size_t n = kept.size();
  FeatureSchema schema;
  std::vector<TabularDataset::Column> columns;
  std::vector<int> target(n);

  for (std::size_t c = 0; c < header.size(); ++c) {
    std::vector<std::string_view> cells(n);
    for (std::size_t i = 0; i < n; ++i) cells[i] = trim((*kept[i])[c]);

    std::vector<double> numeric(n);
    bool all_numeric = true;
    for (std::size_t i = 0; i < n && all_numeric; ++i) {
      all_numeric = csv::parse_double(cells[i], numeric[i]);
    }

    if (c == target_col) {
      std::vector<std::string> labels;  // first-appearance order
      for (auto cell : cells) {
        if (!contains(labels, std::string(cell))) labels.emplace_back(cell);
      }
      if (labels.size() > 2) {
        throw Error("csv: target '" + options.target + "' has " + std::to_string(labels.size()) +
                    " classes; only binary targets are supported");
      }
      if (!options.positive_label.empty()) {
        if (!contains(labels, options.positive_label)) {
          throw Error("csv: positive label '" + options.positive_label + "' not present in target");
        }
        for (std::size_t i = 0; i < n; ++i) target[i] = cells[i] == options.positive_label ? 1 : 0;
      } else if (all_numeric) {
        const double hi = *std::max_element(numeric.begin(), numeric.end());
        const double lo = *std::min_element(numeric.begin(), numeric.end());
        for (std::size_t i = 0; i < n; ++i) {
          // a single numeric class keeps its 0/1 meaning
          target[i] = lo == hi ? (numeric[i] > 0.0 ? 1 : 0) : (numeric[i] == hi ? 1 : 0);
        }
      } else {
        for (std::size_t i = 0; i < n; ++i) target[i] = cells[i] == labels.front() ? 0 : 1;
      }
      continue;
    }

    const std::string& name = header[c];
    const bool force_cat = contains(options.categorical, name);
    const bool force_cont = contains(options.continuous, name);
    FeatureInfo info;
    TabularDataset::Column values(n);
    if (all_numeric) {
      values = numeric;
      FeatureKind kind = distinct_sorted(values).size() <= 2 ? FeatureKind::Categorical
                                                             : FeatureKind::Continuous;
      if (force_cat) kind = FeatureKind::Categorical;
      if (force_cont) kind = FeatureKind::Continuous;
      info = describe(name, kind, values);
    } else {
      if (force_cont) throw Error("csv: feature '" + name + "' is text and cannot be continuous");
      std::unordered_map<std::string, double> codes;
      std::vector<std::string> levels;
      for (std::size_t i = 0; i < n; ++i) {
        std::string key(cells[i]);
        auto it = codes.find(key);
        if (it == codes.end()) {
          it = codes.emplace(key, static_cast<double>(levels.size())).first;
          levels.push_back(key);
        }
        values[i] = it->second;
      }
      info = describe(name, FeatureKind::Categorical, values);
      info.levels = std::move(levels);
    }
    schema.features.push_back(std::move(info));
    columns.push_back(std::move(values));
  }
  return TabularDataset(std::move(columns), std::move(target), std::move(schema), options.target);
}

TabularDataset load_csv(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string_view text = buffer.view();
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);  // UTF-8 BOM
  return parse_csv_dataset(text, options);
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("pearson: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;  // constant column: no linear association
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

CorrelationFilterResult drop_correlated(const TabularDataset& ds, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error("drop_correlated: threshold must be in [0, 1]");
  }
  const std::size_t m = ds.n_features();
  std::vector<bool> dropped(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (dropped[i]) continue;
    for (std::size_t j = i + 1; j < m; ++j) {
      if (dropped[j]) continue;
      if (std::abs(pearson(ds.column(i), ds.column(j))) > threshold) dropped[j] = true;
    }
  }
  CorrelationFilterResult result;
  std::vector<std::size_t> indices;
  for (std::size_t j = 0; j < m; ++j) {
    if (dropped[j]) {
      indices.push_back(j);
      result.dropped.push_back(ds.name(j));
    }
  }
  result.dataset = ds.without_features(indices);
  return result;
}

std::optional<Category> FeaturePartition::category_of(double value) const {
  if (kind == FeatureKind::Continuous) {
    if (!std::isfinite(value)) return std::nullopt;
    return value < split ? Category::C1 : Category::C2;
  }
  if (std::binary_search(c1.begin(), c1.end(), value)) return Category::C1;
  if (std::binary_search(c2.begin(), c2.end(), value)) return Category::C2;
  return std::nullopt;
}

FeaturePartition partition_values(std::size_t feature, FeatureKind kind,
                                  std::span<const double> values) {
  const auto distinct = distinct_sorted(values);
  if (distinct.size() < 2) {
    throw Error("partition: feature " + std::to_string(feature) +
                " has fewer than two distinct values");
  }
  FeaturePartition p;
  p.feature = feature;
  p.kind = kind;
  if (kind == FeatureKind::Continuous) {
    const double lo = distinct.front();
    const double hi = distinct.back();
    p.split = lo + (hi - lo) / 2.0;
    for (double v : distinct) (v < p.split ? p.c1 : p.c2).push_back(v);
  } else {
    // lower half of the ordered codes; an odd extra code goes to C2
    const std::size_t n_lower = distinct.size() / 2;
    p.c1.assign(distinct.begin(), distinct.begin() + static_cast<std::ptrdiff_t>(n_lower));
    p.c2.assign(distinct.begin() + static_cast<std::ptrdiff_t>(n_lower), distinct.end());
    p.split = p.c2.front();
  }
  return p;
}

FeaturePartition partition_feature(const TabularDataset& ds, std::size_t j) {
  if (j >= ds.n_features()) throw Error("partition: feature index out of range");
  try {
    return partition_values(j, ds.schema()[j].kind, ds.column(j));
  } catch (const Error&) {
    throw Error("partition: feature '" + ds.name(j) + "' is constant and cannot be swapped");
  }
}

std::vector<FoldSplit> kfold_split(std::size_t n_rows, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error("kfold: k must be at least 2");
  if (k > n_rows) {
    throw Error("kfold: k = " + std::to_string(k) + " exceeds row count " + std::to_string(n_rows));
  }
  std::vector<std::size_t> order(n_rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n_rows; i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }

  std::vector<FoldSplit> folds(k);
  const std::size_t base = n_rows / k;
  const std::size_t extra = n_rows % k;
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    auto& fold = folds[f];
    fold.fold = f;
    fold.test.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(start + size));
    std::sort(fold.test.begin(), fold.test.end());
    std::vector<bool> in_test(n_rows, false);
    for (std::size_t i : fold.test) in_test[i] = true;
    for (std::size_t i = 0; i < n_rows; ++i) {
      if (!in_test[i]) fold.train.push_back(i);
    }
    start += size;
  }
  return folds;
}

}  // namespace fairswap
