#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <string>
#include <vector>

namespace fairswap {

enum class FeatureKind { Categorical, Continuous };

const char* to_string(FeatureKind kind);

struct FeatureInfo {
  std::string name;
  FeatureKind kind = FeatureKind::Continuous;
  // Categorical only: sorted distinct codes.
  std::vector<double> codes;
  // Categorical columns read from text: levels[code] is the original label.
  std::vector<std::string> levels;
  double min = 0.0;
  double max = 0.0;

  double range() const { return max - min; }
};

struct FeatureSchema {
  std::vector<FeatureInfo> features;

  std::size_t size() const { return features.size(); }
  const FeatureInfo& operator[](std::size_t j) const { return features[j]; }
};

// Feature matrix stored column-major plus a binary target.
//
// Columns are shared between copies, so replacing a single column (what every
// swap does) costs O(n_rows) instead of a full copy. Instances are never
// mutated after construction.
class TabularDataset {
 public:
  using Column = std::vector<double>;

  TabularDataset() = default;
  TabularDataset(std::vector<Column> columns, std::vector<int> target, FeatureSchema schema,
                 std::string target_name = "target");

  // Builds a dataset and infers the schema from the values: columns with at
  // most two distinct values are categorical, everything else continuous.
  // `kinds`, when given, overrides the inference per feature.
  static TabularDataset from_columns(std::vector<std::string> names, std::vector<Column> columns,
                                     std::vector<int> target,
                                     std::optional<std::vector<FeatureKind>> kinds = std::nullopt,
                                     std::string target_name = "target");

  std::size_t n_rows() const { return target_.size(); }
  std::size_t n_features() const { return columns_.size(); }

  std::span<const double> column(std::size_t j) const { return *columns_.at(j); }
  double value(std::size_t i, std::size_t j) const { return (*columns_[j])[i]; }
  std::vector<double> row(std::size_t i) const;
  std::span<const int> target() const { return target_; }

  const FeatureSchema& schema() const { return schema_; }
  const std::string& name(std::size_t j) const { return schema_.features.at(j).name; }
  std::vector<std::string> feature_names() const;
  const std::string& target_name() const { return target_name_; }
  std::optional<std::size_t> index_of(const std::string& name) const;

  // Rows in the given order; the schema is inherited unchanged.
  TabularDataset subset(std::span<const std::size_t> rows) const;
  // Same rows with the listed features removed.
  TabularDataset without_features(std::span<const std::size_t> features) const;
  // Copy with column j replaced.
  TabularDataset with_column(std::size_t j, Column values) const;

  bool operator==(const TabularDataset& other) const;

 private:
  std::vector<std::shared_ptr<const Column>> columns_;
  std::vector<int> target_;
  FeatureSchema schema_;
  std::string target_name_;
};

struct LoadOptions {
  std::string target;
  // Schema overrides by feature name.
  std::vector<std::string> categorical;
  std::vector<std::string> continuous;
  // Target label mapped to class 1. Empty: for numeric targets the larger
  // value is 1, for text targets the second label to appear is 1.
  std::string positive_label;
};

// Cells that count as missing after trimming surrounding whitespace.
bool is_missing_cell(std::string_view cell);

// Reads a CSV with a header row. Rows with any missing cell are dropped, text
// columns become categorical codes in first-appearance order.
TabularDataset load_csv(const std::string& path, const LoadOptions& options);
TabularDataset parse_csv_dataset(std::string_view text, const LoadOptions& options);

double pearson(std::span<const double> a, std::span<const double> b);

struct CorrelationFilterResult {
  TabularDataset dataset;
  std::vector<std::string> dropped;
};

// Single pass over feature pairs (i < j) in index order; when |r| > threshold
// and both are still present, feature j is dropped.
CorrelationFilterResult drop_correlated(const TabularDataset& ds, double threshold);

enum class Category { C1, C2 };

// Two-way split of a feature's observed values.
struct FeaturePartition {
  std::size_t feature = 0;
  FeatureKind kind = FeatureKind::Continuous;
  // Continuous: midpoint (u_min + u_max) / 2, C1 = [min, split), C2 = [split, max].
  // Categorical: smallest code in C2.
  double split = 0.0;
  std::vector<double> c1;  // sorted distinct observed values
  std::vector<double> c2;

  std::optional<Category> category_of(double value) const;
  const std::vector<double>& members(Category c) const { return c == Category::C1 ? c1 : c2; }
};

FeaturePartition partition_values(std::size_t feature, FeatureKind kind,
                                  std::span<const double> values);
// Throws when the feature has fewer than two distinct values.
FeaturePartition partition_feature(const TabularDataset& ds, std::size_t j);

struct FoldSplit {
  std::size_t fold = 0;
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// Seeded shuffle cut into k test folds; the first n % k folds get one extra row.
std::vector<FoldSplit> kfold_split(std::size_t n_rows, std::size_t k, std::uint64_t seed);

}  // namespace fairswap
