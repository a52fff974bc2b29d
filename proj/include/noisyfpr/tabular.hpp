#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace noisyfpr {

using Label = std::uint8_t;
using ExampleId = std::int64_t;

enum class FeatureKind { numeric, categorical };

const char* to_string(FeatureKind kind);

struct ColumnSpec {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  bool operator==(const ColumnSpec&) const = default;
};

/// Ordered feature columns plus the names of the label and timestamp columns.
class FeatureSchema {
 public:
  /// Throws SchemaError naming the offending column on duplicates, an empty
  /// feature list, or a label/timestamp column that is also a feature.
  FeatureSchema(std::vector<ColumnSpec> columns, std::string label_column,
                std::string timestamp_column);

  const std::vector<ColumnSpec>& columns() const noexcept { return columns_; }
  const std::string& label_column() const noexcept { return label_; }
  const std::string& timestamp_column() const noexcept { return timestamp_; }
  std::size_t feature_count() const noexcept { return columns_.size(); }

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::vector<ColumnSpec> columns_;
  std::string label_;
  std::string timestamp_;
};

/// A single cell. Numeric values are finite when present; either kind may be missing.
class FeatureValue {
 public:
  static FeatureValue numeric(double value);
  static FeatureValue categorical(std::string token);
  static FeatureValue missing(FeatureKind kind);

  FeatureKind kind() const noexcept { return kind_; }
  bool is_missing() const noexcept { return missing_; }
  double number() const noexcept { return number_; }
  const std::string& token() const noexcept { return token_; }

  bool operator==(const FeatureValue&) const = default;

 private:
  FeatureKind kind_ = FeatureKind::numeric;
  bool missing_ = true;
  double number_ = 0.0;
  std::string token_;
};

struct Example {
  std::vector<FeatureValue> features;
  Label y_true = 0;
  Label y_observed = 0;
  std::int64_t timestamp_ms = 0;
  ExampleId id = 0;

  bool operator==(const Example&) const = default;
};

/// Immutable ordered collection of examples over one schema.
class Dataset {
 public:
  /// Validates feature arity and kinds, id uniqueness, label domain and the
  /// class-conditional constraint y_observed = 1 => y_true = 1.
  Dataset(FeatureSchema schema, std::vector<Example> examples);

  const FeatureSchema& schema() const noexcept { return schema_; }
  const std::vector<Example>& examples() const noexcept { return examples_; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  const Example& operator[](std::size_t i) const { return examples_[i]; }

  std::size_t count_true_positive() const;
  std::size_t count_observed_positive() const;
  /// p(y = 1); throws std::invalid_argument when empty.
  double fraud_rate() const;
  /// p(y* = 1); throws std::invalid_argument when empty.
  double observed_fraud_rate() const;

 private:
  FeatureSchema schema_;
  std::vector<Example> examples_;
};

/// Reads `{"columns": [{"name", "kind"}], "label", "timestamp"}`.
FeatureSchema parse_manifest(const std::filesystem::path& path);
FeatureSchema parse_manifest_text(const std::string& json_text);
std::string manifest_json(const FeatureSchema& schema);

/// Loads a CSV whose header contains every schema column (extra columns are
/// ignored). y_true = y_observed = label, ids 0..n-1 in file order.
Dataset load_dataset(const FeatureSchema& schema, const std::filesystem::path& path);
Dataset load_dataset(const FeatureSchema& schema, std::istream& in);

/// Writes features, label (y_true) and timestamp (epoch ms) in schema order.
/// Loading the output reproduces a noise-free dataset with ids 0..n-1.
void write_dataset_csv(const Dataset& ds, std::ostream& out);

/// Seeded shuffle, then the last round(fraction * n) examples become validation.
std::pair<Dataset, Dataset> split_train_validation(const Dataset& ds, double validation_fraction,
                                                   std::uint64_t seed);

/// Seeded shuffle into k disjoint slices whose sizes differ by at most one.
std::vector<Dataset> slice_shuffled(const Dataset& ds, std::size_t k, std::uint64_t seed);

/// Seeded sample of at most `max_rows` examples, kept in original order.
Dataset subsample_rows(const Dataset& ds, std::size_t max_rows, std::uint64_t seed);

}  // namespace noisyfpr
