#include "noisyfpr/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "noisyfpr/csv.hpp"
#include "noisyfpr/error.hpp"
#include "noisyfpr/rng.hpp"
#include "noisyfpr/timestamp.hpp"

namespace noisyfpr {

using nlohmann::json;

const char* to_string(FeatureKind kind) {
  return kind == FeatureKind::numeric ? "numeric" : "categorical";
}

FeatureSchema::FeatureSchema(std::vector<ColumnSpec> columns, std::string label_column,
                             std::string timestamp_column)
    : columns_(std::move(columns)), label_(std::move(label_column)),
      timestamp_(std::move(timestamp_column)) {
  if (label_.empty()) throw SchemaError("label", "label column name is empty");
  if (timestamp_.empty()) throw SchemaError("timestamp", "timestamp column name is empty");
  if (label_ == timestamp_) throw SchemaError(label_, "label and timestamp are the same column");
  if (columns_.empty()) throw SchemaError("columns", "at least one feature column is required");
  std::unordered_set<std::string> seen;
  for (const auto& c : columns_) {
    if (c.name.empty()) throw SchemaError("columns", "feature column with empty name");
    if (!seen.insert(c.name).second) throw SchemaError(c.name, "duplicate column");
    if (c.name == label_) throw SchemaError(c.name, "label column listed as a feature");
    if (c.name == timestamp_) throw SchemaError(c.name, "timestamp column listed as a feature");
  }
}

FeatureValue FeatureValue::numeric(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("numeric feature value must be finite");
  FeatureValue v;
  v.kind_ = FeatureKind::numeric;
  v.missing_ = false;
  v.number_ = value;
  return v;
}

FeatureValue FeatureValue::categorical(std::string token) {
  FeatureValue v;
  v.kind_ = FeatureKind::categorical;
  v.missing_ = false;
  v.token_ = std::move(token);
  return v;
}

FeatureValue FeatureValue::missing(FeatureKind kind) {
  FeatureValue v;
  v.kind_ = kind;
  v.missing_ = true;
  return v;
}

Dataset::Dataset(FeatureSchema schema, std::vector<Example> examples)
    : schema_(std::move(schema)), examples_(std::move(examples)) {
  const auto& cols = schema_.columns();
  std::unordered_set<ExampleId> ids;
  ids.reserve(examples_.size());
  for (const auto& ex : examples_) {
    if (ex.features.size() != cols.size()) {
      throw std::invalid_argument("example " + std::to_string(ex.id) + " has " +
                                  std::to_string(ex.features.size()) + " features, schema has " +
                                  std::to_string(cols.size()));
    }
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (ex.features[j].kind() != cols[j].kind) {
        throw std::invalid_argument("example " + std::to_string(ex.id) + ": kind mismatch in column " +
                                    cols[j].name);
      }
    }
    if (ex.y_true > 1 || ex.y_observed > 1) {
      throw std::invalid_argument("example " + std::to_string(ex.id) + ": label outside {0,1}");
    }
    if (ex.y_observed == 1 && ex.y_true == 0) {
      throw std::invalid_argument("example " + std::to_string(ex.id) +
                                  ": observed positive with true negative violates class-conditional noise");
    }
    if (!ids.insert(ex.id).second) {
      throw std::invalid_argument("duplicate example id " + std::to_string(ex.id));
    }
  }
}

std::size_t Dataset::count_true_positive() const {
  return static_cast<std::size_t>(
      std::count_if(examples_.begin(), examples_.end(), [](const Example& e) { return e.y_true == 1; }));
}

std::size_t Dataset::count_observed_positive() const {
  return static_cast<std::size_t>(std::count_if(examples_.begin(), examples_.end(),
                                                [](const Example& e) { return e.y_observed == 1; }));
}

double Dataset::fraud_rate() const {
  if (empty()) throw std::invalid_argument("fraud rate of an empty dataset");
  return static_cast<double>(count_true_positive()) / static_cast<double>(size());
}

double Dataset::observed_fraud_rate() const {
  if (empty()) throw std::invalid_argument("observed fraud rate of an empty dataset");
  return static_cast<double>(count_observed_positive()) / static_cast<double>(size());
}

// ---------------------------------------------------------------------------
// Manifest

FeatureSchema parse_manifest_text(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError("json", std::string("malformed manifest: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("json", "manifest must be a JSON object");
  for (const char* key : {"columns", "label", "timestamp"}) {
    if (!doc.contains(key)) throw SchemaError(key, "missing required key");
  }
  if (!doc["label"].is_string()) throw SchemaError("label", "must be a string");
  if (!doc["timestamp"].is_string()) throw SchemaError("timestamp", "must be a string");
  if (!doc["columns"].is_array()) throw SchemaError("columns", "must be an array");

  std::vector<ColumnSpec> columns;
  for (const auto& c : doc["columns"]) {
    if (!c.is_object() || !c.contains("name") || !c["name"].is_string()) {
      throw SchemaError("columns", "each column needs a string \"name\"");
    }
    ColumnSpec spec;
    spec.name = c["name"].get<std::string>();
    const std::string kind = c.value("kind", std::string("numeric"));
    if (kind == "numeric") {
      spec.kind = FeatureKind::numeric;
    } else if (kind == "categorical") {
      spec.kind = FeatureKind::categorical;
    } else {
      throw SchemaError(spec.name, "unknown kind \"" + kind + "\"");
    }
    columns.push_back(std::move(spec));
  }
  return FeatureSchema(std::move(columns), doc["label"].get<std::string>(),
                       doc["timestamp"].get<std::string>());
}

FeatureSchema parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest_text(buf.str());
}

std::string manifest_json(const FeatureSchema& schema) {
  json cols = json::array();
  for (const auto& c : schema.columns()) cols.push_back({{"name", c.name}, {"kind", to_string(c.kind)}});
  json doc = {{"columns", cols}, {"label", schema.label_column()}, {"timestamp", schema.timestamp_column()}};
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace {

bool is_missing_token(std::string_view s) {
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null" || s == "NULL";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void row_error(std::size_t row, std::size_t line, const std::string& what) {
  throw DataError("row " + std::to_string(row) + " (line " + std::to_string(line) + "): " + what);
}

}  // namespace

Dataset load_dataset(const FeatureSchema& schema, std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header) || (header.size() == 1 && header[0].empty())) {
    throw DataError("empty CSV: no header row");
  }
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) {
    position.emplace(std::string(trim(header[i])), i);
  }
  auto locate = [&](const std::string& name) {
    auto it = position.find(name);
    if (it == position.end()) throw DataError("CSV header lacks column " + name);
    return it->second;
  };
  std::vector<std::size_t> feature_pos;
  for (const auto& c : schema.columns()) feature_pos.push_back(locate(c.name));
  const std::size_t label_pos = locate(schema.label_column());
  const std::size_t time_pos = locate(schema.timestamp_column());

  std::vector<Example> examples;
  std::vector<std::string> fields;
  std::size_t row = 0;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    ++row;
    if (fields.size() != header.size()) {
      row_error(row, reader.line(),
                "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    Example ex;
    ex.id = static_cast<ExampleId>(examples.size());
    const std::string_view label = trim(fields[label_pos]);
    if (label == "0") {
      ex.y_true = 0;
    } else if (label == "1") {
      ex.y_true = 1;
    } else {
      row_error(row, reader.line(), "label \"" + std::string(label) + "\" is not 0 or 1");
    }
    ex.y_observed = ex.y_true;
    const auto ts = parse_timestamp_ms(fields[time_pos]);
    if (!ts) row_error(row, reader.line(), "unparseable timestamp \"" + fields[time_pos] + "\"");
    ex.timestamp_ms = *ts;

    ex.features.reserve(feature_pos.size());
    for (std::size_t j = 0; j < feature_pos.size(); ++j) {
      const std::string& raw = fields[feature_pos[j]];
      const FeatureKind kind = schema.columns()[j].kind;
      if (kind == FeatureKind::categorical) {
        ex.features.push_back(raw.empty() ? FeatureValue::missing(kind) : FeatureValue::categorical(raw));
        continue;
      }
      const std::string_view s = trim(raw);
      if (is_missing_token(s)) {
        ex.features.push_back(FeatureValue::missing(kind));
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        row_error(row, reader.line(),
                  "column " + schema.columns()[j].name + ": \"" + raw + "\" is not a finite number");
      }
      ex.features.push_back(FeatureValue::numeric(v));
    }
    examples.push_back(std::move(ex));
  }
  if (examples.empty()) throw DataError("CSV has a header but no data rows");
  return Dataset(schema, std::move(examples));
}

Dataset load_dataset(const FeatureSchema& schema, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file " + path.string());
  return load_dataset(schema, in);
}

void write_dataset_csv(const Dataset& ds, std::ostream& out) {
  const auto& schema = ds.schema();
  std::vector<std::string> row;
  for (const auto& c : schema.columns()) row.push_back(c.name);
  row.push_back(schema.label_column());
  row.push_back(schema.timestamp_column());
  csv::write_row(out, row);

  char buf[64];
  for (const auto& ex : ds.examples()) {
    row.clear();
    for (const auto& v : ex.features) {
      if (v.is_missing()) {
        row.emplace_back();
      } else if (v.kind() == FeatureKind::categorical) {
        row.push_back(v.token());
      } else {
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v.number());
        row.emplace_back(buf, ptr);
      }
    }
    row.push_back(ex.y_true ? "1" : "0");
    row.push_back(std::to_string(ex.timestamp_ms));
    csv::write_row(out, row);
  }
}

// ---------------------------------------------------------------------------
// Splitting

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

Dataset gather(const Dataset& ds, std::span<const std::size_t> idx) {
  std::vector<Example> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(ds[i]);
  return Dataset(ds.schema(), std::move(out));
}

}  // namespace

std::pair<Dataset, Dataset> split_train_validation(const Dataset& ds, double validation_fraction,
                                                   std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must lie in (0, 1)");
  }
  const std::size_t n = ds.size();
  if (n < 2) throw std::invalid_argument("split needs at least 2 examples");
  const auto n_val = static_cast<std::size_t>(round_half_up(validation_fraction * static_cast<double>(n)));
  if (n_val == 0 || n_val >= n) {
    throw std::invalid_argument("validation fraction " + std::to_string(validation_fraction) +
                                " leaves an empty split for n = " + std::to_string(n));
  }
  const auto order = shuffled_indices(n, seed);
  const std::span<const std::size_t> all(order);
  return {gather(ds, all.first(n - n_val)), gather(ds, all.subspan(n - n_val))};
}

std::vector<Dataset> slice_shuffled(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("slicing needs k >= 2");
  if (k > ds.size()) {
    throw std::invalid_argument("cannot cut " + std::to_string(ds.size()) + " examples into " +
                                std::to_string(k) + " slices");
  }
  const auto order = shuffled_indices(ds.size(), seed);
  const std::span<const std::size_t> all(order);
  const std::size_t base = ds.size() / k;
  const std::size_t extra = ds.size() % k;
  std::vector<Dataset> slices;
  slices.reserve(k);
  std::size_t offset = 0;
  for (std::size_t s = 0; s < k; ++s) {
    const std::size_t len = base + (s < extra ? 1 : 0);
    slices.push_back(gather(ds, all.subspan(offset, len)));
    offset += len;
  }
  return slices;
}

Dataset subsample_rows(const Dataset& ds, std::size_t max_rows, std::uint64_t seed) {
  if (max_rows == 0 || ds.size() <= max_rows) return ds;
  auto order = shuffled_indices(ds.size(), seed);
  order.resize(max_rows);
  std::sort(order.begin(), order.end());
  return gather(ds, order);
}

}  // namespace noisyfpr
