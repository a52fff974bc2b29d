#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "noisyfpr/csv.hpp"
#include "noisyfpr/error.hpp"
#include "noisyfpr/tabular.hpp"
#include "noisyfpr/timestamp.hpp"
#include "support.hpp"

using namespace noisyfpr;

namespace {

std::string schema_key(const std::string& manifest) {
  try {
    parse_manifest_text(manifest);
  } catch (const SchemaError& e) {
    return e.key();
  }
  return "";
}

std::multiset<ExampleId> ids(const Dataset& ds) {
  std::multiset<ExampleId> out;
  for (const auto& ex : ds.examples()) out.insert(ex.id);
  return out;
}

}  // namespace

TEST(Manifest, TwoNumericFeatures) {
  const auto s = parse_manifest_text(R"({"columns": [{"name": "a", "kind": "numeric"},
      {"name": "b", "kind": "numeric"}], "label": "is_fraud", "timestamp": "created_at"})");
  EXPECT_EQ(s.feature_count(), 2u);
  EXPECT_EQ(s.label_column(), "is_fraud");
  EXPECT_EQ(s.timestamp_column(), "created_at");
  EXPECT_EQ(parse_manifest_text(manifest_json(s)), s);
}

TEST(Manifest, MissingLabelNamesKey) {
  EXPECT_EQ(schema_key(R"({"columns": [{"name": "a", "kind": "numeric"}], "timestamp": "t"})"), "label");
}

TEST(Manifest, LabelListedAsFeature) {
  EXPECT_EQ(schema_key(R"({"columns": [{"name": "is_fraud", "kind": "numeric"}],
      "label": "is_fraud", "timestamp": "t"})"),
            "is_fraud");
}

TEST(Manifest, OtherErrors) {
  EXPECT_EQ(schema_key("{not json"), "json");
  EXPECT_EQ(schema_key(R"({"columns": [], "label": "y", "timestamp": "t"})"), "columns");
  EXPECT_EQ(schema_key(R"({"columns": [{"name": "a", "kind": "numeric"}, {"name": "a", "kind": "numeric"}],
      "label": "y", "timestamp": "t"})"),
            "a");
  EXPECT_EQ(schema_key(R"({"columns": [{"name": "a", "kind": "text"}], "label": "y", "timestamp": "t"})"), "a");
  EXPECT_THROW(parse_manifest("/nonexistent/manifest.json"), Error);
}

TEST(LoadDataset, TwoRows) {
  std::istringstream in("x0,label,ts\n1.5,0,10\n2.5,1,20\n");
  const auto ds = load_dataset(fixtures::numeric_schema(1), in);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_DOUBLE_EQ(ds.fraud_rate(), 0.5);
  EXPECT_EQ(ds[0].id, 0);
  EXPECT_EQ(ds[1].id, 1);
  EXPECT_EQ(ds[1].y_observed, 1);
  EXPECT_EQ(ds[1].timestamp_ms, 20);
}

TEST(LoadDataset, BadLabelReportsRow) {
  std::istringstream in("x0,label,ts\n1.5,0,10\n2.5,2,20\n");
  try {
    load_dataset(fixtures::numeric_schema(1), in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
}

TEST(LoadDataset, BadTimestampAndEmpty) {
  std::istringstream bad("x0,label,ts\n1.5,0,yesterday\n");
  EXPECT_THROW(load_dataset(fixtures::numeric_schema(1), bad), DataError);
  std::istringstream empty("");
  EXPECT_THROW(load_dataset(fixtures::numeric_schema(1), empty), DataError);
  std::istringstream header_only("x0,label,ts\n");
  EXPECT_THROW(load_dataset(fixtures::numeric_schema(1), header_only), DataError);
  std::istringstream no_column("x1,label,ts\n1,0,0\n");
  EXPECT_THROW(load_dataset(fixtures::numeric_schema(1), no_column), DataError);
}

TEST(LoadDataset, MissingValuesQuotesAndExtraColumns) {
  const FeatureSchema schema({{"amt", FeatureKind::numeric}, {"merchant", FeatureKind::categorical}}, "y", "when");
  std::istringstream in(
      "note,amt,merchant,y,when\r\n"
      "\"a, b\",,\"Joe \"\"s\"\"\",0,2020-01-01T00:00:00Z\r\n"
      "x,3.25,NA,1,2020-01-01 00:00:01.5+01:00\r\n"
      "y,NaN,,0,0\r\n");
  const auto ds = load_dataset(schema, in);
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_TRUE(ds[0].features[0].is_missing());
  EXPECT_TRUE(ds[2].features[0].is_missing());
  EXPECT_TRUE(ds[2].features[1].is_missing());
  EXPECT_EQ(ds[0].features[1].token(), "Joe \"s\"");
  EXPECT_DOUBLE_EQ(ds[1].features[0].number(), 3.25);
  EXPECT_EQ(ds[1].features[1].token(), "NA");
  EXPECT_EQ(ds[0].timestamp_ms, 1577836800000);
  EXPECT_EQ(ds[1].timestamp_ms, 1577836800000 + 1500 - 3'600'000);
}

TEST(Timestamp, Formats) {
  EXPECT_EQ(*parse_timestamp_ms("1234"), 1234);
  EXPECT_EQ(*parse_timestamp_ms("1970-01-01T00:00:00Z"), 0);
  EXPECT_EQ(*parse_timestamp_ms("1970-01-02T00:00:00.250Z"), 86'400'250);
  EXPECT_EQ(*parse_timestamp_ms("2000-03-01T00:00:00-00:30"), 951868800000 + 1'800'000);
  EXPECT_FALSE(parse_timestamp_ms("2000-13-01T00:00:00Z"));
  EXPECT_FALSE(parse_timestamp_ms(""));
  EXPECT_FALSE(parse_timestamp_ms("12ab"));
}

TEST(LoadDataset, RoundTrip) {
  const auto ds = fixtures::separable(50, 3, 1);
  std::ostringstream out;
  write_dataset_csv(ds, out);
  std::istringstream in(out.str());
  const auto back = load_dataset(ds.schema(), in);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(back[i], ds[i]);
}

TEST(Dataset, RejectsClassConditionalViolation) {
  std::vector<Example> rows{fixtures::numeric_example(0, {1.0}, 0, 1)};
  EXPECT_THROW(Dataset(fixtures::numeric_schema(1), rows), std::invalid_argument);
  std::vector<Example> dup{fixtures::numeric_example(0, {1.0}, 0, 0), fixtures::numeric_example(0, {2.0}, 0, 0)};
  EXPECT_THROW(Dataset(fixtures::numeric_schema(1), dup), std::invalid_argument);
  std::vector<Example> arity{fixtures::numeric_example(0, {1.0, 2.0}, 0, 0)};
  EXPECT_THROW(Dataset(fixtures::numeric_schema(1), arity), std::invalid_argument);
}

TEST(Split, SizesAndDeterminism) {
  const auto ds = fixtures::separable(10, 1, 3);
  const auto [train, val] = split_train_validation(ds, 0.3, 7);
  EXPECT_EQ(train.size(), 7u);
  EXPECT_EQ(val.size(), 3u);
  auto all = ids(train);
  for (auto id : ids(val)) all.insert(id);
  EXPECT_EQ(all, ids(ds));
  const auto [train2, val2] = split_train_validation(ds, 0.3, 7);
  EXPECT_EQ(train2.examples(), train.examples());
  EXPECT_EQ(val2.examples(), val.examples());
}

TEST(Split, Errors) {
  EXPECT_THROW(split_train_validation(fixtures::separable(1, 1, 3), 0.3, 7), std::invalid_argument);
  EXPECT_THROW(split_train_validation(fixtures::separable(3, 1, 3), 0.01, 7), std::invalid_argument);
  EXPECT_THROW(split_train_validation(fixtures::separable(3, 1, 3), 1.0, 7), std::invalid_argument);
}

TEST(Slice, SizesPartitionDeterminism) {
  const auto ds = fixtures::separable(10, 1, 4);
  const auto slices = slice_shuffled(ds, 3, 11);
  ASSERT_EQ(slices.size(), 3u);
  std::multiset<std::size_t> sizes;
  std::multiset<ExampleId> all;
  for (const auto& s : slices) {
    sizes.insert(s.size());
    for (auto id : ids(s)) all.insert(id);
  }
  EXPECT_EQ(sizes, (std::multiset<std::size_t>{3, 3, 4}));
  EXPECT_EQ(all, ids(ds));

  const auto nine = fixtures::separable(9, 1, 4);
  const auto a = slice_shuffled(nine, 3, 5);
  const auto b = slice_shuffled(nine, 3, 5);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a[i].examples(), b[i].examples());
}

TEST(Slice, Errors) {
  EXPECT_THROW(slice_shuffled(fixtures::separable(2, 1, 4), 3, 1), std::invalid_argument);
  EXPECT_THROW(slice_shuffled(fixtures::separable(5, 1, 4), 1, 1), std::invalid_argument);
}

TEST(Subsample, KeepsOrder) {
  const auto ds = fixtures::separable(100, 1, 4);
  const auto sub = subsample_rows(ds, 30, 9);
  ASSERT_EQ(sub.size(), 30u);
  for (std::size_t i = 1; i < sub.size(); ++i) EXPECT_LT(sub[i - 1].id, sub[i].id);
  EXPECT_EQ(subsample_rows(ds, 0, 9).size(), 100u);
  EXPECT_EQ(subsample_rows(ds, 30, 9).examples(), sub.examples());
}

TEST(Csv, EscapeRoundTrip) {
  std::ostringstream out;
  csv::write_row(out, {"plain", "with,comma", "with \"quote\"", "multi\nline"});
  std::istringstream in(out.str());
  csv::Reader reader(in);
  std::vector<std::string> fields;
  ASSERT_TRUE(reader.next(fields));
  EXPECT_EQ(fields, (std::vector<std::string>{"plain", "with,comma", "with \"quote\"", "multi\nline"}));
  EXPECT_FALSE(reader.next(fields));
}
