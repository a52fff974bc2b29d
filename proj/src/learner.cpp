#include "noisyfpr/learner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "noisyfpr/error.hpp"
#include "noisyfpr/rng.hpp"

namespace noisyfpr {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

GbdtConfig GbdtConfig::micro_defaults() {
  GbdtConfig cfg;
  cfg.n_rounds = 100;
  return cfg;
}

void GbdtConfig::validate() const {
  if (n_rounds < 1) throw ConfigError("n_rounds must be >= 1");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw ConfigError("learning_rate must lie in (0, 1]");
  if (n_bins < 2 || n_bins > 4096) throw ConfigError("n_bins must lie in [2, 4096]");
  if (min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
  if (!(l2 >= 0.0)) throw ConfigError("l2 must be >= 0");
  if (!(subsample > 0.0 && subsample <= 1.0)) throw ConfigError("subsample must lie in (0, 1]");
}

json GbdtConfig::to_json() const {
  return {{"n_rounds", n_rounds}, {"max_depth", max_depth}, {"learning_rate", learning_rate},
          {"n_bins", n_bins},     {"min_leaf", min_leaf},   {"l2", l2},
          {"subsample", subsample}, {"seed", seed}};
}

GbdtConfig GbdtConfig::from_json(const json& j) { return from_json(j, GbdtConfig{}); }

GbdtConfig GbdtConfig::from_json(const json& j, const GbdtConfig& defaults) {
  GbdtConfig c = defaults;
  try {
    c.n_rounds = j.value("n_rounds", c.n_rounds);
    c.max_depth = j.value("max_depth", c.max_depth);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.n_bins = j.value("n_bins", c.n_bins);
    c.min_leaf = j.value("min_leaf", c.min_leaf);
    c.l2 = j.value("l2", c.l2);
    c.subsample = j.value("subsample", c.subsample);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("learner config: ") + e.what());
  }
  c.validate();
  return c;
}

double CategoryEncoder::encode(std::string_view token) const {
  const auto it = values.find(token);
  return it == values.end() ? prior : it->second;
}

double sigmoid(double raw) { return 1.0 / (1.0 + std::exp(-raw)); }

// ---------------------------------------------------------------------------
// Encoding and scoring

namespace {

kernels::DenseMatrix encode_rows(const std::vector<std::optional<CategoryEncoder>>& encoders,
                                 std::span<const Example* const> rows) {
  kernels::DenseMatrix m;
  m.rows = rows.size();
  m.cols = encoders.size();
  m.values.resize(m.rows * m.cols);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double* out = m.values.data() + i * m.cols;
    const auto& feats = rows[i]->features;
    for (std::size_t j = 0; j < m.cols; ++j) {
      const FeatureValue& v = feats[j];
      if (v.is_missing()) {
        out[j] = nan;
      } else if (encoders[j]) {
        out[j] = encoders[j]->encode(v.token());
      } else {
        out[j] = v.number();
      }
    }
  }
  return m;
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double mean_logloss(std::span<const double> raw, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) s += softplus(raw[i]) - y[i] * raw[i];
  return s / static_cast<double>(raw.size());
}

}  // namespace

void Model::check_compatible(const FeatureSchema& schema) const {
  const auto& cols = schema.columns();
  if (cols.size() != columns_.size()) {
    throw std::invalid_argument("schema has " + std::to_string(cols.size()) + " features, model expects " +
                                std::to_string(columns_.size()));
  }
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].kind != columns_[j].kind) {
      throw std::invalid_argument("feature " + std::to_string(j) + " (" + cols[j].name + ") is " +
                                  to_string(cols[j].kind) + ", model expects " + to_string(columns_[j].kind));
    }
  }
}

kernels::DenseMatrix Model::encode(const Dataset& ds) const {
  check_compatible(ds.schema());
  std::vector<const Example*> rows;
  rows.reserve(ds.size());
  for (const auto& ex : ds.examples()) rows.push_back(&ex);
  return encode_rows(encoders_, rows);
}

double Model::raw_score(const Example& ex) const {
  if (ex.features.size() != columns_.size()) throw std::invalid_argument("example arity does not match model");
  const Example* row = &ex;
  const auto m = encode_rows(encoders_, std::span<const Example* const>(&row, 1));
  double s = base_log_odds_;
  for (const auto& t : trees_) s += t.evaluate(m.row(0));
  return s;
}

double Model::score(const Example& ex) const { return sigmoid(raw_score(ex)); }

std::vector<double> Model::scores(const Dataset& ds) const {
  const auto m = encode(ds);
  std::vector<double> out(ds.size());
  kernels::predict_raw_parallel(trees_, base_log_odds_, m, out);
  for (double& v : out) v = sigmoid(v);
  return out;
}

// ---------------------------------------------------------------------------
// Training

struct ModelBuilder {
  static Model make() { return Model(); }
  static GbdtConfig& config(Model& m) { return m.config_; }
  static std::vector<ColumnSpec>& columns(Model& m) { return m.columns_; }
  static std::vector<std::optional<CategoryEncoder>>& encoders(Model& m) { return m.encoders_; }
  static std::vector<RegressionTree>& trees(Model& m) { return m.trees_; }
  static double& base(Model& m) { return m.base_log_odds_; }
  static bool& degenerate(Model& m) { return m.degenerate_; }
};

namespace {

std::vector<double> quantile_edges(std::vector<double> values, int n_bins) {
  std::vector<double> edges;
  if (values.empty()) return edges;
  std::sort(values.begin(), values.end());
  std::vector<double> distinct;
  std::unique_copy(values.begin(), values.end(), std::back_inserter(distinct));
  if (distinct.size() <= static_cast<std::size_t>(n_bins)) {
    edges.assign(distinct.begin(), distinct.end() - 1);
    return edges;
  }
  const std::size_t n = values.size();
  for (int q = 1; q < n_bins; ++q) {
    const std::size_t idx = (static_cast<std::size_t>(q) * n) / static_cast<std::size_t>(n_bins);
    const double e = values[idx == 0 ? 0 : idx - 1];
    if (e >= distinct.back()) break;
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }
  return edges;
}

struct SplitCandidate {
  double gain = 0.0;
  std::int32_t feature = -1;
  std::uint16_t bin = 0;
  bool missing_left = false;
};

class TreeGrower {
 public:
  TreeGrower(const kernels::BinnedColumns& bins, const std::vector<std::vector<double>>& edges,
             const GbdtConfig& cfg)
      : bins_(bins), edges_(edges), cfg_(cfg), layout_(bins), hist_(layout_.total) {}

  /// Grows one tree on `rows`; returns it with unscaled Newton leaf values and
  /// fills `split_bins` with the bin index of every internal node.
  RegressionTree grow(std::span<const double> grad, std::span<const double> hess,
                      std::vector<std::uint32_t> rows, std::vector<std::uint16_t>& split_bins) {
    RegressionTree tree;
    split_bins.clear();
    struct Work {
      std::int32_t node;
      std::vector<std::uint32_t> rows;
      int depth;
    };
    std::deque<Work> queue;
    tree.nodes.emplace_back();
    split_bins.push_back(0);
    queue.push_back({0, std::move(rows), 0});

    while (!queue.empty()) {
      Work w = std::move(queue.front());
      queue.pop_front();
      kernels::build_histograms_parallel(bins_, grad, hess, w.rows, layout_, hist_);
      const kernels::GradStat total = feature_total(0);
      auto& node = tree.nodes[static_cast<std::size_t>(w.node)];
      node.value = -total.grad / (total.hess + cfg_.l2);

      if (w.depth >= cfg_.max_depth || w.rows.size() < 2 * static_cast<std::size_t>(cfg_.min_leaf)) continue;
      const SplitCandidate best = find_split(total);
      if (best.feature < 0) continue;

      const auto f = static_cast<std::size_t>(best.feature);
      const std::uint16_t* col = bins_.columns[f].data();
      std::vector<std::uint32_t> left, right;
      for (std::uint32_t r : w.rows) {
        const std::uint16_t b = col[r];
        const bool go_left = b == kernels::kMissingBin ? best.missing_left : b <= best.bin;
        (go_left ? left : right).push_back(r);
      }
      const auto li = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      split_bins.push_back(0);
      split_bins.push_back(0);
      auto& parent = tree.nodes[static_cast<std::size_t>(w.node)];
      parent.feature = best.feature;
      parent.threshold = edges_[f][best.bin];
      parent.missing_left = best.missing_left;
      parent.left = li;
      parent.right = li + 1;
      split_bins[static_cast<std::size_t>(w.node)] = best.bin;
      queue.push_back({li, std::move(left), w.depth + 1});
      queue.push_back({li + 1, std::move(right), w.depth + 1});
    }
    return tree;
  }

 private:
  kernels::GradStat feature_total(std::size_t f) const {
    kernels::GradStat s;
    const std::size_t end = layout_.offset[f] + bins_.bin_count[f] + 1;
    for (std::size_t i = layout_.offset[f]; i < end; ++i) s += hist_[i];
    return s;
  }

  double score(double g, double h) const { return g * g / (h + cfg_.l2); }

  SplitCandidate find_split(const kernels::GradStat& total) const {
    SplitCandidate best;
    const double parent = score(total.grad, total.hess);
    const auto min_leaf = static_cast<std::uint32_t>(cfg_.min_leaf);
    for (std::size_t f = 0; f < bins_.features(); ++f) {
      const std::uint16_t nb = bins_.bin_count[f];
      if (nb < 2) continue;
      const kernels::GradStat missing = hist_[layout_.missing_slot(f, bins_)];
      kernels::GradStat present = total;
      present.grad -= missing.grad;
      present.hess -= missing.hess;
      present.count -= missing.count;
      kernels::GradStat acc;
      for (std::uint16_t b = 0; b + 1 < nb; ++b) {
        acc += hist_[layout_.offset[f] + b];
        for (int missing_left = 0; missing_left < (missing.count > 0 ? 2 : 1); ++missing_left) {
          kernels::GradStat l = acc;
          if (missing_left) l += missing;
          const kernels::GradStat r{total.grad - l.grad, total.hess - l.hess, total.count - l.count};
          if (l.count < min_leaf || r.count < min_leaf) continue;
          const double gain = score(l.grad, l.hess) + score(r.grad, r.hess) - parent;
          if (gain > best.gain + 1e-12) {
            best = {gain, static_cast<std::int32_t>(f), b, missing_left == 1};
          }
        }
      }
    }
    return best;
  }

  const kernels::BinnedColumns& bins_;
  const std::vector<std::vector<double>>& edges_;
  const GbdtConfig& cfg_;
  kernels::HistogramLayout layout_;
  std::vector<kernels::GradStat> hist_;
};

std::size_t leaf_of(const RegressionTree& tree, const std::vector<std::uint16_t>& split_bins,
                    const kernels::BinnedColumns& bins, std::uint32_t row) {
  std::size_t i = 0;
  for (;;) {
    const TreeNode& n = tree.nodes[i];
    if (n.is_leaf()) return i;
    const std::uint16_t b = bins.columns[static_cast<std::size_t>(n.feature)][row];
    const bool go_left = b == kernels::kMissingBin ? n.missing_left : b <= split_bins[i];
    i = static_cast<std::size_t>(go_left ? n.left : n.right);
  }
}

}  // namespace

TrainResult train_with_trace(const Dataset& ds, LabelSource labels, const GbdtConfig& cfg) {
  cfg.validate();
  if (ds.empty()) throw std::invalid_argument("cannot train on an empty dataset");

  // Canonical row order: ascending id.
  std::vector<const Example*> rows;
  rows.reserve(ds.size());
  for (const auto& ex : ds.examples()) rows.push_back(&ex);
  std::sort(rows.begin(), rows.end(), [](const Example* a, const Example* b) { return a->id < b->id; });

  const std::size_t n = rows.size();
  std::vector<double> y(n);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Label l = labels == LabelSource::truth ? rows[i]->y_true : rows[i]->y_observed;
    y[i] = l;
    positives += l;
  }

  Model model = ModelBuilder::make();
  ModelBuilder::config(model) = cfg;
  ModelBuilder::columns(model) = ds.schema().columns();
  const auto& cols = ds.schema().columns();
  const std::size_t d = cols.size();

  TrainResult result{model, {}, 0.0};
  const double prior = static_cast<double>(positives) / static_cast<double>(n);

  // Target statistics for categorical columns.
  auto& encoders = ModelBuilder::encoders(model);
  encoders.assign(d, std::nullopt);
  for (std::size_t j = 0; j < d; ++j) {
    if (cols[j].kind != FeatureKind::categorical) continue;
    std::map<std::string, std::pair<double, double>, std::less<>> stats;  // token -> (sum y, count)
    for (std::size_t i = 0; i < n; ++i) {
      const FeatureValue& v = rows[i]->features[j];
      if (v.is_missing()) continue;
      auto& s = stats[v.token()];
      s.first += y[i];
      s.second += 1.0;
    }
    CategoryEncoder enc;
    enc.prior = prior;
    for (const auto& [token, s] : stats) {
      enc.values.emplace(token, (s.first + CategoryEncoder::kSmoothing * prior) /
                                    (s.second + CategoryEncoder::kSmoothing));
    }
    encoders[j] = std::move(enc);
  }

  if (positives == 0 || positives == n) {
    // Laplace-smoothed prior, no trees.
    ModelBuilder::base(model) = std::log((static_cast<double>(positives) + 1.0) /
                                         (static_cast<double>(n - positives) + 1.0));
    ModelBuilder::degenerate(model) = true;
    std::vector<double> raw(n, ModelBuilder::base(model));
    result.initial_loss = mean_logloss(raw, y);
    result.model = std::move(model);
    return result;
  }

  const double base = std::log(prior / (1.0 - prior));
  ModelBuilder::base(model) = base;

  const kernels::DenseMatrix x = encode_rows(encoders, rows);
  kernels::BinnedColumns bins;
  bins.rows = n;
  bins.bin_count.resize(d);
  bins.columns.resize(d);
  std::vector<std::vector<double>> edges(d);
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> present;
    present.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x.values[i * d + j];
      if (!std::isnan(v)) present.push_back(v);
    }
    edges[j] = quantile_edges(std::move(present), cfg.n_bins);
    bins.bin_count[j] = static_cast<std::uint16_t>(edges[j].size() + 1);
    auto& col = bins.columns[j];
    col.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x.values[i * d + j];
      col[i] = std::isnan(v) ? kernels::kMissingBin
                             : static_cast<std::uint16_t>(std::lower_bound(edges[j].begin(), edges[j].end(), v) -
                                                          edges[j].begin());
    }
  }

  std::vector<double> raw(n, base), grad(n), hess(n), delta(n), trial(n);
  result.initial_loss = mean_logloss(raw, y);
  double loss = result.initial_loss;
  TreeGrower grower(bins, edges, cfg);
  std::vector<std::uint16_t> split_bins;
  auto& trees = ModelBuilder::trees(model);
  trees.reserve(static_cast<std::size_t>(cfg.n_rounds));

  for (int round = 0; round < cfg.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(raw[i]);
      grad[i] = p - y[i];
      hess[i] = std::max(p * (1.0 - p), 1e-16);
    }
    std::vector<std::uint32_t> sample;
    sample.reserve(n);
    if (cfg.subsample < 1.0) {
      Rng rng(derive_seed(cfg.seed, "round/" + std::to_string(round)));
      for (std::size_t i = 0; i < n; ++i) {
        if (rng.uniform() < cfg.subsample) sample.push_back(static_cast<std::uint32_t>(i));
      }
      if (sample.empty()) sample.push_back(static_cast<std::uint32_t>(rng.below(n)));
    } else {
      for (std::size_t i = 0; i < n; ++i) sample.push_back(static_cast<std::uint32_t>(i));
    }

    RegressionTree tree = grower.grow(grad, hess, std::move(sample), split_bins);
    for (std::size_t i = 0; i < n; ++i) {
      delta[i] = cfg.learning_rate * tree.nodes[leaf_of(tree, split_bins, bins, static_cast<std::uint32_t>(i))].value;
    }

    // Backtracking keeps the training loss non-increasing round over round.
    double step = 1.0;
    double next_loss = loss;
    bool accepted = false;
    for (int attempt = 0; attempt < 40; ++attempt, step *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = raw[i] + step * delta[i];
      next_loss = mean_logloss(trial, y);
      if (next_loss <= loss) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      step = 0.0;
      next_loss = loss;
    }
    const double scale = cfg.learning_rate * step;
    for (auto& node : tree.nodes) node.value = node.is_leaf() ? node.value * scale : 0.0;
    if (accepted) raw.swap(trial);
    loss = next_loss;
    result.loss_per_round.push_back(loss);
    trees.push_back(std::move(tree));
  }

  result.model = std::move(model);
  return result;
}

Model train(const Dataset& ds, LabelSource labels, const GbdtConfig& cfg) {
  return train_with_trace(ds, labels, cfg).model;
}

std::vector<ScoredExample> predict(const Model& model, const Dataset& ds) {
  const auto s = model.scores(ds);
  std::vector<ScoredExample> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Example& ex = ds[i];
    out.push_back({ex.id, s[i], ex.y_true, ex.y_observed});
  }
  return out;
}

std::vector<Model> train_micromodels(const Dataset& train_set, std::size_t k, const GbdtConfig& cfg,
                                     std::uint64_t seed) {
  const auto slices = slice_shuffled(train_set, k, derive_seed(seed, "slices"));
  std::vector<std::optional<Model>> members(k);
  const auto nk = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < nk; ++i) {
    GbdtConfig member_cfg = cfg;
    member_cfg.seed = derive_seed(seed, "member/" + std::to_string(i));
    members[static_cast<std::size_t>(i)] =
        train(slices[static_cast<std::size_t>(i)], LabelSource::observed, member_cfg);
  }
  std::vector<Model> out;
  out.reserve(k);
  for (auto& m : members) out.push_back(std::move(*m));
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {
constexpr const char* kFormat = "noisyfpr.gbdt";
constexpr int kVersion = 1;
}  // namespace

json Model::to_json() const {
  json cols = json::array();
  for (const auto& c : columns_) cols.push_back({{"name", c.name}, {"kind", to_string(c.kind)}});
  json encs = json::array();
  for (const auto& e : encoders_) {
    if (!e) {
      encs.push_back(nullptr);
      continue;
    }
    json values = json::object();
    for (const auto& [token, v] : e->values) values[token] = v;
    encs.push_back({{"prior", e->prior}, {"values", values}});
  }
  json trees = json::array();
  for (const auto& t : trees_) {
    json nodes = json::array();
    for (const auto& nd : t.nodes) {
      nodes.push_back({nd.feature, nd.threshold, nd.missing_left, nd.left, nd.right, nd.value});
    }
    trees.push_back(nodes);
  }
  return {{"format", kFormat},       {"version", kVersion},         {"config", config_.to_json()},
          {"columns", cols},         {"encoders", encs},            {"base_log_odds", base_log_odds_},
          {"degenerate", degenerate_}, {"trees", trees}};
}

Model Model::from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat) throw DataError("not a noisyfpr model document");
    if (j.at("version").get<int>() != kVersion) {
      throw DataError("unsupported model version " + std::to_string(j.at("version").get<int>()));
    }
    Model m;
    m.config_ = GbdtConfig::from_json(j.at("config"));
    for (const auto& c : j.at("columns")) {
      const auto kind = c.at("kind").get<std::string>();
      m.columns_.push_back({c.at("name").get<std::string>(),
                            kind == "categorical" ? FeatureKind::categorical : FeatureKind::numeric});
    }
    for (const auto& e : j.at("encoders")) {
      if (e.is_null()) {
        m.encoders_.emplace_back();
        continue;
      }
      CategoryEncoder enc;
      enc.prior = e.at("prior").get<double>();
      for (const auto& [token, v] : e.at("values").items()) enc.values.emplace(token, v.get<double>());
      m.encoders_.emplace_back(std::move(enc));
    }
    if (m.encoders_.size() != m.columns_.size()) throw DataError("encoder count does not match columns");
    m.base_log_odds_ = j.at("base_log_odds").get<double>();
    m.degenerate_ = j.at("degenerate").get<bool>();
    for (const auto& t : j.at("trees")) {
      RegressionTree tree;
      for (const auto& nd : t) {
        tree.nodes.push_back({nd.at(0).get<std::int32_t>(), nd.at(1).get<double>(), nd.at(2).get<bool>(),
                              nd.at(3).get<std::int32_t>(), nd.at(4).get<std::int32_t>(), nd.at(5).get<double>()});
      }
      m.trees_.push_back(std::move(tree));
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace noisyfpr
