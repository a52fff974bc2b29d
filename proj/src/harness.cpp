#include "noisyfpr/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "noisyfpr/csv.hpp"
#include "noisyfpr/rng.hpp"
#include "noisyfpr/theory.hpp"

namespace noisyfpr {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

std::vector<CleaningMethod> canonical_method_order(std::vector<CleaningMethod> methods) {
  static constexpr CleaningMethod kOrder[] = {CleaningMethod::none, CleaningMethod::cleanlab,
                                              CleaningMethod::micromodel, CleaningMethod::direct};
  std::vector<CleaningMethod> out;
  for (auto m : kOrder) {
    if (std::find(methods.begin(), methods.end(), m) != methods.end()) out.push_back(m);
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in (0, 1)");
  }
  if (!(noise.flip_fraction >= 0.0 && noise.flip_fraction <= 1.0)) {
    throw ConfigError("noise.flip_fraction must lie in [0, 1]");
  }
  base.validate();
  micro.validate();
  if (k < 2) throw ConfigError("k must be >= 2");
  if (fpr_targets.empty()) throw ConfigError("fpr_targets must not be empty");
  for (std::size_t i = 0; i < fpr_targets.size(); ++i) {
    if (!(fpr_targets[i] > 0.0 && fpr_targets[i] < 1.0)) throw ConfigError("fpr_targets must lie in (0, 1)");
    if (i > 0 && !(fpr_targets[i] > fpr_targets[i - 1])) throw ConfigError("fpr_targets must be strictly ascending");
  }
  if (methods.empty()) throw ConfigError("methods must not be empty");
  if (!(vote_threshold >= 0.0 && vote_threshold < 1.0)) throw ConfigError("vote_threshold must lie in [0, 1)");
}

json ExperimentConfig::to_json() const {
  json ms = json::array();
  for (auto m : methods) ms.push_back(to_string(m));
  return {{"manifest", manifest.generic_string()},
          {"data", data.generic_string()},
          {"validation_fraction", validation_fraction},
          {"noise", {{"flip_fraction", noise.flip_fraction}, {"weighting", to_string(noise.weighting)}}},
          {"base", base.to_json()},
          {"micro", micro.to_json()},
          {"k", k},
          {"fpr_targets", fpr_targets},
          {"methods", ms},
          {"vote_threshold", vote_threshold},
          {"max_rows", max_rows},
          {"seed", seed},
          {"output_dir", output_dir.generic_string()}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  try {
    if (j.contains("manifest")) c.manifest = resolve(j["manifest"].get<std::string>());
    if (j.contains("data")) c.data = resolve(j["data"].get<std::string>());
    if (j.contains("output_dir")) c.output_dir = resolve(j["output_dir"].get<std::string>());
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    if (j.contains("noise")) {
      const auto& nj = j["noise"];
      c.noise.flip_fraction = nj.value("flip_fraction", c.noise.flip_fraction);
      const auto w = nj.value("weighting", std::string(to_string(c.noise.weighting)));
      if (w == "time_linear") {
        c.noise.weighting = NoiseWeighting::time_linear;
      } else if (w == "uniform") {
        c.noise.weighting = NoiseWeighting::uniform;
      } else {
        throw ConfigError("noise.weighting must be time_linear or uniform");
      }
    }
    if (j.contains("base")) c.base = GbdtConfig::from_json(j["base"], c.base);
    if (j.contains("micro")) c.micro = GbdtConfig::from_json(j["micro"], c.micro);
    c.k = j.value("k", c.k);
    if (j.contains("fpr_targets")) c.fpr_targets = j["fpr_targets"].get<std::vector<double>>();
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j["methods"]) c.methods.push_back(cleaning_method_from_string(m.get<std::string>()));
    }
    c.vote_threshold = j.value("vote_threshold", c.vote_threshold);
    c.max_rows = j.value("max_rows", c.max_rows);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.methods = canonical_method_order(c.methods);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return from_json(j, path.parent_path());
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json().dump())));
  return buf;
}

// ---------------------------------------------------------------------------
// Result

const MetricsReport& ExperimentResult::report(CleaningMethod method, double target) const {
  for (const auto& r : reports) {
    if (r.method == method && r.target_fpr == target) return r;
  }
  throw std::out_of_range(std::string("no report for ") + to_string(method));
}

json ExperimentResult::to_json() const {
  json rs = json::array();
  for (const auto& r : reports) rs.push_back(r.to_json());
  json ts = json::array();
  for (const auto& t : thresholds) ts.push_back(t.to_json());
  return {{"config", config.to_json()},
          {"config_hash", meta.config_hash},
          {"master_seed", meta.master_seed},
          {"stage_seeds", meta.stage_seeds},
          {"n_examples", meta.n_examples},
          {"n_train", meta.n_train},
          {"n_validation", meta.n_validation},
          {"known_fraud_rate", meta.known_fraud_rate},
          {"flip_budget", meta.flip_budget},
          {"thresholds", ts},
          {"reports", rs},
          {"noise", {{"train", train_noise.to_json()}, {"validation", validation_noise.to_json()}}}};
}

ExperimentResult ExperimentResult::from_json(const json& j) {
  ExperimentResult r;
  try {
    r.config = ExperimentConfig::from_json(j.at("config"));
    r.meta.config_hash = j.at("config_hash").get<std::string>();
    r.meta.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.meta.stage_seeds = j.at("stage_seeds").get<std::map<std::string, std::uint64_t>>();
    r.meta.n_examples = j.at("n_examples").get<std::size_t>();
    r.meta.n_train = j.at("n_train").get<std::size_t>();
    r.meta.n_validation = j.at("n_validation").get<std::size_t>();
    r.meta.known_fraud_rate = j.at("known_fraud_rate").get<double>();
    r.meta.flip_budget = j.at("flip_budget").get<std::size_t>();
    for (const auto& t : j.at("thresholds")) {
      r.thresholds.push_back({t.at("target_fpr").get<double>(), t.at("threshold").get<double>(),
                              t.at("achieved_fpr").get<double>()});
    }
    for (const auto& m : j.at("reports")) r.reports.push_back(MetricsReport::from_json(m));
    auto noise = [](const json& nj) {
      NoiseReport n;
      n.n_fraud = nj.at("n_fraud").get<std::size_t>();
      n.n_flipped = nj.at("n_flipped").get<std::size_t>();
      n.realized_noise_rate = nj.at("realized_noise_rate").get<double>();
      n.flipped_ids = nj.at("flipped_ids").get<std::vector<ExampleId>>();
      return n;
    };
    r.train_noise = noise(j.at("noise").at("train"));
    r.validation_noise = noise(j.at("noise").at("validation"));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed result document: ") + e.what());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

template <class F>
auto stage(const char* name, RunMetadata& meta, F&& body) -> decltype(body()) {
  Stopwatch sw;
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      meta.timings_seconds[name] += sw.seconds();
    } else {
      auto out = body();
      meta.timings_seconds[name] += sw.seconds();
      return out;
    }
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError& e) {
    throw StageError(name, StageError::Kind::config, e.what());
  } catch (const std::exception& e) {
    throw StageError(name, StageError::Kind::data, e.what());
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw StageError("config", StageError::Kind::config, e.what());
  }
  RunMetadata scratch;
  const FeatureSchema schema = stage("manifest", scratch, [&] { return parse_manifest(cfg.manifest); });
  Dataset ds = stage("load", scratch, [&] { return load_dataset(schema, cfg.data); });
  ExperimentResult r = run_experiment(cfg, ds);
  for (const auto& [k, v] : scratch.timings_seconds) r.meta.timings_seconds[k] += v;
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg_in, const Dataset& input) {
  ExperimentConfig cfg = cfg_in;
  try {
    cfg.methods = canonical_method_order(cfg.methods);
    cfg.validate();
  } catch (const ConfigError& e) {
    throw StageError("config", StageError::Kind::config, e.what());
  }

  ExperimentResult result;
  result.config = cfg;
  RunMetadata& meta = result.meta;
  meta.master_seed = cfg.seed;
  meta.config_hash = cfg.hash();
  for (const char* s : {"subsample", "split", "noise/train", "noise/validation", "base", "micro"}) {
    meta.stage_seeds[s] = derive_seed(cfg.seed, s);
  }

  const Dataset ds = stage("subsample", meta,
                           [&] { return subsample_rows(input, cfg.max_rows, meta.stage_seeds["subsample"]); });
  meta.n_examples = ds.size();
  auto [train_clean, val_clean] = stage(
      "split", meta, [&] { return split_train_validation(ds, cfg.validation_fraction, meta.stage_seeds["split"]); });
  meta.n_train = train_clean.size();
  meta.n_validation = val_clean.size();

  auto noisy = [&](const Dataset& d, const char* key) {
    NoiseSpec spec = cfg.noise;
    spec.seed = meta.stage_seeds[key];
    return inject_noise(d, spec);
  };
  auto [train_set, train_noise] = stage("noise", meta, [&] { return noisy(train_clean, "noise/train"); });
  auto [validation, validation_noise] = stage("noise", meta, [&] { return noisy(val_clean, "noise/validation"); });
  result.train_noise = train_noise;
  result.validation_noise = validation_noise;

  const Model base = stage("train_base", meta, [&] {
    GbdtConfig bc = cfg.base;
    bc.seed = meta.stage_seeds["base"];
    return train(train_set, LabelSource::observed, bc);
  });
  // Scored validation keeps y_true from the retained clean copy.
  const auto scored = stage("score", meta, [&] { return predict(base, validation); });

  result.thresholds = stage("threshold", meta, [&] {
    std::vector<ThresholdReport> ts;
    for (double target : cfg.fpr_targets) ts.push_back(threshold_for_fpr(scored, LabelSelector::truth(), target));
    return ts;
  });

  // Known fraud rate from the noise level and the observable rates only.
  const std::size_t m = stage("calibrate", meta, [&] {
    meta.known_fraud_rate =
        true_fraud_rate_from_noise(validation_noise.realized_noise_rate, validation.observed_fraud_rate());
    return calibrated_flip_budget(validation, meta.known_fraud_rate);
  });
  meta.flip_budget = m;

  const auto observed = observed_view(scored);
  for (CleaningMethod method : cfg.methods) {
    CleaningAssignment a;
    switch (method) {
      case CleaningMethod::none:
        a = stage("clean/none", meta, [&] { return clean_none(observed); });
        break;
      case CleaningMethod::direct:
        a = stage("clean/direct", meta, [&] { return clean_direct_calibrated(observed, m); });
        break;
      case CleaningMethod::cleanlab:
        a = stage("clean/cleanlab", meta, [&] { return clean_cleanlab_style(observed, m); });
        break;
      case CleaningMethod::micromodel: {
        const auto members = stage("train_micromodels", meta, [&] {
          return train_micromodels(train_set, cfg.k, cfg.micro, meta.stage_seeds["micro"]);
        });
        a = stage("clean/micromodel", meta, [&] {
          const auto votes = build_vote_matrix(members, validation, cfg.vote_threshold);
          return clean_micromodel(votes, m);
        });
        break;
      }
    }
    a.target_fraud_rate = meta.known_fraud_rate;
    result.assignments.emplace(method, std::move(a));
  }

  result.reports = stage("evaluate", meta, [&] {
    const std::size_t nt = cfg.fpr_targets.size();
    const std::size_t cells = cfg.methods.size() * nt;
    std::vector<MetricsReport> out(cells);
    const auto ncells = static_cast<std::int64_t>(cells);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < ncells; ++c) {
      const auto ci = static_cast<std::size_t>(c);
      const CleaningMethod method = cfg.methods[ci / nt];
      const ThresholdReport& tr = result.thresholds[ci % nt];
      out[ci] = evaluate_method(scored, result.assignments.at(method), tr.threshold, tr.target_fpr);
    }
    return out;
  });
  return result;
}

// ---------------------------------------------------------------------------
// Outputs

namespace {

const char* display_name(CleaningMethod m) {
  switch (m) {
    case CleaningMethod::none: return "None";
    case CleaningMethod::cleanlab: return "CleanLab";
    case CleaningMethod::micromodel: return "MicroModel";
    case CleaningMethod::direct: return "Direct";
  }
  return "?";
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::string emit_tables(const ExperimentResult& result, TableFormat format) {
  const auto& targets = result.config.fpr_targets;
  const auto& methods = result.config.methods;

  // Best err per target, judged at printed precision so ties are flagged together.
  std::vector<std::string> best(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    double lo = 0.0;
    bool first = true;
    for (auto m : methods) {
      const double e = std::stod(fixed(result.report(m, targets[t]).relative_error, 2));
      if (first || e < lo) lo = e;
      first = false;
    }
    best[t] = fixed(lo, 2);
  }
  auto is_best = [&](CleaningMethod m, std::size_t t) {
    return fixed(result.report(m, targets[t]).relative_error, 2) == best[t];
  };

  std::ostringstream out;
  if (format == TableFormat::csv) {
    std::vector<std::string> header{"method"};
    for (double t : targets) {
      header.push_back("fpr@" + shortest(t));
      header.push_back("err@" + shortest(t));
    }
    header.push_back("best_at");
    csv::write_row(out, header);
    for (auto m : methods) {
      std::vector<std::string> row{display_name(m)};
      std::string best_at;
      for (std::size_t t = 0; t < targets.size(); ++t) {
        const auto& r = result.report(m, targets[t]);
        row.push_back(fixed(r.fpr_estimate, 3));
        row.push_back(fixed(r.relative_error, 2));
        if (is_best(m, t)) best_at += (best_at.empty() ? "" : ";") + shortest(targets[t]);
      }
      row.push_back(best_at);
      csv::write_row(out, row);
    }
    return out.str();
  }

  out << "| Target FPR |";
  for (double t : targets) out << ' ' << shortest(t) << " | |";
  out << "\n| Method |";
  for (std::size_t t = 0; t < targets.size(); ++t) out << " fpr | err |";
  out << "\n|:---|";
  for (std::size_t t = 0; t < targets.size(); ++t) out << "---:|---:|";
  out << '\n';
  for (auto m : methods) {
    out << "| " << display_name(m) << " |";
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const auto& r = result.report(m, targets[t]);
      const std::string err = fixed(r.relative_error, 2);
      out << ' ' << fixed(r.fpr_estimate, 3) << " | " << (is_best(m, t) ? "**" + err + "**" : err) << " |";
    }
    out << '\n';
  }
  return out.str();
}

std::string results_csv(const ExperimentResult& result) {
  std::ostringstream out;
  csv::write_row(out, {"method", "target_fpr", "threshold", "fpr_estimate", "tpr_estimate", "fpr_actual",
                       "tpr_actual", "delta_fpr", "err", "signed_err", "n_flipped", "achieved_fraud_rate"});
  for (const auto& r : result.reports) {
    csv::write_row(out, {to_string(r.method), shortest(r.target_fpr), shortest(r.threshold), shortest(r.fpr_estimate),
                         shortest(r.tpr_estimate), shortest(r.fpr_actual), shortest(r.tpr_actual),
                         shortest(r.delta_fpr), shortest(r.relative_error), shortest(r.signed_relative_error),
                         std::to_string(r.n_flipped), shortest(r.achieved_fraud_rate)});
  }
  return out.str();
}

std::string noise_report_json(const ExperimentResult& result) {
  json j = {{"train", result.train_noise.to_json()},
            {"validation", result.validation_noise.to_json()},
            {"flip_fraction", result.config.noise.flip_fraction},
            {"weighting", to_string(result.config.noise.weighting)},
            {"seeds", {{"train", result.meta.stage_seeds.at("noise/train")},
                       {"validation", result.meta.stage_seeds.at("noise/validation")}}}};
  return j.dump(2) + "\n";
}

namespace {
void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}
}  // namespace

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "results.csv", results_csv(result));
  write_file(dir / "tables.md", emit_tables(result, TableFormat::markdown));
  write_file(dir / "noise_report.json", noise_report_json(result));
  write_file(dir / "result.json", result.to_json().dump(2) + "\n");
  const json meta = {{"config_hash", result.meta.config_hash}, {"timings_seconds", result.meta.timings_seconds}};
  write_file(dir / "run_meta.json", meta.dump(2) + "\n");
  for (const auto& [method, assign] : result.assignments) {
    std::ostringstream out;
    write_assignment_csv(assign, out);
    write_file(dir / (std::string("cleaning_") + to_string(method) + ".csv"), out.str());
  }
}

// ---------------------------------------------------------------------------
// Theory suite

namespace {

struct CheckTally {
  std::size_t evaluations = 0;
  std::size_t failures = 0;
  std::size_t degenerate = 0;
  double max_gap = 0.0;
  json failing = json::array();

  void record(const theory::IdentityReport& r, const std::function<json()>& describe) {
    ++evaluations;
    degenerate += r.degenerate;
    max_gap = std::max(max_gap, r.gap);
    if (!r.pass) {
      ++failures;
      if (failing.size() < 5) {
        json f = describe();
        f["lhs"] = r.lhs;
        f["rhs"] = r.rhs;
        f["gap"] = r.gap;
        failing.push_back(std::move(f));
      }
    }
  }

  json to_json() const {
    return {{"evaluations", evaluations}, {"failures", failures}, {"degenerate", degenerate},
            {"max_gap", max_gap},         {"failing", failing},   {"pass", failures == 0}};
  }
};

}  // namespace

TheorySuiteReport run_theory_suite(const TheorySuiteConfig& cfg) {
  if (cfg.trials == 0) throw std::invalid_argument("trials must be >= 1");
  if (cfg.n < 2) throw std::invalid_argument("world size n must be >= 2");

  using IdentityFn = theory::IdentityReport (*)(const theory::EmpiricalWorld&, double);
  struct Named {
    const char* name;
    IdentityFn fn;
  };
  std::vector<Named> identities;
  if (cfg.stated_forms) {
    identities.push_back({"proposition_fpr_stated", &theory::check_proposition_fpr});
    identities.push_back({"proposition_tpr_stated", &theory::check_proposition_tpr});
    identities.push_back({"covariance_fpr_stated", &theory::check_corollary_covariance});
    identities.push_back({"covariance_tpr_stated", &theory::check_corollary_covariance_tpr});
  }
  if (cfg.exact_forms) {
    identities.push_back({"proposition_fpr_exact", &theory::check_proposition_fpr_exact});
    identities.push_back({"proposition_tpr_exact", &theory::check_proposition_tpr_exact});
    identities.push_back({"covariance_fpr_exact", &theory::check_corollary_covariance_exact});
    identities.push_back({"covariance_tpr_exact", &theory::check_corollary_covariance_tpr_exact});
  }
  identities.push_back({"odds_ratio", &theory::check_odds_ratio});

  CheckTally lemma, lemma_uncalibrated;
  std::vector<CheckTally> tallies(identities.size());

  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t world_seed = derive_seed(cfg.seed, "world/" + std::to_string(trial));
    Rng rng(world_seed);
    const auto world = theory::random_calibrated_world(rng, cfg.n);
    auto describe = [&](double t) {
      return [&, t] { return json{{"trial", trial}, {"seed", world_seed}, {"t", t}, {"world", world.to_json()}}; };
    };
    lemma.record(theory::check_lemma_calibration(world), describe(0.0));
    // Contrapositive direction on unconstrained cleanings of the same size.
    const auto loose = theory::random_cleaning_world(rng, cfg.n);
    lemma_uncalibrated.record(theory::check_lemma_calibration(loose), [&] {
      return json{{"trial", trial}, {"seed", world_seed}, {"world", loose.to_json()}};
    });
    for (double t : world.distinct_scores()) {
      for (std::size_t c = 0; c < identities.size(); ++c) tallies[c].record(identities[c].fn(world, t), describe(t));
    }
  }

  CheckTally extremality;
  json by_e = json::object();
  std::vector<std::size_t> instances_by_e(3, 0);
  for (std::size_t trial = 0; trial < cfg.extremality_trials; ++trial) {
    const std::size_t e = trial % 3;
    const std::uint64_t inst_seed = derive_seed(cfg.seed, "extremality/" + std::to_string(trial));
    Rng rng(inst_seed);
    const auto points = theory::random_extremality_instance(rng, cfg.n_max, e);
    ++instances_by_e[e];
    std::vector<double> scores;
    for (const auto& p : points) scores.push_back(p.score);
    std::sort(scores.begin(), scores.end());
    scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
    for (double t : scores) {
      const auto rep = theory::brute_force_extremality(points, e, t);
      theory::IdentityReport as_identity;
      as_identity.lhs = rep.direct_delta;
      as_identity.rhs = rep.max_delta;
      as_identity.gap = rep.max_delta - rep.direct_delta;
      as_identity.pass = rep.pass;
      extremality.record(as_identity, [&, t] {
        json pts = json::array();
        for (const auto& p : points) pts.push_back({p.score, p.y_true, p.y_observed});
        return json{{"trial", trial}, {"seed", inst_seed}, {"e", e}, {"t", t}, {"points", pts},
                    {"argmax", rep.argmax}};
      });
    }
  }
  for (std::size_t e = 0; e < 3; ++e) by_e[std::to_string(e)] = instances_by_e[e];

  json checks = json::object();
  checks["lemma"] = lemma.to_json();
  checks["lemma_uncalibrated"] = lemma_uncalibrated.to_json();
  bool pass = lemma.failures == 0 && lemma_uncalibrated.failures == 0;
  for (std::size_t c = 0; c < identities.size(); ++c) {
    checks[identities[c].name] = tallies[c].to_json();
    pass = pass && tallies[c].failures == 0;
  }
  json ex = extremality.to_json();
  ex["instances"] = cfg.extremality_trials;
  ex["instances_by_e"] = by_e;
  checks["extremality"] = ex;
  pass = pass && extremality.failures == 0;

  TheorySuiteReport out;
  out.pass = pass;
  out.report = {{"config",
                 {{"seed", cfg.seed},
                  {"trials", cfg.trials},
                  {"n", cfg.n},
                  {"extremality_trials", cfg.extremality_trials},
                  {"n_max", cfg.n_max},
                  {"stated_forms", cfg.stated_forms},
                  {"exact_forms", cfg.exact_forms},
                  {"tolerance", theory::kIdentityTolerance}}},
                {"checks", checks},
                {"pass", pass}};
  return out;
}

}  // namespace noisyfpr
