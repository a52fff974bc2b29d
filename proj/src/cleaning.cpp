#include "noisyfpr/cleaning.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "noisyfpr/csv.hpp"
#include "noisyfpr/error.hpp"
#include "noisyfpr/rng.hpp"

namespace noisyfpr {

const char* to_string(CleaningMethod m) {
  switch (m) {
    case CleaningMethod::none: return "none";
    case CleaningMethod::direct: return "direct";
    case CleaningMethod::cleanlab: return "cleanlab";
    case CleaningMethod::micromodel: return "micromodel";
  }
  return "?";
}

CleaningMethod cleaning_method_from_string(const std::string& name) {
  for (auto m : {CleaningMethod::none, CleaningMethod::direct, CleaningMethod::cleanlab,
                 CleaningMethod::micromodel}) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError("unknown cleaning method \"" + name + "\"");
}

std::vector<ObservedScore> observed_view(std::span<const ScoredExample> scored) {
  std::vector<ObservedScore> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back({s.id, s.score, s.y_observed});
  return out;
}

std::vector<ObservedScore> observed_view(const Dataset& ds) {
  std::vector<ObservedScore> out;
  out.reserve(ds.size());
  for (const auto& ex : ds.examples()) out.push_back({ex.id, 0.0, ex.y_observed});
  return out;
}

std::size_t CleaningAssignment::count_cleaned_positive() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](const CleanedLabel& l) { return l.cleaned == 1; }));
}

VoteMatrix::VoteMatrix(std::vector<ExampleId> ids, std::vector<Label> y_observed, std::size_t members,
                       std::vector<std::uint8_t> votes)
    : ids_(std::move(ids)), y_observed_(std::move(y_observed)), members_(members), votes_(std::move(votes)) {
  if (members_ == 0) throw std::invalid_argument("vote matrix needs at least one member");
  if (y_observed_.size() != ids_.size() || votes_.size() != ids_.size() * members_) {
    throw std::invalid_argument("vote matrix dimensions disagree");
  }
}

double VoteMatrix::fraction(std::size_t i) const {
  std::size_t yes = 0;
  for (std::size_t m = 0; m < members_; ++m) yes += vote(i, m);
  return static_cast<double>(yes) / static_cast<double>(members_);
}

VoteMatrix build_vote_matrix(std::span<const Model> members, const Dataset& ds, double vote_threshold) {
  const std::size_t n = ds.size();
  const std::size_t k = members.size();
  std::vector<std::uint8_t> votes(n * k);
  const auto nk = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t m = 0; m < nk; ++m) {
    const auto s = members[static_cast<std::size_t>(m)].scores(ds);
    for (std::size_t i = 0; i < n; ++i) {
      votes[i * k + static_cast<std::size_t>(m)] = s[i] > vote_threshold ? 1 : 0;
    }
  }
  std::vector<ExampleId> ids;
  std::vector<Label> yo;
  ids.reserve(n);
  yo.reserve(n);
  for (const auto& ex : ds.examples()) {
    ids.push_back(ex.id);
    yo.push_back(ex.y_observed);
  }
  return VoteMatrix(std::move(ids), std::move(yo), k, std::move(votes));
}

namespace {

CleaningAssignment start(CleaningMethod method, std::span<const ObservedScore> observed) {
  CleaningAssignment a;
  a.method = method;
  a.labels.reserve(observed.size());
  for (const auto& o : observed) a.labels.push_back({o.id, o.y_observed, o.y_observed, std::nullopt});
  return a;
}

void finish(CleaningAssignment& a, double target) {
  a.target_fraud_rate = target;
  a.achieved_fraud_rate =
      a.labels.empty() ? 0.0 : static_cast<double>(a.count_cleaned_positive()) / static_cast<double>(a.size());
}

double fraction_of(std::size_t count, std::size_t n) {
  return n == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(n);
}

std::size_t count_observed_positive(std::span<const ObservedScore> s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](const ObservedScore& o) { return o.y_observed == 1; }));
}

/// Indices of observed negatives ordered by descending key, ties by ascending id.
std::vector<std::size_t> ranked_negatives(std::span<const ObservedScore> s, std::span<const double> key) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].y_observed == 0) idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return key[a] > key[b];
    return s[a].id < s[b].id;
  });
  return idx;
}

}  // namespace

CleaningAssignment clean_none(std::span<const ObservedScore> observed) {
  CleaningAssignment a = start(CleaningMethod::none, observed);
  finish(a, fraction_of(count_observed_positive(observed), observed.size()));
  return a;
}

CleaningAssignment clean_none(const Dataset& ds) { return clean_none(observed_view(ds)); }

std::size_t calibrated_flip_budget(std::size_t n, std::size_t n_observed_positive, double p_y1) {
  if (!(p_y1 >= 0.0 && p_y1 <= 1.0)) throw std::invalid_argument("target fraud rate must lie in [0, 1]");
  const std::int64_t target = round_half_up(p_y1 * static_cast<double>(n));
  const auto positives = static_cast<std::int64_t>(n_observed_positive);
  if (target < positives) {
    throw std::invalid_argument("target fraud rate " + std::to_string(p_y1) +
                                " is below the observed fraud rate; positives cannot be un-flipped");
  }
  return static_cast<std::size_t>(target - positives);
}

std::size_t calibrated_flip_budget(const Dataset& ds, double p_y1) {
  return calibrated_flip_budget(ds.size(), ds.count_observed_positive(), p_y1);
}

CleaningAssignment clean_direct_calibrated(std::span<const ObservedScore> scored, std::size_t m) {
  const std::size_t negatives = scored.size() - count_observed_positive(scored);
  if (m > negatives) {
    throw std::invalid_argument("flip budget " + std::to_string(m) + " exceeds " + std::to_string(negatives) +
                                " observed negatives");
  }
  CleaningAssignment a = start(CleaningMethod::direct, scored);
  std::vector<double> key(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    key[i] = scored[i].score;
    a.labels[i].rank_statistic = scored[i].score;
  }
  const auto order = ranked_negatives(scored, key);
  for (std::size_t r = 0; r < m; ++r) a.labels[order[r]].cleaned = 1;
  a.n_flipped = m;
  finish(a, fraction_of(count_observed_positive(scored) + m, scored.size()));
  return a;
}

CleaningAssignment clean_cleanlab_style(std::span<const ObservedScore> scored, std::size_t m_cap) {
  double sum = 0.0;
  std::size_t positives = 0;
  for (const auto& s : scored) {
    if (s.y_observed == 1) {
      sum += s.score;
      ++positives;
    }
  }
  if (positives == 0) throw std::invalid_argument("cleanlab-style threshold needs an observed positive");
  const double tau = sum / static_cast<double>(positives);

  CleaningAssignment a = start(CleaningMethod::cleanlab, scored);
  std::vector<double> key(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    key[i] = scored[i].score;
    a.labels[i].rank_statistic = scored[i].score;
  }
  for (std::size_t i : ranked_negatives(scored, key)) {
    if (a.n_flipped >= m_cap || !(scored[i].score > tau)) break;
    a.labels[i].cleaned = 1;
    ++a.n_flipped;
  }
  finish(a, fraction_of(positives + m_cap, scored.size()));
  return a;
}

CleaningAssignment clean_micromodel(const VoteMatrix& votes, std::size_t m) {
  std::vector<ObservedScore> observed;
  std::vector<double> key(votes.size());
  observed.reserve(votes.size());
  for (std::size_t i = 0; i < votes.size(); ++i) {
    key[i] = votes.fraction(i);
    observed.push_back({votes.id(i), 0.0, votes.y_observed(i)});
  }
  const std::size_t negatives = observed.size() - count_observed_positive(observed);
  if (m > negatives) {
    throw std::invalid_argument("flip budget " + std::to_string(m) + " exceeds " + std::to_string(negatives) +
                                " observed negatives");
  }
  CleaningAssignment a = start(CleaningMethod::micromodel, observed);
  for (std::size_t i = 0; i < votes.size(); ++i) a.labels[i].rank_statistic = key[i];
  for (std::size_t i : ranked_negatives(observed, key)) {
    if (a.n_flipped >= m || key[i] <= 0.0) break;
    a.labels[i].cleaned = 1;
    ++a.n_flipped;
  }
  finish(a, fraction_of(count_observed_positive(observed) + m, observed.size()));
  return a;
}

CleaningErrors cleaning_errors(const CleaningAssignment& assign, const Dataset& ds) {
  if (assign.size() != ds.size()) {
    throw std::invalid_argument("assignment covers " + std::to_string(assign.size()) + " ids, dataset has " +
                                std::to_string(ds.size()));
  }
  std::unordered_map<ExampleId, Label> truth;
  truth.reserve(ds.size());
  for (const auto& ex : ds.examples()) truth.emplace(ex.id, ex.y_true);
  CleaningErrors err;
  std::unordered_map<ExampleId, bool> seen;
  for (const auto& l : assign.labels) {
    const auto it = truth.find(l.id);
    if (it == truth.end()) throw std::invalid_argument("assignment id " + std::to_string(l.id) + " not in dataset");
    if (!seen.emplace(l.id, true).second) throw std::invalid_argument("duplicate assignment id " + std::to_string(l.id));
    if (it->second == 0 && l.cleaned == 1) err.e1_ids.push_back(l.id);
    if (it->second == 1 && l.cleaned == 0) err.e2_ids.push_back(l.id);
  }
  std::sort(err.e1_ids.begin(), err.e1_ids.end());
  std::sort(err.e2_ids.begin(), err.e2_ids.end());
  err.e1_count = err.e1_ids.size();
  err.e2_count = err.e2_ids.size();
  return err;
}

void write_assignment_csv(const CleaningAssignment& assign, std::ostream& out) {
  csv::write_row(out, {"id", "y_observed", "c", "rank_statistic", "method"});
  char buf[64];
  for (const auto& l : assign.labels) {
    std::string stat;
    if (l.rank_statistic) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, *l.rank_statistic);
      stat.assign(buf, ptr);
    }
    csv::write_row(out, {std::to_string(l.id), l.y_observed ? "1" : "0", l.cleaned ? "1" : "0", stat,
                         to_string(assign.method)});
  }
}

}  // namespace noisyfpr
