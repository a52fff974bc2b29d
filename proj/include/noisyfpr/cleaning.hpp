#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "noisyfpr/learner.hpp"
#include "noisyfpr/tabular.hpp"

namespace noisyfpr {

enum class CleaningMethod { none, direct, cleanlab, micromodel };

const char* to_string(CleaningMethod m);
/// Throws ConfigError on an unknown name.
CleaningMethod cleaning_method_from_string(const std::string& name);

/// What a cleaning method is allowed to see: the base-model score and the
/// observed label. True labels never cross this boundary.
struct ObservedScore {
  ExampleId id = 0;
  double score = 0.0;
  Label y_observed = 0;
};

std::vector<ObservedScore> observed_view(std::span<const ScoredExample> scored);
std::vector<ObservedScore> observed_view(const Dataset& ds);

struct CleanedLabel {
  ExampleId id = 0;
  Label y_observed = 0;
  Label cleaned = 0;
  std::optional<double> rank_statistic;
  bool operator==(const CleanedLabel&) const = default;
};

/// Per-example cleaned labels; entries keep the order of the input they were built from.
struct CleaningAssignment {
  CleaningMethod method = CleaningMethod::none;
  std::vector<CleanedLabel> labels;
  double target_fraud_rate = 0.0;    // p(y=1) the method aimed for (p(y*=1) when none)
  double achieved_fraud_rate = 0.0;  // p(c=1)
  std::size_t n_flipped = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t count_cleaned_positive() const;

  bool operator==(const CleaningAssignment&) const = default;
};

/// Member votes (score > vote threshold) for every validation example.
class VoteMatrix {
 public:
  VoteMatrix(std::vector<ExampleId> ids, std::vector<Label> y_observed, std::size_t members,
             std::vector<std::uint8_t> votes);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t members() const noexcept { return members_; }
  ExampleId id(std::size_t i) const { return ids_[i]; }
  Label y_observed(std::size_t i) const { return y_observed_[i]; }
  std::uint8_t vote(std::size_t i, std::size_t member) const { return votes_[i * members_ + member]; }
  /// (#votes = 1) / k.
  double fraction(std::size_t i) const;

 private:
  std::vector<ExampleId> ids_;
  std::vector<Label> y_observed_;
  std::size_t members_;
  std::vector<std::uint8_t> votes_;  // row-major, size() x members()
};

/// Scores `ds` with every member (concurrently; member order fixed).
VoteMatrix build_vote_matrix(std::span<const Model> members, const Dataset& ds, double vote_threshold = 0.5);

CleaningAssignment clean_none(std::span<const ObservedScore> observed);
CleaningAssignment clean_none(const Dataset& ds);

/// round_half_up(p_y1 * n) - #(y* = 1): observed negatives to flip for calibration.
/// Throws std::invalid_argument when the target count is below #(y* = 1).
std::size_t calibrated_flip_budget(std::size_t n, std::size_t n_observed_positive, double p_y1);
std::size_t calibrated_flip_budget(const Dataset& ds, double p_y1);

/// Flips the m highest-scoring observed negatives (ties: ascending id).
CleaningAssignment clean_direct_calibrated(std::span<const ObservedScore> scored, std::size_t m);

/// Flips observed negatives scoring above the mean observed-positive score, in
/// descending score order, until m_cap flips or no candidates remain.
CleaningAssignment clean_cleanlab_style(std::span<const ObservedScore> scored, std::size_t m_cap);

/// Flips observed negatives with a nonzero vote fraction, highest fraction
/// first (ties: ascending id), until m flips or only zero-vote examples remain.
CleaningAssignment clean_micromodel(const VoteMatrix& votes, std::size_t m);

struct CleaningErrors {
  std::size_t e1_count = 0;  // y = 0, c = 1
  std::size_t e2_count = 0;  // y = 1, c = 0
  std::vector<ExampleId> e1_ids;
  std::vector<ExampleId> e2_ids;
};

/// Throws std::invalid_argument if the assignment does not cover exactly the dataset ids.
CleaningErrors cleaning_errors(const CleaningAssignment& assign, const Dataset& ds);

/// CSV columns: id,y_observed,c,rank_statistic,method.
void write_assignment_csv(const CleaningAssignment& assign, std::ostream& out);

}  // namespace noisyfpr
