#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "noisyfpr/rng.hpp"
#include "noisyfpr/tabular.hpp"

namespace noisyfpr::theory {

inline constexpr double kIdentityTolerance = 1e-12;

/// Score and labels of one example; all probabilities below are count ratios.
struct WorldPoint {
  double score = 0.0;
  Label y_true = 0;
  Label y_observed = 0;
  bool operator==(const WorldPoint&) const = default;
};

/// Finite empirical distribution over (f(x), y, y*, c).
/// Invariants: y* = 1 => y = 1 and y* = 1 => c = 1.
class EmpiricalWorld {
 public:
  EmpiricalWorld(std::vector<WorldPoint> points, std::vector<Label> cleaned);

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<WorldPoint>& points() const noexcept { return points_; }
  const std::vector<Label>& cleaned() const noexcept { return cleaned_; }

  std::size_t count_true_positive() const;
  std::size_t count_cleaned_positive() const;
  std::size_t count_e1() const;  // y = 0, c = 1
  std::size_t count_e2() const;  // y = 1, c = 0
  bool calibrated() const { return count_cleaned_positive() == count_true_positive(); }

  /// Distinct scores, ascending.
  std::vector<double> distinct_scores() const;

  nlohmann::json to_json() const;
  static EmpiricalWorld from_json(const nlohmann::json& j);

 private:
  std::vector<WorldPoint> points_;
  std::vector<Label> cleaned_;
};

struct IdentityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  bool pass = false;
  /// An empty conditioning set was replaced by the zero convention.
  bool degenerate = false;
};

/// #(c=1) - #(y=1) versus #e1 - #e2; passes when both vanish together
/// (calibrated iff equal error counts) and the two differences agree.
IdentityReport check_lemma_calibration(const EmpiricalWorld& w);

/// lhs = p(f>t | y=0) - p(f>t | c=0); rhs = p(c=1)[p(f>t | e1) - p(f>t | e2)].
/// Conditionals on an empty error set count as 0. Throws std::invalid_argument
/// on an uncalibrated world or when p(c=0) or p(y=0) is zero.
IdentityReport check_proposition_fpr(const EmpiricalWorld& w, double t);

/// lhs = p(f>t | y=1) - p(f>t | c=1); rhs = -p(c=0)[p(f>t | e1) - p(f>t | e2)].
IdentityReport check_proposition_tpr(const EmpiricalWorld& w, double t);

// The two checks above use the marginal p(c=1) / p(c=0) as the coefficient.
// Expanding p(f>t | y=0) over c weights by p(c | y=0), not p(c), so those forms
// only hold when p(e) = p(c=1) p(y=0). The exact identities are:
//   FPR gap =  (p(e) / p(y=0)) [p(f>t | e1) - p(f>t | e2)]
//   TPR gap = -(p(e) / p(y=1)) [p(f>t | e1) - p(f>t | e2)]
// with p(e) = p(e1) = p(e2). Same preconditions as the stated forms.
IdentityReport check_proposition_fpr_exact(const EmpiricalWorld& w, double t);
IdentityReport check_proposition_tpr_exact(const EmpiricalWorld& w, double t);

/// FPR gap = (p(c=1) / p(e)) (R1 - R2), R_i = p(f>t, e_i) - p(f>t) p(e_i).
/// When p(e) = 0 both sides are 0 and the report is a degenerate pass.
IdentityReport check_corollary_covariance(const EmpiricalWorld& w, double t);
/// TPR gap = -(p(c=0) / p(e)) (R1 - R2).
IdentityReport check_corollary_covariance_tpr(const EmpiricalWorld& w, double t);

/// Exact covariance forms: FPR gap = (R1 - R2) / p(y=0), TPR gap = -(R1 - R2) / p(y=1).
IdentityReport check_corollary_covariance_exact(const EmpiricalWorld& w, double t);
IdentityReport check_corollary_covariance_tpr_exact(const EmpiricalWorld& w, double t);

/// (TPR gap) / (FPR gap) versus -#(c=0) / #(c=1). Degenerate pass when the FPR gap is 0.
IdentityReport check_odds_ratio(const EmpiricalWorld& w, double t);

/// Signed FPR estimation error p(f>t | y=0) - p(f>t | c=0).
double delta_fpr(const EmpiricalWorld& w, double t);

/// Calibrated direct cleaning: c = 1 for y* = 1 plus the #(y=1) - #(y*=1)
/// highest-scoring observed negatives (ties: lower index first).
std::vector<Label> calibrated_direct_cleaning(std::span<const WorldPoint> points);

struct ExtremalityReport {
  std::size_t admissible = 0;           // assignments meeting every constraint
  double direct_delta = 0.0;            // delta FPR of the calibrated direct assignment
  double max_delta = 0.0;               // maximum over the enumeration
  std::vector<std::size_t> argmax;      // flipped indices of the lexicographically smallest maximizer
  bool direct_attains_max = false;
  bool direct_nonnegative = false;
  bool pass = false;
};

inline constexpr std::size_t kMaxEnumerationSize = 20;

/// Enumerates every cleaning with c = 1 on y* = 1, #(c=1) = #(y=1) and #e1 = e,
/// and compares their delta FPR at t with the calibrated direct assignment.
/// Throws std::invalid_argument for n > 20, for a world whose direct assignment
/// has error count != e, or when no admissible assignment exists.
ExtremalityReport brute_force_extremality(std::span<const WorldPoint> points, std::size_t e, double t);

/// Serial reference for the enumeration; identical output.
ExtremalityReport brute_force_extremality_serial(std::span<const WorldPoint> points, std::size_t e, double t);

// Seeded generators for property suites.

/// Random world of size n with a uniformly chosen calibrated cleaning.
/// Guarantees at least one true negative and one true positive.
EmpiricalWorld random_calibrated_world(Rng& rng, std::size_t n);

/// Random cleaning with no calibration constraint (c = 1 still forced on y* = 1).
EmpiricalWorld random_cleaning_world(Rng& rng, std::size_t n);

/// Random labeled points of size in [4, n_max] whose calibrated direct
/// assignment has exactly `e` type-1 errors. Scores are quantized to force ties.
std::vector<WorldPoint> random_extremality_instance(Rng& rng, std::size_t n_max, std::size_t e);

}  // namespace noisyfpr::theory
