#include "noisyfpr/theory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "noisyfpr/error.hpp"

namespace noisyfpr::theory {

EmpiricalWorld::EmpiricalWorld(std::vector<WorldPoint> points, std::vector<Label> cleaned)
    : points_(std::move(points)), cleaned_(std::move(cleaned)) {
  if (cleaned_.size() != points_.size()) throw std::invalid_argument("world: cleaned labels misaligned");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (p.y_true > 1 || p.y_observed > 1 || cleaned_[i] > 1) throw std::invalid_argument("world: label outside {0,1}");
    if (p.y_observed == 1 && p.y_true == 0) throw std::invalid_argument("world: y* = 1 with y = 0");
    if (p.y_observed == 1 && cleaned_[i] == 0) throw std::invalid_argument("world: c = 0 on an observed positive");
  }
}

std::size_t EmpiricalWorld::count_true_positive() const {
  return static_cast<std::size_t>(
      std::count_if(points_.begin(), points_.end(), [](const WorldPoint& p) { return p.y_true == 1; }));
}

std::size_t EmpiricalWorld::count_cleaned_positive() const {
  return static_cast<std::size_t>(std::count(cleaned_.begin(), cleaned_.end(), Label{1}));
}

std::size_t EmpiricalWorld::count_e1() const {
  std::size_t k = 0;
  for (std::size_t i = 0; i < size(); ++i) k += points_[i].y_true == 0 && cleaned_[i] == 1;
  return k;
}

std::size_t EmpiricalWorld::count_e2() const {
  std::size_t k = 0;
  for (std::size_t i = 0; i < size(); ++i) k += points_[i].y_true == 1 && cleaned_[i] == 0;
  return k;
}

std::vector<double> EmpiricalWorld::distinct_scores() const {
  std::vector<double> s;
  s.reserve(size());
  for (const auto& p : points_) s.push_back(p.score);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

nlohmann::json EmpiricalWorld::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points_) pts.push_back({p.score, p.y_true, p.y_observed});
  return {{"points", pts}, {"cleaned", cleaned_}};
}

EmpiricalWorld EmpiricalWorld::from_json(const nlohmann::json& j) {
  std::vector<WorldPoint> pts;
  for (const auto& p : j.at("points")) {
    pts.push_back({p.at(0).get<double>(), p.at(1).get<Label>(), p.at(2).get<Label>()});
  }
  return EmpiricalWorld(std::move(pts), j.at("cleaned").get<std::vector<Label>>());
}

namespace {

/// Integer tallies of a world at one threshold.
struct Tally {
  double n = 0;
  double y0 = 0, y1 = 0, c0 = 0, c1 = 0;
  double y0_above = 0, y1_above = 0, c0_above = 0, c1_above = 0;
  double e1 = 0, e2 = 0, e1_above = 0, e2_above = 0;
  double above = 0;
};

Tally tally(const EmpiricalWorld& w, double t) {
  Tally k;
  k.n = static_cast<double>(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto& p = w.points()[i];
    const Label c = w.cleaned()[i];
    const bool hi = p.score > t;
    k.above += hi;
    (p.y_true ? k.y1 : k.y0) += 1;
    (p.y_true ? k.y1_above : k.y0_above) += hi;
    (c ? k.c1 : k.c0) += 1;
    (c ? k.c1_above : k.c0_above) += hi;
    if (p.y_true == 0 && c == 1) {
      k.e1 += 1;
      k.e1_above += hi;
    }
    if (p.y_true == 1 && c == 0) {
      k.e2 += 1;
      k.e2_above += hi;
    }
  }
  return k;
}

IdentityReport make_report(double lhs, double rhs, bool degenerate) {
  IdentityReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.gap = std::fabs(lhs - rhs);
  r.pass = r.gap <= kIdentityTolerance;
  r.degenerate = degenerate;
  return r;
}

void require_calibrated(const Tally& k) {
  if (k.c1 != k.y1) throw std::invalid_argument("identity requires a calibrated cleaning (#(c=1) = #(y=1))");
}

void require_fpr_defined(const Tally& k) {
  require_calibrated(k);
  if (k.c0 == 0 || k.y0 == 0) throw std::invalid_argument("FPR identity requires p(c=0) > 0 and p(y=0) > 0");
}

void require_tpr_defined(const Tally& k) {
  require_calibrated(k);
  if (k.c1 == 0 || k.y1 == 0) throw std::invalid_argument("TPR identity requires p(c=1) > 0 and p(y=1) > 0");
}

/// p(f>t | e1) - p(f>t | e2), empty conditionals contributing 0.
double error_bracket(const Tally& k) {
  const double a = k.e1 > 0 ? k.e1_above / k.e1 : 0.0;
  const double b = k.e2 > 0 ? k.e2_above / k.e2 : 0.0;
  return a - b;
}

double fpr_gap(const Tally& k) { return k.y0_above / k.y0 - k.c0_above / k.c0; }
double tpr_gap(const Tally& k) { return k.y1_above / k.y1 - k.c1_above / k.c1; }

/// R1 - R2 with R_i = p(f>t, e_i) - p(f>t) p(e_i).
double covariance_difference(const Tally& k) {
  const double pf = k.above / k.n;
  const double r1 = k.e1_above / k.n - pf * (k.e1 / k.n);
  const double r2 = k.e2_above / k.n - pf * (k.e2 / k.n);
  return r1 - r2;
}

}  // namespace

IdentityReport check_lemma_calibration(const EmpiricalWorld& w) {
  const double cal = static_cast<double>(w.count_cleaned_positive()) - static_cast<double>(w.count_true_positive());
  const double err = static_cast<double>(w.count_e1()) - static_cast<double>(w.count_e2());
  IdentityReport r = make_report(cal, err, false);
  r.pass = r.pass && ((cal == 0.0) == (err == 0.0));
  return r;
}

IdentityReport check_proposition_fpr(const EmpiricalWorld& w, double t) {
  const Tally k = tally(w, t);
  require_fpr_defined(k);
  return make_report(fpr_gap(k), (k.c1 / k.n) * error_bracket(k), k.e1 == 0 || k.e2 == 0);
}

IdentityReport check_proposition_tpr(const EmpiricalWorld& w, double t) {
  const Tally k = tally(w, t);
  require_tpr_defined(k);
  return make_report(tpr_gap(k), -(k.c0 / k.n) * error_bracket(k), k.e1 == 0 || k.e2 == 0);
}

IdentityReport check_proposition_fpr_exact(const EmpiricalWorld& w, double t) {
  const Tally k = tally(w, t);
  require_fpr_defined(k);
  return make_report(fpr_gap(k), (k.e1 / k.y0) * error_bracket(k), k.e1 == 0 || k.e2 == 0);
}

IdentityReport check_proposition_tpr_exact(const EmpiricalWorld& w, double t) {
  const Tally k = tally(w, t);
  require_tpr_defined(k);
  return make_report(tpr_gap(k), -(k.e2 / k.y1) * error_bracket(k), k.e1 == 0 || k.e2 == 0);
}

IdentityReport check_corollary_covariance(const EmpiricalWorld& w, double t) {
  const Tally k = tally(w, t);
  require_fpr_defined(k);
  if (k.e1 == 0) return make_report(fpr_gap(k), 0.0, true);
  return make_report(fpr_gap(k), (k.c1 / k.n) / (k.e1 / k.n) * covariance_difference(k), false);
}

IdentityReport check_corollary_covariance_tpr(const EmpiricalWorld& w, double t) {
  const Tally k = tally(w, t);
  require_tpr_defined(k);
  if (k.e1 == 0) return make_report(tpr_gap(k), 0.0, true);
  return make_report(tpr_gap(k), -(k.c0 / k.n) / (k.e1 / k.n) * covariance_difference(k), false);
}

IdentityReport check_corollary_covariance_exact(const EmpiricalWorld& w, double t) {
  const Tally k = tally(w, t);
  require_fpr_defined(k);
  return make_report(fpr_gap(k), covariance_difference(k) / (k.y0 / k.n), k.e1 == 0);
}

IdentityReport check_corollary_covariance_tpr_exact(const EmpiricalWorld& w, double t) {
  const Tally k = tally(w, t);
  require_tpr_defined(k);
  return make_report(tpr_gap(k), -covariance_difference(k) / (k.y1 / k.n), k.e1 == 0);
}

IdentityReport check_odds_ratio(const EmpiricalWorld& w, double t) {
  const Tally k = tally(w, t);
  require_fpr_defined(k);
  require_tpr_defined(k);
  const double expected = -k.c0 / k.c1;
  const double fg = fpr_gap(k);
  if (fg == 0.0) return make_report(expected, expected, true);
  return make_report(tpr_gap(k) / fg, expected, false);
}

double delta_fpr(const EmpiricalWorld& w, double t) {
  const Tally k = tally(w, t);
  if (k.c0 == 0 || k.y0 == 0) throw std::invalid_argument("delta FPR needs p(c=0) > 0 and p(y=0) > 0");
  return fpr_gap(k);
}

std::vector<Label> calibrated_direct_cleaning(std::span<const WorldPoint> points) {
  std::vector<Label> c(points.size(), 0);
  std::vector<std::size_t> negatives;
  std::size_t true_pos = 0, obs_pos = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    true_pos += points[i].y_true;
    obs_pos += points[i].y_observed;
    if (points[i].y_observed == 1) {
      c[i] = 1;
    } else {
      negatives.push_back(i);
    }
  }
  std::stable_sort(negatives.begin(), negatives.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].score > points[b].score; });
  const std::size_t budget = true_pos - obs_pos;
  for (std::size_t r = 0; r < budget; ++r) c[negatives[r]] = 1;
  return c;
}

// ---------------------------------------------------------------------------
// Exhaustive extremality oracle

namespace {

struct Enumeration {
  std::vector<std::size_t> negatives;  // indices with y* = 0; bit b of a mask flips negatives[b]
  std::size_t budget = 0;
  std::size_t e = 0;
  std::uint64_t y0_mask = 0;     // negatives with y = 0
  std::uint64_t above_mask = 0;  // negatives with f > t
  std::int64_t base = 0;         // #(y=0, f>t) - #(y*=0, f>t); add #(flipped, f>t)
  double y0 = 0;
};

struct Best {
  std::int64_t value = std::numeric_limits<std::int64_t>::min();
  std::uint64_t mask = 0;
  std::size_t admissible = 0;
};

/// Equal-size sets: S precedes T when the lowest element of S xor T is in S.
bool lex_less(std::uint64_t s, std::uint64_t t) {
  const std::uint64_t diff = s ^ t;
  return diff != 0 && (s & (diff & (~diff + 1))) != 0;
}

void absorb(Best& into, std::int64_t value, std::uint64_t mask) {
  if (value > into.value || (value == into.value && lex_less(mask, into.mask))) {
    into.value = value;
    into.mask = mask;
  }
}

void merge(Best& into, const Best& other) {
  into.admissible += other.admissible;
  if (other.admissible > 0) absorb(into, other.value, other.mask);
}

Enumeration prepare(std::span<const WorldPoint> points, std::size_t e, double t) {
  if (points.size() > kMaxEnumerationSize) {
    throw std::invalid_argument("extremality enumeration is limited to n <= " + std::to_string(kMaxEnumerationSize));
  }
  Enumeration en;
  en.e = e;
  std::size_t true_pos = 0, obs_pos = 0;
  std::int64_t y0_above = 0, neg_above = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (p.y_observed == 1 && p.y_true == 0) throw std::invalid_argument("world: y* = 1 with y = 0");
    true_pos += p.y_true;
    obs_pos += p.y_observed;
    en.y0 += p.y_true == 0;
    y0_above += p.y_true == 0 && p.score > t;
    if (p.y_observed == 0) {
      const std::uint64_t bit = std::uint64_t{1} << en.negatives.size();
      if (p.y_true == 0) en.y0_mask |= bit;
      if (p.score > t) {
        en.above_mask |= bit;
        ++neg_above;
      }
      en.negatives.push_back(i);
    }
  }
  if (en.y0 == 0) throw std::invalid_argument("extremality needs at least one true negative");
  en.budget = true_pos - obs_pos;
  en.base = y0_above - neg_above;
  return en;
}

inline void visit(const Enumeration& en, std::uint64_t mask, Best& best) {
  if (static_cast<std::size_t>(std::popcount(mask)) != en.budget) return;
  if (static_cast<std::size_t>(std::popcount(mask & en.y0_mask)) != en.e) return;
  ++best.admissible;
  absorb(best, en.base + std::popcount(mask & en.above_mask), mask);
}

ExtremalityReport finish(const Enumeration& en, const Best& best, std::span<const WorldPoint> points, double t) {
  if (best.admissible == 0) {
    throw std::invalid_argument("no admissible cleaning: need " + std::to_string(en.budget) +
                                " flips among observed negatives with exactly " + std::to_string(en.e) +
                                " type-1 errors");
  }
  const auto direct = calibrated_direct_cleaning(points);
  std::uint64_t direct_mask = 0;
  for (std::size_t b = 0; b < en.negatives.size(); ++b) {
    if (direct[en.negatives[b]]) direct_mask |= std::uint64_t{1} << b;
  }
  const auto direct_e = static_cast<std::size_t>(std::popcount(direct_mask & en.y0_mask));
  if (direct_e != en.e) {
    throw std::invalid_argument("calibrated direct assignment has " + std::to_string(direct_e) +
                                " type-1 errors, requested e = " + std::to_string(en.e));
  }
  const std::int64_t direct_value = en.base + std::popcount(direct_mask & en.above_mask);

  ExtremalityReport r;
  r.admissible = best.admissible;
  r.direct_delta = static_cast<double>(direct_value) / en.y0;
  r.max_delta = static_cast<double>(best.value) / en.y0;
  for (std::size_t b = 0; b < en.negatives.size(); ++b) {
    if (best.mask >> b & 1) r.argmax.push_back(en.negatives[b]);
  }
  r.direct_attains_max = direct_value == best.value;
  r.direct_nonnegative = direct_value >= 0;
  r.pass = r.direct_attains_max && r.direct_nonnegative;
  (void)t;
  return r;
}

}  // namespace

ExtremalityReport brute_force_extremality_serial(std::span<const WorldPoint> points, std::size_t e, double t) {
  const Enumeration en = prepare(points, e, t);
  Best best;
  const std::uint64_t end = std::uint64_t{1} << en.negatives.size();
  for (std::uint64_t mask = 0; mask < end; ++mask) visit(en, mask, best);
  return finish(en, best, points, t);
}

ExtremalityReport brute_force_extremality(std::span<const WorldPoint> points, std::size_t e, double t) {
  const Enumeration en = prepare(points, e, t);
  Best best;
  const auto end = static_cast<std::int64_t>(std::uint64_t{1} << en.negatives.size());
#pragma omp parallel if (end >= 4096)
  {
    Best local;
#pragma omp for schedule(static) nowait
    for (std::int64_t mask = 0; mask < end; ++mask) visit(en, static_cast<std::uint64_t>(mask), local);
#pragma omp critical(noisyfpr_extremality_reduce)
    merge(best, local);
  }
  return finish(en, best, points, t);
}

// ---------------------------------------------------------------------------
// Generators

namespace {

std::vector<WorldPoint> random_points(Rng& rng, std::size_t n) {
  if (n < 2) throw std::invalid_argument("random world needs n >= 2");
  const double fraud = 0.1 + 0.4 * rng.uniform();
  const double noise = 0.6 * rng.uniform();
  const bool quantize = rng.bernoulli(0.5);
  std::vector<WorldPoint> pts(n);
  for (auto& p : pts) {
    p.y_true = rng.bernoulli(fraud) ? 1 : 0;
    p.y_observed = p.y_true == 1 && !rng.bernoulli(noise) ? 1 : 0;
    const double s = rng.uniform();
    p.score = quantize ? std::floor(s * 20.0) / 20.0 : s;
  }
  // At least one of each true class.
  pts[0].y_true = 1;
  pts[0].y_observed = rng.bernoulli(0.5) ? 1 : 0;
  pts[1].y_true = 0;
  pts[1].y_observed = 0;
  for (std::size_t i = n; i > 1; --i) std::swap(pts[i - 1], pts[static_cast<std::size_t>(rng.below(i))]);
  return pts;
}

}  // namespace

EmpiricalWorld random_calibrated_world(Rng& rng, std::size_t n) {
  auto pts = random_points(rng, n);
  std::vector<Label> c(n, 0);
  std::vector<std::size_t> negatives;
  std::size_t budget = 0;
  for (std::size_t i = 0; i < n; ++i) {
    budget += pts[i].y_true;
    if (pts[i].y_observed == 1) {
      c[i] = 1;
      --budget;
    } else {
      negatives.push_back(i);
    }
  }
  rng.shuffle(std::span<std::size_t>(negatives));
  for (std::size_t r = 0; r < budget; ++r) c[negatives[r]] = 1;
  return EmpiricalWorld(std::move(pts), std::move(c));
}

EmpiricalWorld random_cleaning_world(Rng& rng, std::size_t n) {
  auto pts = random_points(rng, n);
  const double flip = 0.5 * rng.uniform();
  std::vector<Label> c(n, 0);
  for (std::size_t i = 0; i < n; ++i) c[i] = pts[i].y_observed == 1 || rng.bernoulli(flip) ? 1 : 0;
  return EmpiricalWorld(std::move(pts), std::move(c));
}

std::vector<WorldPoint> random_extremality_instance(Rng& rng, std::size_t n_max, std::size_t e) {
  if (n_max < 4 || n_max > kMaxEnumerationSize) throw std::invalid_argument("n_max must lie in [4, 20]");
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const std::size_t n = 4 + static_cast<std::size_t>(rng.below(n_max - 3));
    std::vector<WorldPoint> pts(n);
    const double separation = rng.uniform();
    for (auto& p : pts) {
      p.y_true = rng.bernoulli(0.4) ? 1 : 0;
      p.y_observed = p.y_true == 1 && rng.bernoulli(0.5) ? 1 : 0;
      const double s = std::clamp(rng.uniform() + (p.y_true ? separation : -separation) * 0.5, 0.0, 1.0);
      p.score = std::round(s * 10.0) / 10.0;
    }
    std::size_t y0 = 0;
    for (const auto& p : pts) y0 += p.y_true == 0;
    if (y0 == 0) continue;
    const auto c = calibrated_direct_cleaning(pts);
    std::size_t e1 = 0;
    for (std::size_t i = 0; i < n; ++i) e1 += pts[i].y_true == 0 && c[i] == 1;
    if (e1 == e) return pts;
  }
  throw std::runtime_error("could not draw an extremality instance with e = " + std::to_string(e));
}

}  // namespace noisyfpr::theory
