#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "layoutkit/geometry.hpp"

namespace layoutkit {

struct MetricParams {
  double gamma_lc = 0.25;      // weight of the absolute location kernel
  double gamma_ac = 0.25;      // weight of the absolute area term
  double smoothing = 80.0;     // location kernel is exp(-d / (2 * smoothing))
  int max_exhaustive = 6;      // per-category multiplicity cutoff for
                               // enumeration; larger groups use Kuhn-Munkres
};

// Same-category pairing between ground-truth and predicted objects.
// pairs hold (gt index, pred index), sorted by gt index.
struct MatchResult {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> unmatched_gt;
  std::vector<int> unmatched_pred;
};

struct LqsReport {
  double lr = 0.0;
  double lp = 0.0;
  std::optional<double> alc;  // absent when nothing matched
  std::optional<double> rlc;
  double lc = 0.0;
  double aac = 0.0;
  double rac = 0.0;
  double ac = 0.0;
  double lqs = 0.0;  // always lr + lp + lc + ac
};

// Multiset label recall / precision. Empty-side conventions:
// both empty -> (1, 1); empty gt, nonempty pred -> (1, 0);
// nonempty gt, empty pred -> (0, 1).
std::pair<double, double> multiset_label_scores(const Layout& gt,
                                                const Layout& pred);

// Per category, pair min(count_gt, count_pred) objects minimizing the total
// center distance. Groups no larger than params.max_exhaustive are enumerated
// (ties resolved toward the lexicographically smallest pair list); larger
// groups go through the assignment solver.
MatchResult match_objects(const Layout& gt, const Layout& pred,
                          const MetricParams& params);

struct LocationConsistency {
  std::optional<double> alc;
  std::optional<double> rlc;
  double lc = 0.0;
};

LocationConsistency location_consistency(const Layout& gt, const Layout& pred,
                                         const MatchResult& match,
                                         const MetricParams& params);

struct AreaConsistency {
  double aac = 0.0;
  double rac = 0.0;
  double ac = 0.0;
};

// Normalizes absolute area error by the gt frame area.
AreaConsistency area_consistency(const Layout& gt, const Layout& pred,
                                 const MatchResult& match,
                                 const MetricParams& params);

LqsReport layout_quality_score(const Layout& gt, const Layout& pred,
                               const MetricParams& params);

// Per-sample means, fixed left-to-right reduction. alc/rlc average only the
// samples where they are present (and stay absent if no sample has them).
LqsReport aggregate_reports(std::span<const LqsReport> reports);

}  // namespace layoutkit
