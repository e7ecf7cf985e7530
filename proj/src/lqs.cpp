#include "layoutkit/lqs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "layoutkit/assignment.hpp"
#include "layoutkit/error.hpp"

namespace layoutkit {

namespace {

double center_distance(const LayoutObject& a, const LayoutObject& b) {
  double dx = a.bbox.x - b.bbox.x;
  double dy = a.bbox.y - b.bbox.y;
  return std::sqrt(dx * dx + dy * dy);
}

// gt_idx/pred_idx are global object indices of one category group.
// Pairs the smaller side completely, minimizing the summed center distance.
std::vector<std::pair<int, int>> match_category(
    const Layout& gt, const Layout& pred, const std::vector<int>& gt_idx,
    const std::vector<int>& pred_idx, const MetricParams& params) {
  int n_gt = static_cast<int>(gt_idx.size());
  int n_pred = static_cast<int>(pred_idx.size());
  std::vector<double> dist(static_cast<size_t>(n_gt) * n_pred);
  for (int a = 0; a < n_gt; ++a)
    for (int b = 0; b < n_pred; ++b)
      dist[static_cast<size_t>(a) * n_pred + b] = center_distance(
          gt.objects[gt_idx[a]], pred.objects[pred_idx[b]]);

  std::vector<std::pair<int, int>> slots;  // (gt slot, pred slot)
  if (std::max(n_gt, n_pred) <= params.max_exhaustive) {
    // Enumerate injections of the smaller side into the larger. On exact cost
    // ties keep the lexicographically smallest (gt, pred) pair list.
    bool gt_small = n_gt <= n_pred;
    int k = std::min(n_gt, n_pred);
    int pool = std::max(n_gt, n_pred);
    std::vector<int> chosen(k, -1);
    std::vector<char> used(pool, 0);
    std::vector<std::pair<int, int>> best_pairs;
    double best_cost = std::numeric_limits<double>::infinity();

    auto walk = [&](auto&& self, int slot, double cost) -> void {
      if (slot == k) {
        std::vector<std::pair<int, int>> cand(k);
        for (int s = 0; s < k; ++s)
          cand[s] = gt_small ? std::make_pair(s, chosen[s])
                             : std::make_pair(chosen[s], s);
        std::sort(cand.begin(), cand.end());
        if (cost < best_cost ||
            (cost == best_cost && cand < best_pairs)) {
          best_cost = cost;
          best_pairs = std::move(cand);
        }
        return;
      }
      for (int pick = 0; pick < pool; ++pick) {
        if (used[pick]) continue;
        used[pick] = 1;
        chosen[slot] = pick;
        double step = gt_small
                          ? dist[static_cast<size_t>(slot) * n_pred + pick]
                          : dist[static_cast<size_t>(pick) * n_pred + slot];
        self(self, slot + 1, cost + step);
        used[pick] = 0;
      }
    };
    walk(walk, 0, 0.0);
    slots = std::move(best_pairs);
  } else {
    slots = min_cost_assignment(n_gt, n_pred, dist);
  }

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(slots.size());
  for (auto [a, b] : slots) pairs.emplace_back(gt_idx[a], pred_idx[b]);
  return pairs;
}

double location_kernel(double distance, const MetricParams& params) {
  return std::exp(-distance / (2.0 * params.smoothing));
}

}  // namespace

std::pair<double, double> multiset_label_scores(const Layout& gt,
                                                const Layout& pred) {
  std::map<int, int> gt_count, pred_count;
  for (const LayoutObject& obj : gt.objects) ++gt_count[obj.category];
  for (const LayoutObject& obj : pred.objects) ++pred_count[obj.category];

  int shared = 0;
  for (auto [cat, n] : gt_count) {
    auto it = pred_count.find(cat);
    if (it != pred_count.end()) shared += std::min(n, it->second);
  }
  double total_gt = static_cast<double>(gt.objects.size());
  double total_pred = static_cast<double>(pred.objects.size());
  double lr = total_gt > 0 ? shared / total_gt : 1.0;
  double lp = total_pred > 0 ? shared / total_pred : 1.0;
  return {lr, lp};
}

MatchResult match_objects(const Layout& gt, const Layout& pred,
                          const MetricParams& params) {
  std::map<int, std::pair<std::vector<int>, std::vector<int>>> groups;
  for (size_t i = 0; i < gt.objects.size(); ++i)
    groups[gt.objects[i].category].first.push_back(static_cast<int>(i));
  for (size_t i = 0; i < pred.objects.size(); ++i)
    groups[pred.objects[i].category].second.push_back(static_cast<int>(i));

  MatchResult result;
  for (auto& [cat, group] : groups) {
    auto& [gt_idx, pred_idx] = group;
    if (gt_idx.empty() || pred_idx.empty()) {
      result.unmatched_gt.insert(result.unmatched_gt.end(), gt_idx.begin(),
                                 gt_idx.end());
      result.unmatched_pred.insert(result.unmatched_pred.end(),
                                   pred_idx.begin(), pred_idx.end());
      continue;
    }
    std::vector<std::pair<int, int>> pairs =
        match_category(gt, pred, gt_idx, pred_idx, params);
    std::vector<char> gt_used(gt_idx.size(), 0), pred_used(pred_idx.size(), 0);
    for (auto [g, p] : pairs) result.pairs.emplace_back(g, p);
    for (auto [g, p] : pairs) {
      for (size_t s = 0; s < gt_idx.size(); ++s)
        if (gt_idx[s] == g) gt_used[s] = 1;
      for (size_t s = 0; s < pred_idx.size(); ++s)
        if (pred_idx[s] == p) pred_used[s] = 1;
    }
    for (size_t s = 0; s < gt_idx.size(); ++s)
      if (!gt_used[s]) result.unmatched_gt.push_back(gt_idx[s]);
    for (size_t s = 0; s < pred_idx.size(); ++s)
      if (!pred_used[s]) result.unmatched_pred.push_back(pred_idx[s]);
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  std::sort(result.unmatched_gt.begin(), result.unmatched_gt.end());
  std::sort(result.unmatched_pred.begin(), result.unmatched_pred.end());
  return result;
}

LocationConsistency location_consistency(const Layout& gt, const Layout& pred,
                                         const MatchResult& match,
                                         const MetricParams& params) {
  LocationConsistency out;
  size_t n = match.pairs.size();
  if (n == 0) return out;  // lc = 0, both distances absent

  double sum_abs = 0.0;
  for (auto [g, p] : match.pairs)
    sum_abs += center_distance(gt.objects[g], pred.objects[p]);
  double alc = sum_abs / static_cast<double>(n);

  double rlc = 0.0;
  if (n > 1) {
    double sum_rel = 0.0;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        auto [gi, pi] = match.pairs[i];
        auto [gj, pj] = match.pairs[j];
        double rx = (gt.objects[gi].bbox.x - gt.objects[gj].bbox.x) -
                    (pred.objects[pi].bbox.x - pred.objects[pj].bbox.x);
        double ry = (gt.objects[gi].bbox.y - gt.objects[gj].bbox.y) -
                    (pred.objects[pi].bbox.y - pred.objects[pj].bbox.y);
        sum_rel += std::sqrt(rx * rx + ry * ry);
      }
    }
    rlc = sum_rel / (static_cast<double>(n) * (n - 1));
  }

  out.alc = alc;
  out.rlc = rlc;
  out.lc = params.gamma_lc * location_kernel(alc, params) +
           (1.0 - params.gamma_lc) * location_kernel(rlc, params);
  return out;
}

AreaConsistency area_consistency(const Layout& gt, const Layout& pred,
                                 const MatchResult& match,
                                 const MetricParams& params) {
  AreaConsistency out;
  size_t n = match.pairs.size();
  if (n == 0) return out;

  double frame_area = gt.frame.area();
  double abs_err = 0.0;
  for (auto [g, p] : match.pairs)
    abs_err += std::abs(bbox_area(pred.objects[p].bbox) -
                        bbox_area(gt.objects[g].bbox)) /
               frame_area;
  out.aac = 1.0 - abs_err / static_cast<double>(n);

  if (n == 1) {
    out.rac = 1.0;
  } else {
    double agree = 0.0;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        auto [gi, pi] = match.pairs[i];
        auto [gj, pj] = match.pairs[j];
        int gt_order = bbox_area(gt.objects[gi].bbox) >
                               bbox_area(gt.objects[gj].bbox)
                           ? 1
                           : 0;
        int pred_order = bbox_area(pred.objects[pi].bbox) >
                                 bbox_area(pred.objects[pj].bbox)
                             ? 1
                             : 0;
        agree += (gt_order == pred_order) ? 1.0 : 0.0;
      }
    }
    out.rac = agree / (static_cast<double>(n) * (n - 1));
  }
  out.ac = params.gamma_ac * out.aac + (1.0 - params.gamma_ac) * out.rac;
  return out;
}

LqsReport layout_quality_score(const Layout& gt, const Layout& pred,
                               const MetricParams& params) {
  if (gt.frame.width != pred.frame.width ||
      gt.frame.height != pred.frame.height)
    raise(ErrorCode::InvalidArgument,
          "layouts must share one frame before scoring");

  LqsReport report;
  auto [lr, lp] = multiset_label_scores(gt, pred);
  report.lr = lr;
  report.lp = lp;

  MatchResult match = match_objects(gt, pred, params);
  LocationConsistency loc = location_consistency(gt, pred, match, params);
  report.alc = loc.alc;
  report.rlc = loc.rlc;
  report.lc = loc.lc;

  AreaConsistency area = area_consistency(gt, pred, match, params);
  report.aac = area.aac;
  report.rac = area.rac;
  report.ac = area.ac;

  report.lqs = report.lr + report.lp + report.lc + report.ac;
  return report;
}

LqsReport aggregate_reports(std::span<const LqsReport> reports) {
  if (reports.empty())
    raise(ErrorCode::InvalidArgument, "cannot aggregate zero reports");

  LqsReport out;
  double alc_sum = 0.0, rlc_sum = 0.0;
  size_t alc_n = 0, rlc_n = 0;
  for (const LqsReport& r : reports) {
    out.lr += r.lr;
    out.lp += r.lp;
    out.lc += r.lc;
    out.aac += r.aac;
    out.rac += r.rac;
    out.ac += r.ac;
    if (r.alc) {
      alc_sum += *r.alc;
      ++alc_n;
    }
    if (r.rlc) {
      rlc_sum += *r.rlc;
      ++rlc_n;
    }
  }
  double n = static_cast<double>(reports.size());
  out.lr /= n;
  out.lp /= n;
  out.lc /= n;
  out.aac /= n;
  out.rac /= n;
  out.ac /= n;
  if (alc_n > 0) out.alc = alc_sum / static_cast<double>(alc_n);
  if (rlc_n > 0) out.rlc = rlc_sum / static_cast<double>(rlc_n);
  out.lqs = out.lr + out.lp + out.lc + out.ac;
  return out;
}

}  // namespace layoutkit
