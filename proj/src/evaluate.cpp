#include "layoutkit/evaluate.hpp"

#include <algorithm>
#include <map>
#include <span>
#include <thread>

#include "layoutkit/error.hpp"

namespace layoutkit {

EvalOutcome evaluate_predictions(const Dataset& gt,
                                 const std::vector<Prediction>& preds,
                                 const MetricParams& params, int jobs) {
  if (jobs < 1) raise(ErrorCode::InvalidArgument, "parallelism must be >= 1");

  std::map<long long, const Layout*> truth;
  for (const DatasetRecord& rec : gt.records) {
    truth[rec.id] = &rec.gt_layout;
  }

  std::map<long long, const Layout*> by_id;
  std::string missing;
  for (const Prediction& p : preds) {
    if (!by_id.emplace(p.id, &p.layout).second) {
      raise(ErrorCode::InvalidArgument,
            "duplicate prediction id " + std::to_string(p.id));
    }
    if (truth.find(p.id) == truth.end()) {
      if (!missing.empty()) missing += ", ";
      missing += std::to_string(p.id);
    }
  }
  if (!missing.empty()) {
    raise(ErrorCode::InvalidArgument,
          "predictions reference unknown ids: " + missing);
  }

  // evaluation order is ascending id, independent of file order
  std::vector<std::pair<long long, const Layout*>> tasks(by_id.begin(),
                                                         by_id.end());
  std::vector<LqsReport> slots(tasks.size());

  auto run_range = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < tasks.size(); i += stride) {
      slots[i] = layout_quality_score(*truth.at(tasks[i].first),
                                      *tasks[i].second, params);
    }
  };
  int fan = std::min<int>(jobs, static_cast<int>(tasks.size()));
  if (fan <= 1) {
    run_range(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(fan));
    for (int t = 0; t < fan; ++t) {
      pool.emplace_back(run_range, static_cast<std::size_t>(t),
                        static_cast<std::size_t>(fan));
    }
    for (std::thread& th : pool) th.join();
  }

  EvalOutcome out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    out.samples.push_back({tasks[i].first, slots[i]});
  }
  out.corpus = aggregate_reports(std::span<const LqsReport>(slots));
  return out;
}

}  // namespace layoutkit
