#pragma once

// corpus scoring of prediction files against ground truth
#include <vector>

#include "layoutkit/dataset.hpp"
#include "layoutkit/lqs.hpp"

namespace layoutkit {

struct SampleScore {
  long long id = 0;
  LqsReport report;
};

struct EvalOutcome {
  std::vector<SampleScore> samples;  // ascending id
  LqsReport corpus;
};

// Every prediction id must exist in the ground truth; ground-truth records
// without predictions are left out of the report. jobs > 1 fans samples out
// across threads into pre-sized slots and reduces them in a fixed order, so
// the outcome never depends on scheduling.
EvalOutcome evaluate_predictions(const Dataset& gt,
                                 const std::vector<Prediction>& preds,
                                 const MetricParams& params, int jobs = 1);

}  // namespace layoutkit
