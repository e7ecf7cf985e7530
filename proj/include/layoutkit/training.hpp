#pragma once

// end-to-end drivers: corpus vocabulary, sample preparation, the epoch loop
// with divergence rollback, and greedy generation over a dataset
#include <cstdint>
#include <string>
#include <vector>

#include "layoutkit/dataset.hpp"
#include "layoutkit/model.hpp"

namespace layoutkit {

struct TrainOptions {
  ModelConfig model;  // vocab_size and grid categories are filled on prepare
  int epochs = 15;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double divergence_factor = 10.0;  // abort when loss blows past best * this
  std::uint64_t shuffle_seed = 1;
};

Vocab build_vocab(const Dataset& ds);

struct PreparedSamples {
  std::vector<TrainSample> samples;
  std::vector<long long> ids;  // parallel to samples
};

PreparedSamples prepare_samples(const Dataset& ds, const Vocab& vocab,
                                const GridSpec& grid, int max_objects);

struct EpochLog {
  int epoch = 0;
  LossBreakdown loss;
};

struct TrainOutcome {
  std::vector<EpochLog> curve;
  bool diverged = false;
};

// single-threaded minibatch epochs with a seeded shuffle; on divergence the
// model rolls back to its best epoch and the flag is set
TrainOutcome fit_model(Model& model, const PreparedSamples& data,
                       const TrainOptions& opts);

void write_loss_csv(const std::string& path,
                    const std::vector<EpochLog>& curve);

std::vector<Prediction> generate_for_dataset(const Model& model,
                                             const Vocab& vocab,
                                             const Dataset& ds);

}  // namespace layoutkit
