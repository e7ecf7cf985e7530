#include "layoutkit/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "layoutkit/rng.hpp"
#include "wire.hpp"

namespace layoutkit {

Vocab build_vocab(const Dataset& ds) {
  std::vector<std::string> texts;
  for (const DatasetRecord& rec : ds.records) {
    for (const std::string& c : rec.captions) texts.push_back(c);
  }
  return Vocab::build(texts);
}

PreparedSamples prepare_samples(const Dataset& ds, const Vocab& vocab,
                                const GridSpec& grid, int max_objects) {
  PreparedSamples out;
  for (const DatasetRecord& rec : ds.records) {
    TokenizedCaptions toks = tokenize_captions(rec.captions, vocab);
    TrainSample s;
    s.caption = toks.ids;
    s.mask = build_multicaption_mask(static_cast<int>(toks.ids.size()),
                                     toks.captions);
    s.target = layout_to_sequence(rec.gt_layout, grid, max_objects);
    out.samples.push_back(std::move(s));
    out.ids.push_back(rec.id);
  }
  return out;
}

TrainOutcome fit_model(Model& model, const PreparedSamples& data,
                       const TrainOptions& opts) {
  if (data.samples.empty()) {
    raise(ErrorCode::InvalidArgument, "nothing to train on");
  }
  if (opts.epochs < 0 || opts.batch_size < 1) {
    raise(ErrorCode::InvalidArgument, "bad epoch or batch settings");
  }
  TrainOutcome out;
  Rng rng(opts.shuffle_seed);
  AdamState opt;
  opt.learning_rate = opts.learning_rate;

  std::vector<int> order(data.samples.size());
  std::iota(order.begin(), order.end(), 0);

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_params = model.params();

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0, cls = 0.0, reg = 0.0;
    std::size_t seen = 0;
    bool blew_up = false;
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(opts.batch_size)) {
      std::size_t stop = std::min(order.size(), at + static_cast<std::size_t>(opts.batch_size));
      std::vector<TrainSample> batch;
      batch.reserve(stop - at);
      for (std::size_t i = at; i < stop; ++i) {
        batch.push_back(data.samples[static_cast<std::size_t>(order[i])]);
      }
      LossBreakdown lb;
      try {
        lb = train_step(model, batch, opt);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Numeric) throw;
        blew_up = true;
        break;
      }
      total += lb.total * static_cast<double>(batch.size());
      cls += lb.classification * static_cast<double>(batch.size());
      reg += lb.regression * static_cast<double>(batch.size());
      seen += batch.size();
    }
    if (blew_up) {
      model.params() = best_params;
      out.diverged = true;
      break;
    }
    EpochLog log;
    log.epoch = epoch;
    log.loss.total = total / static_cast<double>(seen);
    log.loss.classification = cls / static_cast<double>(seen);
    log.loss.regression = reg / static_cast<double>(seen);
    out.curve.push_back(log);
    if (log.loss.total > best * opts.divergence_factor) {
      model.params() = best_params;
      out.diverged = true;
      break;
    }
    if (log.loss.total < best) {
      best = log.loss.total;
      best_params = model.params();
    }
  }
  return out;
}

void write_loss_csv(const std::string& path,
                    const std::vector<EpochLog>& curve) {
  std::string out = "epoch,total,classification,regression\n";
  char buf[128];
  for (const EpochLog& log : curve) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g\n", log.epoch,
                  log.loss.total, log.loss.classification,
                  log.loss.regression);
    out += buf;
  }
  wire::write_file(path, out);
}

std::vector<Prediction> generate_for_dataset(const Model& model,
                                             const Vocab& vocab,
                                             const Dataset& ds) {
  std::vector<Prediction> preds;
  preds.reserve(ds.records.size());
  for (const DatasetRecord& rec : ds.records) {
    TokenizedCaptions toks = tokenize_captions(rec.captions, vocab);
    AttentionMask mask = build_multicaption_mask(
        static_cast<int>(toks.ids.size()), toks.captions);
    Prediction p;
    p.id = rec.id;
    p.layout = model.generate(toks.ids, mask);
    preds.push_back(std::move(p));
  }
  return preds;
}

}  // namespace layoutkit
