#include "layoutkit/layoutkit.h"

#include <cstring>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "layoutkit/dataset.hpp"
#include "layoutkit/error.hpp"
#include "layoutkit/evaluate.hpp"
#include "layoutkit/lqs.hpp"
#include "layoutkit/model.hpp"
#include "layoutkit/render.hpp"
#include "layoutkit/training.hpp"

struct lk_layout {
  layoutkit::Layout value;
};

struct lk_dataset {
  layoutkit::Dataset value;
};

struct lk_predictions {
  std::vector<layoutkit::Prediction> value;
};

struct lk_model {
  layoutkit::Model model;
  layoutkit::Vocab vocab;
};

namespace {

thread_local std::string t_last_error;

lk_status fail(lk_status status, const std::string& message) {
  t_last_error = message;
  return status;
}

lk_status map_code(layoutkit::ErrorCode code) {
  using layoutkit::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return LK_ERR_INVALID_ARGUMENT;
    case ErrorCode::OutOfFrame: return LK_ERR_OUT_OF_FRAME;
    case ErrorCode::Bounds: return LK_ERR_BOUNDS;
    case ErrorCode::Capacity: return LK_ERR_CAPACITY;
    case ErrorCode::Parse: return LK_ERR_PARSE;
    case ErrorCode::Io: return LK_ERR_IO;
    case ErrorCode::Numeric: return LK_ERR_NUMERIC;
    case ErrorCode::Degenerate: return LK_ERR_DEGENERATE;
  }
  return LK_ERR_UNKNOWN;
}

template <typename Fn>
lk_status guarded(Fn&& fn) {
  try {
    fn();
  } catch (const layoutkit::Error& e) {
    return fail(map_code(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(LK_ERR_UNKNOWN, e.what());
  } catch (...) {
    return fail(LK_ERR_UNKNOWN, "unrecognized failure");
  }
  t_last_error.clear();
  return LK_OK;
}

lk_status require(bool ok, const char* message) {
  return ok ? LK_OK : fail(LK_ERR_INVALID_ARGUMENT, message);
}

layoutkit::MetricParams to_core(const lk_metric_params& p) {
  layoutkit::MetricParams out;
  out.gamma_lc = p.location_weight;
  out.gamma_ac = p.area_weight;
  out.smoothing = p.smoothing;
  out.max_exhaustive = p.max_exhaustive;
  return out;
}

lk_lqs_report to_c(const layoutkit::LqsReport& r) {
  lk_lqs_report out;
  out.lr = r.lr;
  out.lp = r.lp;
  out.has_location = r.alc.has_value() ? 1 : 0;
  out.alc = r.alc.value_or(0.0);
  out.rlc = r.rlc.value_or(0.0);
  out.lc = r.lc;
  out.aac = r.aac;
  out.rac = r.rac;
  out.ac = r.ac;
  out.lqs = r.lqs;
  return out;
}

layoutkit::ModelConfig to_core_config(const lk_model_config& c,
                                      const layoutkit::Dataset& ds) {
  layoutkit::ModelConfig cfg;
  cfg.width = c.width;
  cfg.encoder_layers = c.encoder_layers;
  cfg.decoder_layers = c.decoder_layers;
  cfg.heads = c.heads;
  cfg.ffn_width = c.ffn_width;
  cfg.reg_width = c.reg_width;
  cfg.grid.resolution = c.grid_resolution;
  cfg.grid.categories = static_cast<int>(ds.categories());
  cfg.max_objects = c.max_objects;
  cfg.loss_balance = c.loss_balance;
  cfg.seed = c.seed;
  return cfg;
}

}  // namespace

extern "C" {

const char* lk_version(void) { return "0.1.0"; }

const char* lk_status_name(lk_status status) {
  switch (status) {
    case LK_OK: return "ok";
    case LK_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case LK_ERR_OUT_OF_FRAME: return "out-of-frame";
    case LK_ERR_BOUNDS: return "bounds";
    case LK_ERR_CAPACITY: return "capacity";
    case LK_ERR_PARSE: return "parse";
    case LK_ERR_IO: return "io";
    case LK_ERR_NUMERIC: return "numeric";
    case LK_ERR_DEGENERATE: return "degenerate";
    case LK_ERR_UNKNOWN: break;
  }
  return "unknown";
}

const char* lk_last_error(void) { return t_last_error.c_str(); }

lk_status lk_layout_create(double frame_w, double frame_h,
                           const lk_object* objects, size_t count,
                           lk_layout** out) {
  if (lk_status s = require(out != nullptr, "out is null")) return s;
  if (lk_status s = require(objects != nullptr || count == 0,
                            "objects is null with nonzero count")) {
    return s;
  }
  *out = nullptr;
  return guarded([&] {
    layoutkit::Layout l;
    l.frame = {frame_w, frame_h};
    l.objects.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      l.objects.push_back({objects[i].category,
                           {objects[i].x, objects[i].y, objects[i].w,
                            objects[i].h}});
    }
    layoutkit::validate_layout(l);
    *out = new lk_layout{std::move(l)};
  });
}

lk_status lk_layout_objects(const lk_layout* layout, lk_object* objects,
                            size_t capacity, size_t* count) {
  if (lk_status s = require(layout != nullptr, "layout is null")) return s;
  if (lk_status s = require(count != nullptr, "count is null")) return s;
  *count = layout->value.objects.size();
  if (objects == nullptr) return LK_OK;
  if (capacity < *count) {
    return fail(LK_ERR_CAPACITY, "object buffer is too small");
  }
  for (size_t i = 0; i < *count; ++i) {
    const layoutkit::LayoutObject& o = layout->value.objects[i];
    objects[i] = {o.category, o.bbox.x, o.bbox.y, o.bbox.w, o.bbox.h};
  }
  return LK_OK;
}

lk_status lk_layout_frame(const lk_layout* layout, double* width,
                          double* height) {
  if (lk_status s = require(layout != nullptr, "layout is null")) return s;
  if (width) *width = layout->value.frame.width;
  if (height) *height = layout->value.frame.height;
  return LK_OK;
}

void lk_layout_free(lk_layout* layout) { delete layout; }

lk_status lk_dataset_open(const char* annotation_path,
                          const char* caption_path, lk_dataset** out) {
  if (lk_status s = require(annotation_path != nullptr,
                            "annotation_path is null")) {
    return s;
  }
  if (lk_status s = require(caption_path != nullptr, "caption_path is null")) {
    return s;
  }
  if (lk_status s = require(out != nullptr, "out is null")) return s;
  *out = nullptr;
  return guarded([&] {
    *out = new lk_dataset{
        layoutkit::ingest_annotations(annotation_path, caption_path)};
  });
}

lk_status lk_dataset_synth(uint64_t seed, int32_t size, lk_dataset** out) {
  if (lk_status s = require(out != nullptr, "out is null")) return s;
  *out = nullptr;
  return guarded(
      [&] { *out = new lk_dataset{layoutkit::synth_toy_dataset(seed, size)}; });
}

lk_status lk_dataset_write(const lk_dataset* dataset,
                           const char* annotation_path,
                           const char* caption_path) {
  if (lk_status s = require(dataset != nullptr, "dataset is null")) return s;
  if (lk_status s = require(annotation_path != nullptr,
                            "annotation_path is null")) {
    return s;
  }
  if (lk_status s = require(caption_path != nullptr, "caption_path is null")) {
    return s;
  }
  return guarded([&] {
    layoutkit::write_dataset(dataset->value, annotation_path, caption_path);
  });
}

lk_status lk_dataset_size(const lk_dataset* dataset, size_t* count) {
  if (lk_status s = require(dataset != nullptr, "dataset is null")) return s;
  if (lk_status s = require(count != nullptr, "count is null")) return s;
  *count = dataset->value.records.size();
  return LK_OK;
}

lk_status lk_dataset_categories(const lk_dataset* dataset, size_t* count) {
  if (lk_status s = require(dataset != nullptr, "dataset is null")) return s;
  if (lk_status s = require(count != nullptr, "count is null")) return s;
  *count = static_cast<size_t>(dataset->value.categories());
  return LK_OK;
}

lk_status lk_dataset_record(const lk_dataset* dataset, size_t index,
                            int64_t* id, lk_layout** out) {
  if (lk_status s = require(dataset != nullptr, "dataset is null")) return s;
  if (lk_status s = require(out != nullptr, "out is null")) return s;
  if (index >= dataset->value.records.size()) {
    return fail(LK_ERR_BOUNDS, "record index is out of range");
  }
  *out = nullptr;
  return guarded([&] {
    const layoutkit::DatasetRecord& rec = dataset->value.records[index];
    if (id) *id = rec.id;
    *out = new lk_layout{rec.gt_layout};
  });
}

void lk_dataset_free(lk_dataset* dataset) { delete dataset; }

lk_metric_params lk_metric_params_default(void) {
  layoutkit::MetricParams p;
  return {p.gamma_lc, p.gamma_ac, p.smoothing, p.max_exhaustive};
}

lk_status lk_lqs_score(const lk_layout* gt, const lk_layout* pred,
                       const lk_metric_params* params, lk_lqs_report* out) {
  if (lk_status s = require(gt != nullptr, "gt is null")) return s;
  if (lk_status s = require(pred != nullptr, "pred is null")) return s;
  if (lk_status s = require(out != nullptr, "out is null")) return s;
  layoutkit::MetricParams p =
      params ? to_core(*params) : layoutkit::MetricParams{};
  return guarded([&] {
    *out = to_c(layoutkit::layout_quality_score(gt->value, pred->value, p));
  });
}

lk_status lk_predictions_open(const char* jsonl_path, lk_predictions** out) {
  if (lk_status s = require(jsonl_path != nullptr, "jsonl_path is null")) {
    return s;
  }
  if (lk_status s = require(out != nullptr, "out is null")) return s;
  *out = nullptr;
  return guarded([&] {
    *out = new lk_predictions{layoutkit::read_predictions(jsonl_path)};
  });
}

lk_status lk_predictions_size(const lk_predictions* preds, size_t* count) {
  if (lk_status s = require(preds != nullptr, "preds is null")) return s;
  if (lk_status s = require(count != nullptr, "count is null")) return s;
  *count = preds->value.size();
  return LK_OK;
}

lk_status lk_predictions_get(const lk_predictions* preds, size_t index,
                             int64_t* id, lk_layout** out) {
  if (lk_status s = require(preds != nullptr, "preds is null")) return s;
  if (lk_status s = require(out != nullptr, "out is null")) return s;
  if (index >= preds->value.size()) {
    return fail(LK_ERR_BOUNDS, "prediction index is out of range");
  }
  *out = nullptr;
  return guarded([&] {
    if (id) *id = preds->value[index].id;
    *out = new lk_layout{preds->value[index].layout};
  });
}

void lk_predictions_free(lk_predictions* preds) { delete preds; }

lk_status lk_evaluate(const lk_dataset* gt, const lk_predictions* preds,
                      const lk_metric_params* params, int32_t jobs,
                      lk_lqs_report* corpus, lk_lqs_report* per_sample,
                      int64_t* ids) {
  if (lk_status s = require(gt != nullptr, "gt is null")) return s;
  if (lk_status s = require(preds != nullptr, "preds is null")) return s;
  if (lk_status s = require(corpus != nullptr, "corpus is null")) return s;
  layoutkit::MetricParams p =
      params ? to_core(*params) : layoutkit::MetricParams{};
  return guarded([&] {
    layoutkit::EvalOutcome out =
        layoutkit::evaluate_predictions(gt->value, preds->value, p, jobs);
    *corpus = to_c(out.corpus);
    for (size_t i = 0; i < out.samples.size(); ++i) {
      if (per_sample) per_sample[i] = to_c(out.samples[i].report);
      if (ids) ids[i] = out.samples[i].id;
    }
  });
}

lk_model_config lk_model_config_default(void) {
  layoutkit::ModelConfig c;
  return {c.width,       c.encoder_layers, c.decoder_layers, c.heads,
          c.ffn_width,   c.reg_width,      c.grid.resolution, c.max_objects,
          c.loss_balance, c.seed};
}

lk_train_options lk_train_options_default(void) {
  layoutkit::TrainOptions o;
  return {lk_model_config_default(), o.epochs,            o.batch_size,
          o.learning_rate,           o.divergence_factor, o.shuffle_seed};
}

lk_status lk_train(const lk_dataset* data, const lk_train_options* options,
                   const char* checkpoint_path, const char* vocab_path,
                   const char* loss_csv_path, int32_t* diverged) {
  if (lk_status s = require(data != nullptr, "data is null")) return s;
  if (lk_status s = require(checkpoint_path != nullptr,
                            "checkpoint_path is null")) {
    return s;
  }
  if (lk_status s = require(vocab_path != nullptr, "vocab_path is null")) {
    return s;
  }
  lk_train_options opts = options ? *options : lk_train_options_default();
  return guarded([&] {
    const layoutkit::Dataset& ds = data->value;
    layoutkit::Vocab vocab = layoutkit::build_vocab(ds);

    layoutkit::TrainOptions core;
    core.model = to_core_config(opts.model, ds);
    core.model.vocab_size = vocab.size();
    core.epochs = opts.epochs;
    core.batch_size = opts.batch_size;
    core.learning_rate = opts.learning_rate;
    core.divergence_factor = opts.divergence_factor;
    core.shuffle_seed = opts.shuffle_seed;

    layoutkit::PreparedSamples prepared = layoutkit::prepare_samples(
        ds, vocab, core.model.grid, core.model.max_objects);
    layoutkit::Model model(core.model);
    layoutkit::TrainOutcome outcome =
        layoutkit::fit_model(model, prepared, core);

    layoutkit::save_model(model, checkpoint_path);
    vocab.save(vocab_path);
    if (loss_csv_path) layoutkit::write_loss_csv(loss_csv_path, outcome.curve);
    if (diverged) *diverged = outcome.diverged ? 1 : 0;
  });
}

lk_status lk_model_open(const char* checkpoint_path, const char* vocab_path,
                        lk_model** out) {
  if (lk_status s = require(checkpoint_path != nullptr,
                            "checkpoint_path is null")) {
    return s;
  }
  if (lk_status s = require(vocab_path != nullptr, "vocab_path is null")) {
    return s;
  }
  if (lk_status s = require(out != nullptr, "out is null")) return s;
  *out = nullptr;
  return guarded([&] {
    *out = new lk_model{layoutkit::load_model(checkpoint_path),
                        layoutkit::Vocab::load(vocab_path)};
  });
}

lk_status lk_model_generate(const lk_model* model, const lk_dataset* data,
                            const char* predictions_path) {
  if (lk_status s = require(model != nullptr, "model is null")) return s;
  if (lk_status s = require(data != nullptr, "data is null")) return s;
  if (lk_status s = require(predictions_path != nullptr,
                            "predictions_path is null")) {
    return s;
  }
  return guarded([&] {
    std::vector<layoutkit::Prediction> preds = layoutkit::generate_for_dataset(
        model->model, model->vocab, data->value);
    layoutkit::write_predictions(predictions_path, preds);
  });
}

void lk_model_free(lk_model* model) { delete model; }

lk_status lk_render_svg(const lk_layout* layout, const lk_dataset* names,
                        char** out_svg) {
  if (lk_status s = require(layout != nullptr, "layout is null")) return s;
  if (lk_status s = require(out_svg != nullptr, "out_svg is null")) return s;
  *out_svg = nullptr;
  return guarded([&] {
    std::string svg = layoutkit::render_layout_svg(
        layout->value,
        names ? names->value.category_names : std::vector<std::string>{});
    char* copy = new char[svg.size() + 1];
    std::memcpy(copy, svg.c_str(), svg.size() + 1);
    *out_svg = copy;
  });
}

void lk_string_free(char* text) { delete[] text; }

}  // extern "C"
