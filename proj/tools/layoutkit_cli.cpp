// Command-line front end. Everything goes through the C surface in
// layoutkit.h; no core headers are included here.
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <layoutkit/layoutkit.h>

namespace {

int fail_status(lk_status status) {
  std::fprintf(stderr, "error: %s: %s\n", lk_status_name(status),
               lk_last_error());
  return 1;
}

int fail_message(const char* category, const std::string& message) {
  std::fprintf(stderr, "error: %s: %s\n", category, message.c_str());
  return 1;
}

#define LK_TRY(call)                                    \
  do {                                                  \
    lk_status lk_try_status_ = (call);                  \
    if (lk_try_status_ != LK_OK) {                      \
      return fail_status(lk_try_status_);               \
    }                                                   \
  } while (0)

// Explicit flags win over the environment; the override only fills defaults.
bool seed_from_env(uint64_t* seed, std::string* problem) {
  const char* raw = std::getenv("LAYOUTKIT_SEED");
  if (!raw || !*raw) return true;
  char* end = nullptr;
  unsigned long long value = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0') {
    *problem = "LAYOUTKIT_SEED is not an unsigned integer: " +
               std::string(raw);
    return false;
  }
  *seed = value;
  return true;
}

std::string format_number(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

// One report row in the fixed column order LR LP ALC RLC LC AAC RAC AC LQS.
std::vector<std::string> report_cells(const lk_lqs_report& r,
                                      const char* spec,
                                      const char* missing) {
  std::vector<std::string> cells;
  cells.push_back(format_number(spec, r.lr));
  cells.push_back(format_number(spec, r.lp));
  cells.push_back(r.has_location ? format_number(spec, r.alc) : missing);
  cells.push_back(r.has_location ? format_number(spec, r.rlc) : missing);
  cells.push_back(format_number(spec, r.lc));
  cells.push_back(format_number(spec, r.aac));
  cells.push_back(format_number(spec, r.rac));
  cells.push_back(format_number(spec, r.ac));
  cells.push_back(format_number(spec, r.lqs));
  return cells;
}

const char* const kColumnNames[9] = {"LR",  "LP",  "ALC", "RLC", "LC",
                                     "AAC", "RAC", "AC",  "LQS"};

std::string report_json(const lk_lqs_report& r) {
  std::string out = "{";
  const char* keys[9] = {"lr",  "lp",  "alc", "rlc", "lc",
                         "aac", "rac", "ac",  "lqs"};
  std::vector<std::string> cells = report_cells(r, "%.9g", "null");
  for (int i = 0; i < 9; ++i) {
    if (i) out += ",";
    out += "\"";
    out += keys[i];
    out += "\":";
    out += cells[i];
  }
  out += "}";
  return out;
}

bool write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc | std::ios::binary);
  if (!f) return false;
  f << text;
  return static_cast<bool>(f);
}

struct DatasetGuard {
  lk_dataset* ptr = nullptr;
  ~DatasetGuard() { lk_dataset_free(ptr); }
};

struct PredictionsGuard {
  lk_predictions* ptr = nullptr;
  ~PredictionsGuard() { lk_predictions_free(ptr); }
};

struct LayoutGuard {
  lk_layout* ptr = nullptr;
  ~LayoutGuard() { lk_layout_free(ptr); }
};

struct ModelGuard {
  lk_model* ptr = nullptr;
  ~ModelGuard() { lk_model_free(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"caption-to-layout toolkit"};
  app.require_subcommand(1);

  // ---- ingest ----
  std::string in_ann, in_cap, out_ann, out_cap;
  CLI::App* ingest = app.add_subcommand(
      "ingest", "Normalize raw annotation and caption files");
  ingest->add_option("--annotations", in_ann, "raw annotation JSON")
      ->required();
  ingest->add_option("--captions", in_cap, "raw caption JSON")->required();
  ingest->add_option("--out-annotations", out_ann, "normalized annotations")
      ->required();
  ingest->add_option("--out-captions", out_cap, "normalized captions")
      ->required();

  // ---- synth ----
  uint64_t synth_seed = 1;
  int32_t synth_size = 100;
  std::string synth_ann, synth_cap;
  CLI::App* synth =
      app.add_subcommand("synth", "Generate a toy caption-layout dataset");
  CLI::Option* synth_seed_opt =
      synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--size", synth_size, "number of records")->required();
  synth->add_option("--annotations", synth_ann, "output annotation JSON")
      ->required();
  synth->add_option("--captions", synth_cap, "output caption JSON")
      ->required();

  // ---- train ----
  lk_train_options train_opts = lk_train_options_default();
  std::string train_ann, train_cap, train_ckpt, train_vocab, train_csv;
  CLI::App* train =
      app.add_subcommand("train", "Fit a caption-to-layout model");
  train->add_option("--annotations", train_ann, "annotation JSON")->required();
  train->add_option("--captions", train_cap, "caption JSON")->required();
  train->add_option("--checkpoint", train_ckpt, "output checkpoint")
      ->required();
  train->add_option("--vocab", train_vocab, "output vocabulary")->required();
  train->add_option("--loss-csv", train_csv, "optional loss curve CSV");
  train->add_option("--width", train_opts.model.width, "embedding width");
  train->add_option("--encoder-layers", train_opts.model.encoder_layers,
                    "encoder depth");
  train->add_option("--decoder-layers", train_opts.model.decoder_layers,
                    "decoder depth");
  train->add_option("--heads", train_opts.model.heads, "attention heads");
  train->add_option("--ffn-width", train_opts.model.ffn_width,
                    "feed-forward width, 0 picks 4x width");
  train->add_option("--reg-width", train_opts.model.reg_width,
                    "box head width, 0 picks width");
  train->add_option("--grid-resolution", train_opts.model.grid_resolution,
                    "cells per frame side");
  train->add_option("--max-objects", train_opts.model.max_objects,
                    "decoder object capacity");
  train->add_option("--loss-balance", train_opts.model.loss_balance,
                    "regression loss weight");
  CLI::Option* train_seed_opt =
      train->add_option("--seed", train_opts.model.seed, "init seed");
  train->add_option("--epochs", train_opts.epochs, "training epochs");
  train->add_option("--batch-size", train_opts.batch_size, "minibatch size");
  train->add_option("--learning-rate", train_opts.learning_rate, "step size");
  train->add_option("--divergence-factor", train_opts.divergence_factor,
                    "abort when loss exceeds best times this");
  train->add_option("--shuffle-seed", train_opts.shuffle_seed,
                    "epoch shuffle seed");

  // ---- generate ----
  std::string gen_ckpt, gen_vocab, gen_ann, gen_cap, gen_out;
  CLI::App* generate = app.add_subcommand(
      "generate", "Decode layouts for every record of a dataset");
  generate->add_option("--checkpoint", gen_ckpt, "model checkpoint")
      ->required();
  generate->add_option("--vocab", gen_vocab, "vocabulary file")->required();
  generate->add_option("--annotations", gen_ann, "annotation JSON")
      ->required();
  generate->add_option("--captions", gen_cap, "caption JSON")->required();
  generate->add_option("--out", gen_out, "output predictions JSONL")
      ->required();

  // ---- eval ----
  lk_metric_params metric = lk_metric_params_default();
  std::string eval_ann, eval_cap, eval_preds, eval_format = "table";
  std::string eval_per_sample;
  int32_t eval_jobs = 1;
  CLI::App* eval =
      app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--annotations", eval_ann, "annotation JSON")->required();
  eval->add_option("--captions", eval_cap, "caption JSON")->required();
  eval->add_option("--predictions", eval_preds, "predictions JSONL")
      ->required();
  eval->add_option("--format", eval_format, "table, csv, or json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  eval->add_option("--per-sample", eval_per_sample,
                   "write per-sample reports to this JSONL file");
  eval->add_option("--jobs", eval_jobs, "parallel scoring degree");
  eval->add_option("--location-weight", metric.location_weight,
                   "absolute location share");
  eval->add_option("--area-weight", metric.area_weight,
                   "absolute area share");
  eval->add_option("--smoothing", metric.smoothing,
                   "location kernel distance scale");
  eval->add_option("--max-exhaustive", metric.max_exhaustive,
                   "enumeration cutoff per category");

  // ---- render ----
  std::string render_ann, render_cap, render_preds, render_out;
  int64_t render_id = -1;
  CLI::App* render = app.add_subcommand("render", "Draw one layout as SVG");
  render->add_option("--annotations", render_ann,
                     "annotation JSON for ground truth and labels");
  render->add_option("--captions", render_cap, "caption JSON");
  render->add_option("--predictions", render_preds,
                     "render from this predictions JSONL instead");
  render->add_option("--id", render_id, "record id, first record if absent");
  render->add_option("--out", render_out, "output SVG path, stdout if absent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail_message("invalid-argument", e.what());
  }

  if (*ingest) {
    DatasetGuard ds;
    LK_TRY(lk_dataset_open(in_ann.c_str(), in_cap.c_str(), &ds.ptr));
    LK_TRY(lk_dataset_write(ds.ptr, out_ann.c_str(), out_cap.c_str()));
    size_t n = 0;
    LK_TRY(lk_dataset_size(ds.ptr, &n));
    std::printf("records: %zu\n", n);
    return 0;
  }

  if (*synth) {
    if (synth_seed_opt->count() == 0) {
      std::string problem;
      if (!seed_from_env(&synth_seed, &problem)) {
        return fail_message("invalid-argument", problem);
      }
    }
    DatasetGuard ds;
    LK_TRY(lk_dataset_synth(synth_seed, synth_size, &ds.ptr));
    LK_TRY(lk_dataset_write(ds.ptr, synth_ann.c_str(), synth_cap.c_str()));
    std::printf("records: %d\n", synth_size);
    return 0;
  }

  if (*train) {
    if (train_seed_opt->count() == 0) {
      std::string problem;
      if (!seed_from_env(&train_opts.model.seed, &problem)) {
        return fail_message("invalid-argument", problem);
      }
    }
    DatasetGuard ds;
    LK_TRY(lk_dataset_open(train_ann.c_str(), train_cap.c_str(), &ds.ptr));
    int32_t diverged = 0;
    LK_TRY(lk_train(ds.ptr, &train_opts, train_ckpt.c_str(),
                    train_vocab.c_str(),
                    train_csv.empty() ? nullptr : train_csv.c_str(),
                    &diverged));
    std::printf("checkpoint: %s\n", train_ckpt.c_str());
    if (diverged) std::printf("diverged: rolled back to best epoch\n");
    return 0;
  }

  if (*generate) {
    DatasetGuard ds;
    LK_TRY(lk_dataset_open(gen_ann.c_str(), gen_cap.c_str(), &ds.ptr));
    ModelGuard model;
    LK_TRY(lk_model_open(gen_ckpt.c_str(), gen_vocab.c_str(), &model.ptr));
    LK_TRY(lk_model_generate(model.ptr, ds.ptr, gen_out.c_str()));
    std::printf("predictions: %s\n", gen_out.c_str());
    return 0;
  }

  if (*eval) {
    DatasetGuard ds;
    LK_TRY(lk_dataset_open(eval_ann.c_str(), eval_cap.c_str(), &ds.ptr));
    PredictionsGuard preds;
    LK_TRY(lk_predictions_open(eval_preds.c_str(), &preds.ptr));
    size_t n = 0;
    LK_TRY(lk_predictions_size(preds.ptr, &n));
    std::vector<lk_lqs_report> rows(n);
    std::vector<int64_t> ids(n);
    lk_lqs_report corpus;
    LK_TRY(lk_evaluate(ds.ptr, preds.ptr, &metric, eval_jobs, &corpus,
                       rows.data(), ids.data()));

    std::string out;
    if (eval_format == "table") {
      for (int i = 0; i < 9; ++i) {
        char cell[32];
        std::snprintf(cell, sizeof(cell), "%s%8s", i ? " " : "",
                      kColumnNames[i]);
        out += cell;
      }
      out += "\n";
      std::vector<std::string> cells = report_cells(corpus, "%8.4f", "       -");
      for (int i = 0; i < 9; ++i) {
        if (i) out += " ";
        out += cells[i];
      }
      out += "\n";
    } else if (eval_format == "csv") {
      out = "lr,lp,alc,rlc,lc,aac,rac,ac,lqs\n";
      std::vector<std::string> cells = report_cells(corpus, "%.6f", "");
      for (int i = 0; i < 9; ++i) {
        if (i) out += ",";
        out += cells[i];
      }
      out += "\n";
    } else {
      out = report_json(corpus) + "\n";
    }
    std::fputs(out.c_str(), stdout);

    if (!eval_per_sample.empty()) {
      std::string lines;
      for (size_t i = 0; i < n; ++i) {
        char head[48];
        std::snprintf(head, sizeof(head), "{\"id\":%" PRId64 ",",
                      ids[i]);
        lines += head;
        lines += report_json(rows[i]).substr(1);
        lines += "\n";
      }
      if (!write_text_file(eval_per_sample, lines)) {
        return fail_message("io",
                            "cannot write per-sample reports: " +
                                eval_per_sample);
      }
    }
    return 0;
  }

  if (*render) {
    bool have_dataset = !render_ann.empty() || !render_cap.empty();
    if (have_dataset && (render_ann.empty() || render_cap.empty())) {
      return fail_message(
          "invalid-argument",
          "--annotations and --captions must be given together");
    }
    if (!have_dataset && render_preds.empty()) {
      return fail_message("invalid-argument",
                          "give --predictions or a dataset to render from");
    }

    DatasetGuard ds;
    if (have_dataset) {
      LK_TRY(lk_dataset_open(render_ann.c_str(), render_cap.c_str(),
                             &ds.ptr));
    }

    LayoutGuard layout;
    if (!render_preds.empty()) {
      PredictionsGuard preds;
      LK_TRY(lk_predictions_open(render_preds.c_str(), &preds.ptr));
      size_t n = 0;
      LK_TRY(lk_predictions_size(preds.ptr, &n));
      for (size_t i = 0; i < n && !layout.ptr; ++i) {
        int64_t id = 0;
        LayoutGuard candidate;
        LK_TRY(lk_predictions_get(preds.ptr, i, &id, &candidate.ptr));
        if (render_id < 0 || id == render_id) {
          layout.ptr = candidate.ptr;
          candidate.ptr = nullptr;
        }
      }
    } else {
      size_t n = 0;
      LK_TRY(lk_dataset_size(ds.ptr, &n));
      for (size_t i = 0; i < n && !layout.ptr; ++i) {
        int64_t id = 0;
        LayoutGuard candidate;
        LK_TRY(lk_dataset_record(ds.ptr, i, &id, &candidate.ptr));
        if (render_id < 0 || id == render_id) {
          layout.ptr = candidate.ptr;
          candidate.ptr = nullptr;
        }
      }
    }
    if (!layout.ptr) {
      return fail_message("invalid-argument",
                          "no record with id " + std::to_string(render_id));
    }

    char* svg = nullptr;
    LK_TRY(lk_render_svg(layout.ptr, ds.ptr, &svg));
    std::string text(svg);
    lk_string_free(svg);
    if (render_out.empty()) {
      std::fputs(text.c_str(), stdout);
    } else if (!write_text_file(render_out, text)) {
      return fail_message("io", "cannot write SVG: " + render_out);
    }
    return 0;
  }

  return fail_message("invalid-argument", "no command given");
}
