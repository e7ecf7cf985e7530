#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <layoutkit/layoutkit.h>

namespace {

namespace fs = std::filesystem;

std::string scratch(const char* name) {
  fs::path dir = fs::temp_directory_path() / "lk_capi_tests";
  fs::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(lk_version()) == "0.1.0");
  CHECK(std::string(lk_status_name(LK_OK)) == "ok");
  CHECK(std::string(lk_status_name(LK_ERR_IO)) == "io");
  CHECK(std::string(lk_status_name(LK_ERR_UNKNOWN)) == "unknown");
}

TEST_CASE("layout handles") {
  std::vector<lk_object> objs = {{2, 100.0, 80.0, 40.0, 30.0},
                                 {0, 200.0, 200.0, 50.0, 60.0}};
  lk_layout* layout = nullptr;
  REQUIRE(lk_layout_create(256.0, 256.0, objs.data(), objs.size(), &layout) ==
          LK_OK);

  size_t count = 0;
  CHECK(lk_layout_objects(layout, nullptr, 0, &count) == LK_OK);
  CHECK(count == 2);

  std::vector<lk_object> back(count);
  CHECK(lk_layout_objects(layout, back.data(), back.size(), &count) == LK_OK);
  CHECK(back[0].category == 2);
  CHECK(back[1].w == 50.0);

  lk_object tiny[1];
  CHECK(lk_layout_objects(layout, tiny, 1, &count) == LK_ERR_CAPACITY);

  double w = 0.0, h = 0.0;
  CHECK(lk_layout_frame(layout, &w, &h) == LK_OK);
  CHECK(w == 256.0);
  CHECK(h == 256.0);
  lk_layout_free(layout);

  SUBCASE("null arguments are refused") {
    CHECK(lk_layout_create(256.0, 256.0, nullptr, 2, &layout) ==
          LK_ERR_INVALID_ARGUMENT);
    CHECK(lk_layout_create(256.0, 256.0, objs.data(), 2, nullptr) ==
          LK_ERR_INVALID_ARGUMENT);
    CHECK(std::strlen(lk_last_error()) > 0);
  }

  SUBCASE("boxes outside the frame are refused") {
    lk_object bad = {0, 300.0, 100.0, 40.0, 40.0};
    lk_layout* none = nullptr;
    CHECK(lk_layout_create(256.0, 256.0, &bad, 1, &none) ==
          LK_ERR_INVALID_ARGUMENT);
    CHECK(none == nullptr);
  }
}

TEST_CASE("self-comparison saturates the quality score") {
  lk_dataset* ds = nullptr;
  REQUIRE(lk_dataset_synth(5, 8, &ds) == LK_OK);

  size_t n = 0;
  CHECK(lk_dataset_size(ds, &n) == LK_OK);
  CHECK(n == 8);
  size_t cats = 0;
  CHECK(lk_dataset_categories(ds, &cats) == LK_OK);
  CHECK(cats == 5);

  for (size_t i = 0; i < n; ++i) {
    int64_t id = 0;
    lk_layout* layout = nullptr;
    REQUIRE(lk_dataset_record(ds, i, &id, &layout) == LK_OK);
    CHECK(id == static_cast<int64_t>(i + 1));
    lk_lqs_report report;
    REQUIRE(lk_lqs_score(layout, layout, nullptr, &report) == LK_OK);
    CHECK(report.lqs == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(report.lr == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.has_location == 1);
    lk_layout_free(layout);
  }

  lk_layout* oob = nullptr;
  CHECK(lk_dataset_record(ds, 99, nullptr, &oob) == LK_ERR_BOUNDS);
  lk_dataset_free(ds);
}

TEST_CASE("dataset write and reopen") {
  lk_dataset* ds = nullptr;
  REQUIRE(lk_dataset_synth(13, 6, &ds) == LK_OK);
  std::string ann = scratch("rt_ann.json");
  std::string cap = scratch("rt_cap.json");
  REQUIRE(lk_dataset_write(ds, ann.c_str(), cap.c_str()) == LK_OK);

  lk_dataset* back = nullptr;
  REQUIRE(lk_dataset_open(ann.c_str(), cap.c_str(), &back) == LK_OK);
  size_t n = 0;
  CHECK(lk_dataset_size(back, &n) == LK_OK);
  CHECK(n == 6);

  // reopened layouts still score 4.0 against the originals
  for (size_t i = 0; i < n; ++i) {
    lk_layout *a = nullptr, *b = nullptr;
    REQUIRE(lk_dataset_record(ds, i, nullptr, &a) == LK_OK);
    REQUIRE(lk_dataset_record(back, i, nullptr, &b) == LK_OK);
    lk_lqs_report report;
    REQUIRE(lk_lqs_score(a, b, nullptr, &report) == LK_OK);
    CHECK(report.lqs == doctest::Approx(4.0).epsilon(1e-9));
    lk_layout_free(a);
    lk_layout_free(b);
  }
  lk_dataset_free(back);
  lk_dataset_free(ds);

  SUBCASE("missing files surface as io errors") {
    lk_dataset* none = nullptr;
    lk_status s = lk_dataset_open("/nonexistent/ann.json",
                                  "/nonexistent/cap.json", &none);
    CHECK(s == LK_ERR_IO);
    CHECK(none == nullptr);
    CHECK(std::strlen(lk_last_error()) > 0);
  }
}

TEST_CASE("train, reload, generate, evaluate") {
  lk_dataset* ds = nullptr;
  REQUIRE(lk_dataset_synth(21, 48, &ds) == LK_OK);

  lk_train_options opts = lk_train_options_default();
  opts.model.width = 16;
  opts.model.encoder_layers = 1;
  opts.model.decoder_layers = 1;
  opts.model.heads = 2;
  opts.model.ffn_width = 32;
  opts.model.max_objects = 8;
  opts.model.seed = 3;
  opts.epochs = 2;
  opts.batch_size = 16;
  opts.learning_rate = 2e-3;

  std::string ckpt = scratch("model.bin");
  std::string vocab = scratch("vocab.tsv");
  std::string csv = scratch("loss.csv");
  int32_t diverged = -1;
  REQUIRE(lk_train(ds, &opts, ckpt.c_str(), vocab.c_str(), csv.c_str(),
                   &diverged) == LK_OK);
  CHECK(diverged == 0);
  CHECK(fs::exists(ckpt));
  CHECK(fs::exists(vocab));
  CHECK(fs::exists(csv));

  lk_model* model = nullptr;
  REQUIRE(lk_model_open(ckpt.c_str(), vocab.c_str(), &model) == LK_OK);

  std::string preds_path = scratch("preds.jsonl");
  REQUIRE(lk_model_generate(model, ds, preds_path.c_str()) == LK_OK);
  lk_model_free(model);

  lk_predictions* preds = nullptr;
  REQUIRE(lk_predictions_open(preds_path.c_str(), &preds) == LK_OK);
  size_t n = 0;
  CHECK(lk_predictions_size(preds, &n) == LK_OK);
  CHECK(n == 48);

  int64_t first_id = 0;
  lk_layout* first = nullptr;
  REQUIRE(lk_predictions_get(preds, 0, &first_id, &first) == LK_OK);
  CHECK(first_id == 1);
  lk_layout_free(first);

  lk_lqs_report corpus;
  std::vector<lk_lqs_report> rows(n);
  std::vector<int64_t> ids(n);
  REQUIRE(lk_evaluate(ds, preds, nullptr, 2, &corpus, rows.data(),
                      ids.data()) == LK_OK);
  CHECK(corpus.lqs >= 0.0);
  CHECK(corpus.lqs <= 4.0);
  CHECK(ids.front() == 1);
  CHECK(ids.back() == 48);

  lk_predictions_free(preds);
  lk_dataset_free(ds);

  SUBCASE("missing checkpoint is an io error") {
    lk_model* none = nullptr;
    CHECK(lk_model_open("/nonexistent/model.bin", vocab.c_str(), &none) ==
          LK_ERR_IO);
    CHECK(std::strlen(lk_last_error()) > 0);
  }
}

TEST_CASE("svg rendering through the c surface") {
  lk_dataset* ds = nullptr;
  REQUIRE(lk_dataset_synth(9, 3, &ds) == LK_OK);
  lk_layout* layout = nullptr;
  REQUIRE(lk_dataset_record(ds, 0, nullptr, &layout) == LK_OK);

  char* svg = nullptr;
  REQUIRE(lk_render_svg(layout, ds, &svg) == LK_OK);
  REQUIRE(svg != nullptr);
  std::string text(svg);
  CHECK(text.rfind("<svg", 0) == 0);
  CHECK(text.find("</svg>") != std::string::npos);
  lk_string_free(svg);

  char* bare = nullptr;
  REQUIRE(lk_render_svg(layout, nullptr, &bare) == LK_OK);
  CHECK(std::string(bare).find("<rect") != std::string::npos);
  lk_string_free(bare);

  CHECK(lk_render_svg(nullptr, nullptr, &svg) == LK_ERR_INVALID_ARGUMENT);
  CHECK(lk_render_svg(layout, nullptr, nullptr) == LK_ERR_INVALID_ARGUMENT);

  lk_layout_free(layout);
  lk_dataset_free(ds);
}

TEST_CASE("default parameter builders") {
  lk_metric_params mp = lk_metric_params_default();
  CHECK(mp.location_weight == 0.25);
  CHECK(mp.area_weight == 0.25);
  CHECK(mp.smoothing == 80.0);
  CHECK(mp.max_exhaustive == 6);

  lk_model_config mc = lk_model_config_default();
  CHECK(mc.width == 32);
  CHECK(mc.grid_resolution == 7);
  CHECK(mc.loss_balance == 2.0);

  lk_train_options to = lk_train_options_default();
  CHECK(to.epochs == 15);
  CHECK(to.batch_size == 16);
  CHECK(to.divergence_factor == 10.0);
}
