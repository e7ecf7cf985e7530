#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "layoutkit/dataset.hpp"
#include "layoutkit/evaluate.hpp"
#include "layoutkit/render.hpp"
#include "layoutkit/training.hpp"

using namespace layoutkit;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
  fs::path p = fs::temp_directory_path() / "lk_dataset_tests";
  fs::create_directories(p);
  return p;
}

void put_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::trunc);
  f << text;
}

const char* kMinimalAnnotations = R"({
  "images": [{"id": 1, "width": 64, "height": 64}],
  "categories": [{"id": 17, "name": "cat"}, {"id": 3, "name": "bird"}],
  "annotations": [
    {"image_id": 1, "category_id": 17, "bbox": [8, 18, 4, 4]}
  ]
})";

const char* kMinimalCaptions = R"({
  "annotations": [
    {"image_id": 1, "caption": "a cat sits"}
  ]
})";

}  // namespace

TEST_CASE("annotation ingest") {
  fs::path dir = scratch_dir();
  fs::path ann = dir / "ann.json";
  fs::path cap = dir / "cap.json";

  SUBCASE("minimal record with corner-to-center conversion") {
    put_file(ann, kMinimalAnnotations);
    put_file(cap, kMinimalCaptions);
    Dataset ds = ingest_annotations(ann.string(), cap.string());
    REQUIRE(ds.records.size() == 1);
    const DatasetRecord& rec = ds.records[0];
    CHECK(rec.id == 1);
    REQUIRE(rec.captions.size() == 1);
    CHECK(rec.captions[0] == "a cat sits");
    REQUIRE(rec.gt_layout.objects.size() == 1);
    // raw center (10, 20) on a 64-pixel frame scales by 4 to the canonical one
    CHECK(rec.gt_layout.objects[0].bbox.x == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(rec.gt_layout.objects[0].bbox.y == doctest::Approx(80.0).epsilon(1e-12));
    CHECK(rec.gt_layout.objects[0].bbox.w == doctest::Approx(16.0).epsilon(1e-12));
    // dense ids ascend by raw id: 3 -> 0, 17 -> 1
    CHECK(ds.categories() == 2);
    CHECK(ds.category_ids[0] == 3);
    CHECK(ds.category_names[0] == "bird");
    CHECK(rec.gt_layout.objects[0].category == 1);
  }

  SUBCASE("image with no annotations keeps an empty layout") {
    put_file(ann, R"({"images":[{"id":5}],"annotations":[]})");
    put_file(cap, R"({"annotations":[{"image_id":5,"caption":"empty scene"}]})");
    Dataset ds = ingest_annotations(ann.string(), cap.string());
    REQUIRE(ds.records.size() == 1);
    CHECK(ds.records[0].gt_layout.objects.empty());
    CHECK(ds.records[0].gt_layout.frame.width == 256.0);
  }

  SUBCASE("five captions attach to one record") {
    put_file(ann, R"({"images":[{"id":9}],"annotations":[]})");
    std::string caps = R"({"annotations":[)";
    for (int i = 0; i < 5; ++i) {
      if (i) caps += ",";
      caps += R"({"image_id":9,"caption":"caption )" + std::to_string(i) + "\"}";
    }
    caps += "]}";
    put_file(cap, caps);
    Dataset ds = ingest_annotations(ann.string(), cap.string());
    REQUIRE(ds.records.size() == 1);
    CHECK(ds.records[0].captions.size() == 5);
  }

  SUBCASE("records come back ordered by image id") {
    put_file(ann, R"({"images":[{"id":30},{"id":4},{"id":12}],"annotations":[]})");
    put_file(cap, R"({"annotations":[
      {"image_id":30,"caption":"c"},{"image_id":4,"caption":"a"},
      {"image_id":12,"caption":"b"}]})");
    Dataset ds = ingest_annotations(ann.string(), cap.string());
    REQUIRE(ds.records.size() == 3);
    CHECK(ds.records[0].id == 4);
    CHECK(ds.records[1].id == 12);
    CHECK(ds.records[2].id == 30);
  }

  SUBCASE("missing captions skip the image with a warning") {
    put_file(ann, R"({"images":[{"id":1},{"id":2}],"annotations":[]})");
    put_file(cap, R"({"annotations":[{"image_id":2,"caption":"only two"}]})");
    std::vector<std::string> warnings;
    Dataset ds = ingest_annotations(ann.string(), cap.string(), &warnings);
    REQUIRE(ds.records.size() == 1);
    CHECK(ds.records[0].id == 2);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("image 1") != std::string::npos);
  }

  SUBCASE("boxes outside the frame are clipped") {
    put_file(ann, R"({"images":[{"id":1,"width":100,"height":100}],
      "annotations":[{"image_id":1,"category_id":1,"bbox":[-10,40,30,30]}]})");
    put_file(cap, R"({"annotations":[{"image_id":1,"caption":"clipped"}]})");
    Dataset ds = ingest_annotations(ann.string(), cap.string());
    REQUIRE(ds.records[0].gt_layout.objects.size() == 1);
    const BBox& b = ds.records[0].gt_layout.objects[0].bbox;
    // clipped corner box [0,40,20,30] on 100 frame scales by 2.56
    CHECK(b.x == doctest::Approx(10.0 * 2.56).epsilon(1e-12));
    CHECK(b.w == doctest::Approx(20.0 * 2.56).epsilon(1e-12));
  }

  SUBCASE("schema violations name the offending field") {
    put_file(ann, R"({"images":[{"id":"one"}],"annotations":[]})");
    put_file(cap, kMinimalCaptions);
    try {
      ingest_annotations(ann.string(), cap.string());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Parse);
      CHECK(std::string(e.what()).find("images[0].id") != std::string::npos);
    }

    put_file(ann, R"({"images":[{"id":1}],
      "annotations":[{"image_id":1,"category_id":2,"bbox":[1,2,3]}]})");
    try {
      ingest_annotations(ann.string(), cap.string());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("annotations[0].bbox") != std::string::npos);
    }

    put_file(ann, R"({"images":[{"id":1}],
      "annotations":[{"image_id":7,"category_id":2,"bbox":[1,2,3,4]}]})");
    CHECK_THROWS_AS(ingest_annotations(ann.string(), cap.string()), Error);
  }

  SUBCASE("round trip through write_dataset") {
    Dataset ds = synth_toy_dataset(42, 12);
    fs::path a2 = dir / "rt_ann.json";
    fs::path c2 = dir / "rt_cap.json";
    write_dataset(ds, a2.string(), c2.string());
    Dataset back = ingest_annotations(a2.string(), c2.string());
    REQUIRE(back.records.size() == ds.records.size());
    CHECK(back.category_ids == ds.category_ids);
    CHECK(back.category_names == ds.category_names);
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
      const DatasetRecord& x = ds.records[i];
      const DatasetRecord& y = back.records[i];
      CHECK(x.id == y.id);
      CHECK(x.captions == y.captions);
      REQUIRE(x.gt_layout.objects.size() == y.gt_layout.objects.size());
      for (std::size_t k = 0; k < x.gt_layout.objects.size(); ++k) {
        CHECK(x.gt_layout.objects[k].category == y.gt_layout.objects[k].category);
        CHECK(x.gt_layout.objects[k].bbox.x ==
              doctest::Approx(y.gt_layout.objects[k].bbox.x).epsilon(1e-9));
        CHECK(x.gt_layout.objects[k].bbox.y ==
              doctest::Approx(y.gt_layout.objects[k].bbox.y).epsilon(1e-9));
        CHECK(x.gt_layout.objects[k].bbox.w ==
              doctest::Approx(y.gt_layout.objects[k].bbox.w).epsilon(1e-9));
        CHECK(x.gt_layout.objects[k].bbox.h ==
              doctest::Approx(y.gt_layout.objects[k].bbox.h).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("toy dataset synthesis") {
  Dataset ds = synth_toy_dataset(7, 300);
  CHECK(ds.records.size() == 300);
  CHECK(ds.categories() == 5);

  SUBCASE("identical seeds reproduce the corpus") {
    Dataset again = synth_toy_dataset(7, 300);
    REQUIRE(again.records.size() == ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
      CHECK(ds.records[i].captions == again.records[i].captions);
      REQUIRE(ds.records[i].gt_layout.objects.size() ==
              again.records[i].gt_layout.objects.size());
      for (std::size_t k = 0; k < ds.records[i].gt_layout.objects.size(); ++k) {
        CHECK(ds.records[i].gt_layout.objects[k].bbox.x ==
              again.records[i].gt_layout.objects[k].bbox.x);
      }
    }
  }

  SUBCASE("spatial relations hold by construction") {
    int above_seen = 0, two_seen = 0;
    for (const DatasetRecord& rec : ds.records) {
      const std::string& text = rec.captions[0];
      if (text.find(" above ") != std::string::npos) {
        ++above_seen;
        REQUIRE(rec.gt_layout.objects.size() == 2);
        CHECK(rec.gt_layout.objects[0].bbox.y < rec.gt_layout.objects[1].bbox.y);
      }
      if (text.rfind("two ", 0) == 0) {
        ++two_seen;
        REQUIRE(rec.gt_layout.objects.size() == 2);
        CHECK(rec.gt_layout.objects[0].category ==
              rec.gt_layout.objects[1].category);
      }
      validate_layout(rec.gt_layout);
      CHECK(rec.captions.size() == 2);
    }
    CHECK(above_seen > 0);
    CHECK(two_seen > 0);
  }

  SUBCASE("size must be positive") {
    CHECK_THROWS_AS(synth_toy_dataset(1, 0), Error);
  }
}

TEST_CASE("prediction file round trip") {
  fs::path path = scratch_dir() / "preds.jsonl";
  std::vector<Prediction> preds;
  Dataset ds = synth_toy_dataset(3, 5);
  for (const DatasetRecord& rec : ds.records) {
    preds.push_back({rec.id, rec.gt_layout});
  }
  write_predictions(path.string(), preds);
  std::vector<Prediction> back = read_predictions(path.string());
  REQUIRE(back.size() == preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    CHECK(back[i].id == preds[i].id);
    REQUIRE(back[i].layout.objects.size() == preds[i].layout.objects.size());
    for (std::size_t k = 0; k < preds[i].layout.objects.size(); ++k) {
      // center form serializes directly, so values survive exactly
      CHECK(back[i].layout.objects[k].bbox.x == preds[i].layout.objects[k].bbox.x);
      CHECK(back[i].layout.objects[k].bbox.h == preds[i].layout.objects[k].bbox.h);
      CHECK(back[i].layout.objects[k].category == preds[i].layout.objects[k].category);
    }
  }

  SUBCASE("malformed lines are rejected with their line number") {
    put_file(path, "{\"id\": 1}\n");
    try {
      read_predictions(path.string());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Parse);
      CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
  }
}

TEST_CASE("training pipeline pieces") {
  Dataset ds = synth_toy_dataset(11, 24);
  Vocab vocab = build_vocab(ds);
  CHECK(vocab.size() > 10);
  CHECK(vocab.lookup("above") != Vocab::kUnk);

  GridSpec grid{7, ds.categories(), {256.0, 256.0}};
  PreparedSamples prep = prepare_samples(ds, vocab, grid, 8);
  REQUIRE(prep.samples.size() == 24);
  CHECK(prep.ids[0] == 1);
  for (const TrainSample& s : prep.samples) {
    CHECK(!s.caption.empty());
    CHECK(s.mask.size == static_cast<int>(s.caption.size()));
    CHECK(s.target.tokens.back() == end_token(grid));
  }

  SUBCASE("short fit runs and logs a curve") {
    TrainOptions opts;
    opts.model.width = 16;
    opts.model.encoder_layers = 1;
    opts.model.decoder_layers = 1;
    opts.model.heads = 2;
    opts.model.ffn_width = 32;
    opts.model.grid = grid;
    opts.model.max_objects = 8;
    opts.model.vocab_size = vocab.size();
    opts.model.seed = 5;
    opts.epochs = 3;
    opts.batch_size = 8;
    opts.learning_rate = 3e-3;
    Model model(opts.model);
    TrainOutcome outcome = fit_model(model, prep, opts);
    CHECK_FALSE(outcome.diverged);
    REQUIRE(outcome.curve.size() == 3);
    CHECK(outcome.curve.back().loss.total < outcome.curve.front().loss.total);

    fs::path csv = scratch_dir() / "loss.csv";
    write_loss_csv(csv.string(), outcome.curve);
    std::ifstream f(csv);
    std::string header;
    std::getline(f, header);
    CHECK(header == "epoch,total,classification,regression");
    int rows = 0;
    std::string line;
    while (std::getline(f, line)) {
      if (!line.empty()) ++rows;
    }
    CHECK(rows == 3);

    std::vector<Prediction> preds = generate_for_dataset(model, vocab, ds);
    REQUIRE(preds.size() == ds.records.size());
    for (const Prediction& p : preds) validate_layout(p.layout);
  }

  SUBCASE("a hostile learning rate trips the divergence guard") {
    TrainOptions opts;
    opts.model.width = 16;
    opts.model.encoder_layers = 1;
    opts.model.decoder_layers = 1;
    opts.model.heads = 2;
    opts.model.ffn_width = 32;
    opts.model.grid = grid;
    opts.model.max_objects = 8;
    opts.model.vocab_size = vocab.size();
    opts.epochs = 12;
    opts.batch_size = 8;
    opts.learning_rate = 1e4;  // guaranteed blow-up
    opts.divergence_factor = 2.0;
    Model model(opts.model);
    std::vector<double> initial = model.params();
    TrainOutcome outcome = fit_model(model, prep, opts);
    CHECK(outcome.diverged);
    // parameters rolled back to a finite snapshot
    for (double v : model.params()) CHECK(std::isfinite(v));
  }
}

TEST_CASE("corpus evaluation") {
  Dataset ds = synth_toy_dataset(19, 30);
  MetricParams params;

  std::vector<Prediction> perfect;
  for (const DatasetRecord& rec : ds.records) {
    perfect.push_back({rec.id, rec.gt_layout});
  }

  SUBCASE("perfect predictions saturate the score") {
    EvalOutcome out = evaluate_predictions(ds, perfect, params, 1);
    REQUIRE(out.samples.size() == 30);
    CHECK(out.corpus.lqs == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(out.corpus.lr == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("empty predictions zero the recall") {
    std::vector<Prediction> empty;
    for (const DatasetRecord& rec : ds.records) {
      Prediction p;
      p.id = rec.id;
      p.layout.frame = rec.gt_layout.frame;
      empty.push_back(p);
    }
    EvalOutcome out = evaluate_predictions(ds, empty, params, 1);
    CHECK(out.corpus.lr == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("parallel evaluation is bit-identical to serial") {
    // give the scorer something nontrivial: shift every box a little
    std::vector<Prediction> jittered = perfect;
    for (std::size_t i = 0; i < jittered.size(); ++i) {
      for (LayoutObject& obj : jittered[i].layout.objects) {
        obj.bbox.x = std::min(obj.bbox.x + 3.0, 256.0 - obj.bbox.w / 2.0);
      }
    }
    EvalOutcome serial = evaluate_predictions(ds, jittered, params, 1);
    EvalOutcome fanned = evaluate_predictions(ds, jittered, params, 8);
    REQUIRE(serial.samples.size() == fanned.samples.size());
    for (std::size_t i = 0; i < serial.samples.size(); ++i) {
      CHECK(serial.samples[i].id == fanned.samples[i].id);
      CHECK(serial.samples[i].report.lqs == fanned.samples[i].report.lqs);
      CHECK(serial.samples[i].report.lc == fanned.samples[i].report.lc);
      CHECK(serial.samples[i].report.ac == fanned.samples[i].report.ac);
    }
    CHECK(serial.corpus.lqs == fanned.corpus.lqs);
  }

  SUBCASE("subset of predictions is allowed, unknown ids are not") {
    std::vector<Prediction> some = {perfect[0], perfect[5]};
    EvalOutcome out = evaluate_predictions(ds, some, params, 1);
    CHECK(out.samples.size() == 2);

    std::vector<Prediction> bad = {perfect[0]};
    bad[0].id = 99999;
    try {
      evaluate_predictions(ds, bad, params, 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("99999") != std::string::npos);
    }

    std::vector<Prediction> dup = {perfect[0], perfect[0]};
    CHECK_THROWS_AS(evaluate_predictions(ds, dup, params, 1), Error);
  }
}

TEST_CASE("svg rendering") {
  Dataset ds = synth_toy_dataset(23, 4);
  const Layout& layout = ds.records[0].gt_layout;

  SUBCASE("one rect per object and stable bytes") {
    std::string a = render_layout_svg(layout, ds.category_names);
    std::string b = render_layout_svg(layout, ds.category_names);
    CHECK(a == b);
    std::size_t rects = 0;
    for (std::size_t at = a.find("<rect"); at != std::string::npos;
         at = a.find("<rect", at + 1)) {
      ++rects;
    }
    CHECK(rects == layout.objects.size());
    CHECK(a.find("<svg") == 0);
    CHECK(a.find("</svg>") != std::string::npos);
  }

  SUBCASE("empty layout still gives a frame") {
    Layout empty;
    empty.frame = {256.0, 256.0};
    std::string svg = render_layout_svg(empty);
    CHECK(svg.find("<rect") == std::string::npos);
    CHECK(svg.find("<path") != std::string::npos);
  }

  SUBCASE("unknown categories fall back to numeric labels") {
    Layout l;
    l.frame = {256.0, 256.0};
    l.objects = {{42, {128.0, 128.0, 50.0, 50.0}}};
    std::string svg = render_layout_svg(l, ds.category_names);
    CHECK(svg.find(">42<") != std::string::npos);
  }

  SUBCASE("three objects make three rects") {
    Layout l;
    l.frame = {256.0, 256.0};
    l.objects = {{0, {50.0, 50.0, 40.0, 40.0}},
                 {1, {128.0, 128.0, 40.0, 40.0}},
                 {2, {200.0, 200.0, 40.0, 40.0}}};
    std::string svg = render_layout_svg(l, ds.category_names);
    std::size_t rects = 0;
    for (std::size_t at = svg.find("<rect"); at != std::string::npos;
         at = svg.find("<rect", at + 1)) {
      ++rects;
    }
    CHECK(rects == 3);
  }
}
