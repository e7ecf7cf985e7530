#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "layoutkit/geometry.hpp"
#include "layoutkit/rng.hpp"

using namespace layoutkit;

namespace {

// Independent oracle: scan cell intervals [k*W/S, (k+1)*W/S) left to right,
// far edge closed into the last cell.
int cell_scan_oracle(double v, double extent, int s) {
  for (int k = 0; k < s; ++k) {
    double lo = extent * k / s;
    double hi = extent * (k + 1) / s;
    bool last = (k == s - 1);
    if (v >= lo && (v < hi || (last && v <= hi))) return k;
  }
  return -1;
}

GridSpec coco_grid() { return GridSpec{7, 80, {256.0, 256.0}}; }

}  // namespace

TEST_CASE("bbox basics") {
  BBox b{10.0, 20.0, 4.0, 6.0};
  CHECK(bbox_center(b).x == 10.0);
  CHECK(bbox_center(b).y == 20.0);
  CHECK(bbox_area(b) == 24.0);

  BBox c = bbox_from_corner(8.0, 18.0, 4.0, 4.0);
  CHECK(c.x == doctest::Approx(10.0));
  CHECK(c.y == doctest::Approx(20.0));
  CHECK(c.w == 4.0);
  CHECK(c.h == 4.0);
}

TEST_CASE("bbox validity against the frame") {
  FrameSize frame{256.0, 256.0};
  CHECK(bbox_valid({128, 128, 10, 10}, frame));
  CHECK(bbox_valid({0, 0, 10, 10}, frame));      // center on the corner is fine
  CHECK(bbox_valid({256, 256, 10, 10}, frame));  // far corner too
  CHECK_FALSE(bbox_valid({128, 128, 0, 10}, frame));
  CHECK_FALSE(bbox_valid({128, 128, 10, -1}, frame));
  CHECK_FALSE(bbox_valid({-0.5, 128, 10, 10}, frame));
  CHECK_FALSE(bbox_valid({128, 300, 10, 10}, frame));
  CHECK_FALSE(bbox_valid({128, 128, 256, 257}, frame));  // area over the frame
}

TEST_CASE("grid cell lookup") {
  GridSpec grid = coco_grid();

  GridCell cell = grid_cell_of({128.0, 36.6}, grid);
  CHECK(cell.gx == 3);
  CHECK(cell.gy == 1);

  SUBCASE("matches the interval-scan oracle on a sweep") {
    Rng rng(99);
    for (int trial = 0; trial < 2000; ++trial) {
      double x = rng.uniform(0.0, 256.0);
      double y = rng.uniform(0.0, 256.0);
      GridCell got = grid_cell_of({x, y}, grid);
      CHECK(got.gx == cell_scan_oracle(x, 256.0, 7));
      CHECK(got.gy == cell_scan_oracle(y, 256.0, 7));
    }
  }

  SUBCASE("boundaries") {
    CHECK(grid_cell_of({0.0, 0.0}, grid).gx == 0);
    // far edge is owned by the last cell
    CHECK(grid_cell_of({256.0, 256.0}, grid).gx == 6);
    CHECK(grid_cell_of({256.0, 256.0}, grid).gy == 6);
    // interior boundary belongs to the right cell
    double boundary = 256.0 / 7.0;
    GridCell at = grid_cell_of({boundary, 0.0}, grid);
    CHECK(at.gx == cell_scan_oracle(boundary, 256.0, 7));
  }

  SUBCASE("gx is monotone in x") {
    int prev = 0;
    for (double x = 0.0; x <= 256.0; x += 0.25) {
      int gx = grid_cell_of({x, 10.0}, grid).gx;
      CHECK(gx >= prev);
      prev = gx;
    }
  }

  SUBCASE("outside the frame is an error") {
    CHECK_THROWS_AS(grid_cell_of({-1.0, 10.0}, grid), Error);
    CHECK_THROWS_AS(grid_cell_of({10.0, 257.0}, grid), Error);
    try {
      grid_cell_of({300.0, 0.0}, grid);
      FAIL("expected a throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::OutOfFrame);
    }
  }
}

TEST_CASE("joint index codec") {
  GridSpec grid = coco_grid();

  CHECK(joint_index_encode({3, 2}, 17, grid) == 1377);
  CHECK(joint_index_encode({0, 0}, 0, grid) == 0);
  CHECK(joint_index_encode({6, 6}, 79, grid) == 3919);

  SUBCASE("decode inverts encode over the whole space") {
    for (int v = 0; v < grid.joint_classes(); ++v) {
      auto [cell, cat] = joint_index_decode(v, grid);
      CHECK(joint_index_encode(cell, cat, grid) == v);
    }
  }

  SUBCASE("random grid shapes") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      GridSpec g{1 + rng.uniform_int(9), 1 + rng.uniform_int(120),
                 {256.0, 256.0}};
      for (int probe = 0; probe < 40; ++probe) {
        GridCell cell{rng.uniform_int(g.resolution),
                      rng.uniform_int(g.resolution)};
        int cat = rng.uniform_int(g.categories);
        int v = joint_index_encode(cell, cat, g);
        CHECK(v >= 0);
        CHECK(v < g.joint_classes());
        auto [cell2, cat2] = joint_index_decode(v, g);
        CHECK(cell2.gx == cell.gx);
        CHECK(cell2.gy == cell.gy);
        CHECK(cat2 == cat);
      }
    }
  }

  SUBCASE("bounds errors") {
    CHECK_THROWS_AS(joint_index_encode({7, 0}, 0, grid), Error);
    CHECK_THROWS_AS(joint_index_encode({0, -1}, 0, grid), Error);
    CHECK_THROWS_AS(joint_index_encode({0, 0}, 80, grid), Error);
    CHECK_THROWS_AS(joint_index_decode(-1, grid), Error);
    CHECK_THROWS_AS(joint_index_decode(3920, grid), Error);
  }
}

TEST_CASE("canonicalization") {
  SUBCASE("square frame scales uniformly") {
    Layout raw;
    raw.frame = {512.0, 512.0};
    raw.objects.push_back({3, {256.0, 64.0, 100.0, 50.0}});
    Layout canon = canonicalize_layout(raw);
    CHECK(canon.frame.width == 256.0);
    CHECK(canon.objects[0].bbox.x == doctest::Approx(128.0));
    CHECK(canon.objects[0].bbox.y == doctest::Approx(32.0));
    CHECK(canon.objects[0].bbox.w == doctest::Approx(50.0));
    CHECK(canon.objects[0].bbox.h == doctest::Approx(25.0));
  }

  SUBCASE("each axis scales independently") {
    Layout raw;
    raw.frame = {640.0, 480.0};
    raw.objects.push_back({0, {320.0, 240.0, 64.0, 48.0}});
    Layout canon = canonicalize_layout(raw);
    CHECK(canon.objects[0].bbox.x == doctest::Approx(128.0));
    CHECK(canon.objects[0].bbox.y == doctest::Approx(128.0));
    CHECK(canon.objects[0].bbox.w == doctest::Approx(25.6));
    CHECK(canon.objects[0].bbox.h == doctest::Approx(25.6));
  }

  SUBCASE("already canonical layouts pass through bit-identical") {
    Layout raw;
    raw.frame = {256.0, 256.0};
    raw.objects.push_back({1, {101.25, 77.125, 31.5, 14.0625}});
    Layout canon = canonicalize_layout(raw);
    CHECK(canon.objects[0].bbox.x == raw.objects[0].bbox.x);
    CHECK(canon.objects[0].bbox.y == raw.objects[0].bbox.y);
    CHECK(canon.objects[0].bbox.w == raw.objects[0].bbox.w);
    CHECK(canon.objects[0].bbox.h == raw.objects[0].bbox.h);
  }

  SUBCASE("area ratios survive when aspect is preserved") {
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
      double scale = rng.uniform(0.3, 4.0);
      Layout raw;
      raw.frame = {256.0 * scale, 256.0 * scale};
      for (int i = 0; i < 3; ++i) {
        double w = rng.uniform(5.0, 60.0) * scale;
        double h = rng.uniform(5.0, 60.0) * scale;
        raw.objects.push_back({i,
                               {rng.uniform(w / 2, raw.frame.width - w / 2),
                                rng.uniform(h / 2, raw.frame.height - h / 2),
                                w, h}});
      }
      Layout canon = canonicalize_layout(raw);
      double raw_ratio = bbox_area(raw.objects[0].bbox) /
                         bbox_area(raw.objects[1].bbox);
      double canon_ratio = bbox_area(canon.objects[0].bbox) /
                           bbox_area(canon.objects[1].bbox);
      CHECK(canon_ratio == doctest::Approx(raw_ratio).epsilon(1e-9));
      for (const LayoutObject& obj : canon.objects)
        CHECK(bbox_valid(obj.bbox, canon.frame));
    }
  }

  SUBCASE("degenerate frame is an error") {
    Layout raw;
    raw.frame = {0.0, 256.0};
    CHECK_THROWS_AS(canonicalize_layout(raw), Error);
  }
}

TEST_CASE("layout validation") {
  Layout ok;
  ok.frame = {256.0, 256.0};
  ok.objects.push_back({5, {10, 10, 4, 4}});
  CHECK_NOTHROW(validate_layout(ok));

  Layout bad = ok;
  bad.objects.push_back({-1, {10, 10, 4, 4}});
  CHECK_THROWS_AS(validate_layout(bad), Error);

  Layout bad2 = ok;
  bad2.objects[0].bbox.w = -3.0;
  CHECK_THROWS_AS(validate_layout(bad2), Error);
}
