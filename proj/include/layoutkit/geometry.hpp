#pragma once

#include <utility>
#include <vector>

#include "layoutkit/error.hpp"

namespace layoutkit {

// Every layout is eventually expressed on this square working frame.
inline constexpr double kCanonicalFrameSize = 256.0;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct FrameSize {
  double width = kCanonicalFrameSize;
  double height = kCanonicalFrameSize;

  double area() const { return width * height; }
};

// Axis-aligned box stored center-first: (x, y) is the center, (w, h) the size,
// all in frame pixels.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

struct LayoutObject {
  int category = 0;
  BBox bbox;
};

struct Layout {
  std::vector<LayoutObject> objects;
  FrameSize frame;
};

// Uniform S x S grid over a frame plus the category count; joint indices mix
// cell and category into a single class id.
struct GridSpec {
  int resolution = 7;
  int categories = 0;
  FrameSize frame;

  int joint_classes() const { return resolution * resolution * categories; }
};

struct GridCell {
  int gx = 0;
  int gy = 0;
};

Point bbox_center(const BBox& box);
double bbox_area(const BBox& box);

// Corner form (left, top, width, height) -> center form.
BBox bbox_from_corner(double left, double top, double width, double height);

bool bbox_valid(const BBox& box, const FrameSize& frame);
void validate_layout(const Layout& layout);

// Cell containing p; points on the far frame edge land in the last cell.
// Points outside the frame are an error.
GridCell grid_cell_of(Point p, const GridSpec& grid);

// (gy * S + gx) * C + category, row-major cells, categories innermost.
int joint_index_encode(GridCell cell, int category, const GridSpec& grid);
std::pair<GridCell, int> joint_index_decode(int value, const GridSpec& grid);

// Scale onto the 256 x 256 working frame. Identity for layouts already there.
Layout canonicalize_layout(const Layout& raw);

}  // namespace layoutkit
