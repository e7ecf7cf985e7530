#include "layoutkit/geometry.hpp"

#include <cmath>
#include <string>

namespace layoutkit {

Point bbox_center(const BBox& box) { return {box.x, box.y}; }

double bbox_area(const BBox& box) { return box.w * box.h; }

BBox bbox_from_corner(double left, double top, double width, double height) {
  return {left + width / 2.0, top + height / 2.0, width, height};
}

bool bbox_valid(const BBox& box, const FrameSize& frame) {
  if (!(box.w > 0.0) || !(box.h > 0.0)) return false;
  if (!(box.x >= 0.0 && box.x <= frame.width)) return false;
  if (!(box.y >= 0.0 && box.y <= frame.height)) return false;
  return box.w * box.h <= frame.area();
}

void validate_layout(const Layout& layout) {
  if (!(layout.frame.width > 0.0) || !(layout.frame.height > 0.0))
    raise(ErrorCode::Degenerate, "layout frame has non-positive size");
  for (size_t i = 0; i < layout.objects.size(); ++i) {
    const LayoutObject& obj = layout.objects[i];
    if (obj.category < 0)
      raise(ErrorCode::Bounds,
            "object " + std::to_string(i) + " has negative category");
    if (!bbox_valid(obj.bbox, layout.frame))
      raise(ErrorCode::InvalidArgument,
            "object " + std::to_string(i) + " has an invalid box");
  }
}

GridCell grid_cell_of(Point p, const GridSpec& grid) {
  if (!(p.x >= 0.0 && p.x <= grid.frame.width && p.y >= 0.0 &&
        p.y <= grid.frame.height))
    raise(ErrorCode::OutOfFrame, "point (" + std::to_string(p.x) + ", " +
                                     std::to_string(p.y) +
                                     ") lies outside the frame");
  int s = grid.resolution;
  int gx = static_cast<int>(std::floor(p.x * s / grid.frame.width));
  int gy = static_cast<int>(std::floor(p.y * s / grid.frame.height));
  if (gx >= s) gx = s - 1;  // far edge belongs to the last cell
  if (gy >= s) gy = s - 1;
  return {gx, gy};
}

int joint_index_encode(GridCell cell, int category, const GridSpec& grid) {
  int s = grid.resolution;
  int c = grid.categories;
  if (cell.gx < 0 || cell.gx >= s || cell.gy < 0 || cell.gy >= s)
    raise(ErrorCode::Bounds, "grid cell (" + std::to_string(cell.gx) + ", " +
                                 std::to_string(cell.gy) + ") outside " +
                                 std::to_string(s) + "x" + std::to_string(s));
  if (category < 0 || category >= c)
    raise(ErrorCode::Bounds,
          "category " + std::to_string(category) + " outside [0, " +
              std::to_string(c) + ")");
  return (cell.gy * s + cell.gx) * c + category;
}

std::pair<GridCell, int> joint_index_decode(int value, const GridSpec& grid) {
  if (value < 0 || value >= grid.joint_classes())
    raise(ErrorCode::Bounds, "joint index " + std::to_string(value) +
                                 " outside [0, " +
                                 std::to_string(grid.joint_classes()) + ")");
  int c = grid.categories;
  int category = value % c;
  int cell_index = value / c;
  GridCell cell{cell_index % grid.resolution, cell_index / grid.resolution};
  return {cell, category};
}

Layout canonicalize_layout(const Layout& raw) {
  if (!(raw.frame.width > 0.0) || !(raw.frame.height > 0.0))
    raise(ErrorCode::Degenerate, "cannot canonicalize a degenerate frame");
  double sx = kCanonicalFrameSize / raw.frame.width;
  double sy = kCanonicalFrameSize / raw.frame.height;
  Layout out;
  out.frame = {kCanonicalFrameSize, kCanonicalFrameSize};
  out.objects.reserve(raw.objects.size());
  for (const LayoutObject& obj : raw.objects) {
    out.objects.push_back(
        {obj.category,
         {obj.bbox.x * sx, obj.bbox.y * sy, obj.bbox.w * sx, obj.bbox.h * sy}});
  }
  return out;
}

}  // namespace layoutkit
