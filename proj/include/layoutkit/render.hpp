#pragma once

// static SVG rendering of layouts
#include <string>
#include <vector>

#include "layoutkit/geometry.hpp"

namespace layoutkit {

// Standalone SVG: frame outline, one rectangle plus label per object.
// Colors derive from the category id alone; ids beyond the name table get a
// numeric label. Output is byte-stable for equal inputs.
std::string render_layout_svg(const Layout& layout,
                              const std::vector<std::string>& category_names = {});

}  // namespace layoutkit
