#include "layoutkit/render.hpp"

#include <cstdio>

#include "layoutkit/error.hpp"

namespace layoutkit {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_layout_svg(const Layout& layout,
                              const std::vector<std::string>& category_names) {
  validate_layout(layout);
  const FrameSize& frame = layout.frame;
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         num(frame.width) + "\" height=\"" + num(frame.height) +
         "\" viewBox=\"0 0 " + num(frame.width) + " " + num(frame.height) +
         "\">\n";
  svg += "<path d=\"M0 0 H" + num(frame.width) + " V" + num(frame.height) +
         " H0 Z\" fill=\"#ffffff\" stroke=\"#333333\"/>\n";
  for (const LayoutObject& obj : layout.objects) {
    int hue = (obj.category * 137) % 360;
    std::string fill = "hsl(" + std::to_string(hue) + ",70%,80%)";
    std::string stroke = "hsl(" + std::to_string(hue) + ",70%,35%)";
    double left = obj.bbox.x - obj.bbox.w / 2.0;
    double top = obj.bbox.y - obj.bbox.h / 2.0;
    svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" +
           num(obj.bbox.w) + "\" height=\"" + num(obj.bbox.h) + "\" fill=\"" +
           fill + "\" fill-opacity=\"0.6\" stroke=\"" + stroke + "\"/>\n";
    std::string label =
        obj.category >= 0 &&
                obj.category < static_cast<int>(category_names.size())
            ? category_names[static_cast<std::size_t>(obj.category)]
            : std::to_string(obj.category);
    svg += "<text x=\"" + num(left + 2.0) + "\" y=\"" + num(top + 11.0) +
           "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"" + stroke +
           "\">" + escape(label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace layoutkit
