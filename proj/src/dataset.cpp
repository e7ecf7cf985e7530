#include "layoutkit/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "layoutkit/error.hpp"
#include "layoutkit/rng.hpp"
#include "wire.hpp"

namespace layoutkit {

namespace {

using nlohmann::json;

json parse_json_file(const std::string& path) {
  std::string text = wire::read_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    raise(ErrorCode::Parse, path + ": not valid JSON");
  }
  return j;
}

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object() || !obj.contains(name)) {
    raise(ErrorCode::Parse, where + ": missing field '" + name + "'");
  }
  return obj.at(name);
}

long long as_id(const json& v, const std::string& where) {
  if (!v.is_number_integer()) {
    raise(ErrorCode::Parse, where + ": expected an integer");
  }
  return v.get<long long>();
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) raise(ErrorCode::Parse, where + ": expected a number");
  return v.get<double>();
}

std::string as_text(const json& v, const std::string& where) {
  if (!v.is_string()) raise(ErrorCode::Parse, where + ": expected a string");
  return v.get<std::string>();
}

const json& as_list(const json& v, const std::string& where) {
  if (!v.is_array()) raise(ErrorCode::Parse, where + ": expected an array");
  return v;
}

void warn(std::vector<std::string>* sink, std::string message) {
  if (sink != nullptr) sink->push_back(std::move(message));
}

}  // namespace

Dataset ingest_annotations(const std::string& annotation_path,
                           const std::string& caption_path,
                           std::vector<std::string>* warnings) {
  json ann = parse_json_file(annotation_path);
  json cap = parse_json_file(caption_path);

  // image table
  std::map<long long, FrameSize> frames;
  const json& images = as_list(field(ann, "images", annotation_path), "images");
  for (std::size_t i = 0; i < images.size(); ++i) {
    std::string where = "images[" + std::to_string(i) + "]";
    long long id = as_id(field(images[i], "id", where), where + ".id");
    FrameSize frame;
    if (images[i].contains("width")) {
      frame.width = as_number(images[i]["width"], where + ".width");
    }
    if (images[i].contains("height")) {
      frame.height = as_number(images[i]["height"], where + ".height");
    }
    if (frame.width <= 0.0 || frame.height <= 0.0) {
      raise(ErrorCode::Parse, where + ": non-positive image size");
    }
    if (!frames.emplace(id, frame).second) {
      raise(ErrorCode::Parse, where + ".id: duplicate image id");
    }
  }

  // category table: declared list when present, otherwise derived from use
  std::map<long long, std::string> raw_categories;
  if (ann.contains("categories")) {
    const json& cats = as_list(ann["categories"], "categories");
    for (std::size_t i = 0; i < cats.size(); ++i) {
      std::string where = "categories[" + std::to_string(i) + "]";
      long long id = as_id(field(cats[i], "id", where), where + ".id");
      std::string name = cats[i].contains("name")
                             ? as_text(cats[i]["name"], where + ".name")
                             : std::to_string(id);
      if (!raw_categories.emplace(id, name).second) {
        raise(ErrorCode::Parse, where + ".id: duplicate category id");
      }
    }
  }

  struct RawBox {
    long long category = 0;
    double left = 0, top = 0, width = 0, height = 0;
  };
  std::map<long long, std::vector<RawBox>> boxes;
  const json& anns =
      as_list(field(ann, "annotations", annotation_path), "annotations");
  bool derive_categories = raw_categories.empty();
  for (std::size_t i = 0; i < anns.size(); ++i) {
    std::string where = "annotations[" + std::to_string(i) + "]";
    long long image_id = as_id(field(anns[i], "image_id", where), where + ".image_id");
    if (frames.find(image_id) == frames.end()) {
      raise(ErrorCode::Parse, where + ".image_id: unknown image");
    }
    long long category = as_id(field(anns[i], "category_id", where), where + ".category_id");
    if (derive_categories) {
      raw_categories.emplace(category, std::to_string(category));
    } else if (raw_categories.find(category) == raw_categories.end()) {
      raise(ErrorCode::Parse, where + ".category_id: unknown category");
    }
    const json& bbox = as_list(field(anns[i], "bbox", where), where + ".bbox");
    if (bbox.size() != 4) {
      raise(ErrorCode::Parse, where + ".bbox: expected 4 numbers");
    }
    RawBox rb;
    rb.category = category;
    rb.left = as_number(bbox[0], where + ".bbox[0]");
    rb.top = as_number(bbox[1], where + ".bbox[1]");
    rb.width = as_number(bbox[2], where + ".bbox[2]");
    rb.height = as_number(bbox[3], where + ".bbox[3]");
    boxes[image_id].push_back(rb);
  }

  // caption join keyed by image id, file order preserved
  std::map<long long, std::vector<std::string>> captions;
  const json& caps =
      as_list(field(cap, "annotations", caption_path), "annotations");
  for (std::size_t i = 0; i < caps.size(); ++i) {
    std::string where = "captions annotations[" + std::to_string(i) + "]";
    long long image_id = as_id(field(caps[i], "image_id", where), where + ".image_id");
    std::string text = as_text(field(caps[i], "caption", where), where + ".caption");
    if (frames.find(image_id) == frames.end()) {
      warn(warnings, "caption for unknown image " + std::to_string(image_id) +
                         " ignored");
      continue;
    }
    captions[image_id].push_back(std::move(text));
  }

  Dataset ds;
  for (const auto& [raw_id, name] : raw_categories) {
    ds.category_ids.push_back(raw_id);
    ds.category_names.push_back(name);
  }
  std::map<long long, int> dense;
  for (std::size_t i = 0; i < ds.category_ids.size(); ++i) {
    dense[ds.category_ids[i]] = static_cast<int>(i);
  }

  for (const auto& [image_id, frame] : frames) {
    auto cap_it = captions.find(image_id);
    if (cap_it == captions.end() || cap_it->second.empty()) {
      warn(warnings, "image " + std::to_string(image_id) +
                         " has no captions and was skipped");
      continue;
    }
    DatasetRecord rec;
    rec.id = image_id;
    rec.captions = cap_it->second;
    rec.gt_layout.frame = frame;
    auto box_it = boxes.find(image_id);
    if (box_it != boxes.end()) {
      for (const RawBox& rb : box_it->second) {
        double left = std::max(0.0, rb.left);
        double top = std::max(0.0, rb.top);
        double right = std::min(frame.width, rb.left + rb.width);
        double bottom = std::min(frame.height, rb.top + rb.height);
        if (right - left <= 0.0 || bottom - top <= 0.0) {
          warn(warnings, "degenerate box for image " +
                             std::to_string(image_id) + " dropped");
          continue;
        }
        LayoutObject obj;
        obj.category = dense.at(rb.category);
        obj.bbox = bbox_from_corner(left, top, right - left, bottom - top);
        rec.gt_layout.objects.push_back(obj);
      }
    }
    rec.gt_layout = canonicalize_layout(rec.gt_layout);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

void write_dataset(const Dataset& ds, const std::string& annotation_path,
                   const std::string& caption_path) {
  json ann;
  ann["images"] = json::array();
  ann["annotations"] = json::array();
  ann["categories"] = json::array();
  for (std::size_t i = 0; i < ds.category_ids.size(); ++i) {
    ann["categories"].push_back(
        {{"id", ds.category_ids[i]}, {"name", ds.category_names[i]}});
  }
  json cap;
  cap["annotations"] = json::array();
  for (const DatasetRecord& rec : ds.records) {
    const FrameSize& frame = rec.gt_layout.frame;
    ann["images"].push_back(
        {{"id", rec.id}, {"width", frame.width}, {"height", frame.height}});
    for (const LayoutObject& obj : rec.gt_layout.objects) {
      if (obj.category < 0 ||
          obj.category >= static_cast<int>(ds.category_ids.size())) {
        raise(ErrorCode::Bounds, "layout category outside the dataset table");
      }
      json entry;
      entry["image_id"] = rec.id;
      entry["category_id"] = ds.category_ids[static_cast<std::size_t>(obj.category)];
      entry["bbox"] = {obj.bbox.x - obj.bbox.w / 2.0,
                       obj.bbox.y - obj.bbox.h / 2.0, obj.bbox.w, obj.bbox.h};
      ann["annotations"].push_back(std::move(entry));
    }
    for (const std::string& text : rec.captions) {
      cap["annotations"].push_back({{"image_id", rec.id}, {"caption", text}});
    }
  }
  wire::write_file(annotation_path, ann.dump(2) + "\n");
  wire::write_file(caption_path, cap.dump(2) + "\n");
}

namespace {

// shapes in raw-id order; dense ids coincide because raw ids ascend
constexpr const char* kShapes[5] = {"circle", "diamond", "square", "star",
                                    "triangle"};

LayoutObject toy_object(int dense, int col, int row, double jx, double jy,
                        double size) {
  double cell = kCanonicalFrameSize / 7.0;
  LayoutObject obj;
  obj.category = dense;
  obj.bbox.x = (col + 0.5 + jx) * cell;
  obj.bbox.y = (row + 0.5 + jy) * cell;
  obj.bbox.w = size;
  obj.bbox.h = size;
  return obj;
}

}  // namespace

Dataset synth_toy_dataset(std::uint64_t seed, int size) {
  if (size < 1) raise(ErrorCode::InvalidArgument, "dataset size must be positive");
  Dataset ds;
  for (int i = 0; i < 5; ++i) {
    ds.category_ids.push_back(i + 1);
    ds.category_names.push_back(kShapes[i]);
  }
  Rng rng(seed);
  for (int i = 0; i < size; ++i) {
    int variant = rng.uniform_int(7);
    int a = rng.uniform_int(5);
    int b = (a + 1 + rng.uniform_int(4)) % 5;
    double jx1 = rng.uniform(-0.15, 0.15);
    double jy1 = rng.uniform(-0.15, 0.15);
    double jx2 = rng.uniform(-0.15, 0.15);
    double jy2 = rng.uniform(-0.15, 0.15);
    // the leading object is always strictly larger so serialization order
    // never depends on the jitter
    double s1 = 90.0 + rng.uniform(-2.0, 2.0);
    double s2 = 72.0 + rng.uniform(-2.0, 2.0);
    double s_big = 130.0 + rng.uniform(-2.0, 2.0);
    double s_small = 44.0 + rng.uniform(-2.0, 2.0);

    DatasetRecord rec;
    rec.id = i + 1;
    rec.gt_layout.frame = {kCanonicalFrameSize, kCanonicalFrameSize};
    const std::string na = kShapes[a];
    const std::string nb = kShapes[b];
    switch (variant) {
      case 0:
        rec.captions = {"a " + na + " above a " + nb,
                        "the " + nb + " is below the " + na};
        rec.gt_layout.objects = {toy_object(a, 3, 1, jx1, jy1, s1),
                                 toy_object(b, 3, 5, jx2, jy2, s2)};
        break;
      case 1:
        rec.captions = {"a " + na + " below a " + nb,
                        "the " + nb + " is above the " + na};
        rec.gt_layout.objects = {toy_object(a, 3, 5, jx1, jy1, s1),
                                 toy_object(b, 3, 1, jx2, jy2, s2)};
        break;
      case 2:
        rec.captions = {"a " + na + " left of a " + nb,
                        "the " + nb + " is right of the " + na};
        rec.gt_layout.objects = {toy_object(a, 1, 3, jx1, jy1, s1),
                                 toy_object(b, 5, 3, jx2, jy2, s2)};
        break;
      case 3:
        rec.captions = {"a " + na + " right of a " + nb,
                        "the " + nb + " is left of the " + na};
        rec.gt_layout.objects = {toy_object(a, 5, 3, jx1, jy1, s1),
                                 toy_object(b, 1, 3, jx2, jy2, s2)};
        break;
      case 4:
        rec.captions = {"two " + na, "a pair of " + na};
        rec.gt_layout.objects = {toy_object(a, 1, 3, jx1, jy1, s1),
                                 toy_object(a, 5, 3, jx2, jy2, s2)};
        break;
      case 5:
        rec.captions = {"a big " + na, "one large " + na};
        rec.gt_layout.objects = {toy_object(a, 3, 3, jx1, jy1, s_big)};
        break;
      default:
        rec.captions = {"a small " + na, "one tiny " + na};
        rec.gt_layout.objects = {toy_object(a, 3, 3, jx1, jy1, s_small)};
        break;
    }
    validate_layout(rec.gt_layout);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

void write_predictions(const std::string& path,
                       const std::vector<Prediction>& preds) {
  std::string out;
  for (const Prediction& p : preds) {
    json j;
    j["id"] = p.id;
    j["frame"] = {p.layout.frame.width, p.layout.frame.height};
    j["objects"] = json::array();
    for (const LayoutObject& obj : p.layout.objects) {
      j["objects"].push_back({{"category", obj.category},
                              {"x", obj.bbox.x},
                              {"y", obj.bbox.y},
                              {"w", obj.bbox.w},
                              {"h", obj.bbox.h}});
    }
    out += j.dump();
    out += '\n';
  }
  wire::write_file(path, out);
}

std::vector<Prediction> read_predictions(const std::string& path) {
  std::string text = wire::read_file(path);
  std::vector<Prediction> preds;
  std::istringstream lines(text);
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    if (line.empty()) continue;
    std::string where = path + " line " + std::to_string(number);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) raise(ErrorCode::Parse, where + ": not valid JSON");
    Prediction p;
    p.id = as_id(field(j, "id", where), where + ".id");
    const json& frame = as_list(field(j, "frame", where), where + ".frame");
    if (frame.size() != 2) {
      raise(ErrorCode::Parse, where + ".frame: expected 2 numbers");
    }
    p.layout.frame.width = as_number(frame[0], where + ".frame[0]");
    p.layout.frame.height = as_number(frame[1], where + ".frame[1]");
    const json& objects = as_list(field(j, "objects", where), where + ".objects");
    for (std::size_t k = 0; k < objects.size(); ++k) {
      std::string ow = where + ".objects[" + std::to_string(k) + "]";
      LayoutObject obj;
      obj.category = static_cast<int>(as_id(field(objects[k], "category", ow), ow + ".category"));
      obj.bbox.x = as_number(field(objects[k], "x", ow), ow + ".x");
      obj.bbox.y = as_number(field(objects[k], "y", ow), ow + ".y");
      obj.bbox.w = as_number(field(objects[k], "w", ow), ow + ".w");
      obj.bbox.h = as_number(field(objects[k], "h", ow), ow + ".h");
      p.layout.objects.push_back(obj);
    }
    validate_layout(p.layout);
    preds.push_back(std::move(p));
  }
  return preds;
}

}  // namespace layoutkit
