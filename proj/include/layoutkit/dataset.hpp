#pragma once

// corpus plumbing: annotation ingest, toy-grammar synthesis, and the
// line-oriented prediction exchange file
#include <cstdint>
#include <string>
#include <vector>

#include "layoutkit/geometry.hpp"

namespace layoutkit {

struct DatasetRecord {
  long long id = 0;
  std::vector<std::string> captions;  // at least one
  Layout gt_layout;                   // canonical frame
};

struct Dataset {
  std::vector<DatasetRecord> records;       // ascending id
  std::vector<long long> category_ids;     // dense index -> raw id, ascending
  std::vector<std::string> category_names;  // parallel to category_ids
  int categories() const { return static_cast<int>(category_ids.size()); }
};

// Annotation schema: {"images":[{"id",("width","height")}],
//   "annotations":[{"image_id","category_id","bbox":[left,top,w,h]}],
//   "categories":[{"id","name"}] (optional)}.
// Caption schema: {"annotations":[{"image_id","caption"}]}.
// Corner boxes become center form, get clipped to the image frame, and the
// layout is scaled to the canonical frame. Category ids become dense indices
// by ascending raw id. Images without captions are skipped with a warning;
// degenerate boxes are dropped with a warning.
Dataset ingest_annotations(const std::string& annotation_path,
                           const std::string& caption_path,
                           std::vector<std::string>* warnings = nullptr);

// Emits the exact schema ingest_annotations consumes; re-ingesting gives
// equal records.
void write_dataset(const Dataset& ds, const std::string& annotation_path,
                   const std::string& caption_path);

// Fixed grammar over five shapes: "a A above|below a B", "a A left|right of
// a B", "two A", "a big|small A". Layouts satisfy the stated relation by
// construction; identical seeds give identical datasets.
Dataset synth_toy_dataset(std::uint64_t seed, int size);

struct Prediction {
  long long id = 0;
  Layout layout;
};

// One JSON object per line: {"id":..,"frame":[w,h],"objects":[{"category":..,
// "x":..,"y":..,"w":..,"h":..}]}.
void write_predictions(const std::string& path,
                       const std::vector<Prediction>& preds);
std::vector<Prediction> read_predictions(const std::string& path);

}  // namespace layoutkit
