#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "layoutkit/geometry.hpp"

namespace layoutkit {

// Lowercased alphanumeric runs; everything else separates words.
std::vector<std::string> split_words(const std::string& text);

// Word ids are dense. Four reserved slots, then corpus words ordered by
// descending frequency with lexicographic tie-break.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kSep = 2;
  static constexpr int kUnk = 3;

  static Vocab build(const std::vector<std::string>& texts);
  static Vocab load(const std::string& path);
  void save(const std::string& path) const;

  int lookup(const std::string& word) const;  // kUnk for unknown words
  int size() const { return static_cast<int>(id_to_word_.size()); }
  const std::string& word(int id) const;

 private:
  std::vector<std::string> id_to_word_;
  std::unordered_map<std::string, int> word_to_id_;
};

// Flattened layout: joint tokens terminated by one end marker, plus one
// in-cell regression target per object token. fx/fy are the fractional
// position of the center inside its cell, fw/fh the box size as a fraction
// of the frame.
struct TargetSequence {
  struct Regression {
    double fx = 0.0;
    double fy = 0.0;
    double fw = 0.0;
    double fh = 0.0;
  };
  std::vector<int> tokens;
  std::vector<Regression> regressions;
};

// One id past the joint classes ends a sequence; the next one starts decoding.
int end_token(const GridSpec& grid);
int begin_token(const GridSpec& grid);

// Objects are serialized largest-area first; ties fall back to category id,
// then raster order of the center cell, then the raw box values.
TargetSequence layout_to_sequence(const Layout& layout, const GridSpec& grid,
                                  int max_objects = 16);
Layout sequence_to_layout(const TargetSequence& seq, const GridSpec& grid);

struct Span {
  int begin = 0;
  int end = 0;  // exclusive
};

struct TokenizedCaptions {
  std::vector<int> ids;        // words with one separator between captions
  std::vector<Span> captions;  // word spans, separators excluded
};

TokenizedCaptions tokenize_captions(const std::vector<std::string>& captions,
                                    const Vocab& vocab);

// Symmetric 0/1 mask; ones inside each caption block, separators see only
// themselves.
struct AttentionMask {
  int size = 0;
  std::vector<uint8_t> visible;

  bool at(int i, int j) const {
    return visible[static_cast<size_t>(i) * size + j] != 0;
  }
};

AttentionMask build_multicaption_mask(int token_count,
                                      const std::vector<Span>& captions);

}  // namespace layoutkit
