#include "layoutkit/sequence.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

namespace layoutkit {

namespace {

const char* kReservedWords[] = {"<pad>", "<bos>", "<sep>", "<unk>"};

// Largest fraction strictly below 1; keeps in-cell offsets inside [0, 1)
// even for centers sitting on the far frame edge.
const double kAlmostOne = std::nextafter(1.0, 0.0);

}  // namespace

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    unsigned char u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

Vocab Vocab::build(const std::vector<std::string>& texts) {
  std::map<std::string, int64_t> freq;
  for (const std::string& text : texts)
    for (const std::string& word : split_words(text)) ++freq[word];

  std::vector<std::pair<std::string, int64_t>> entries(freq.begin(),
                                                       freq.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocab vocab;
  for (const char* reserved : kReservedWords)
    vocab.id_to_word_.emplace_back(reserved);
  for (auto& [word, count] : entries) vocab.id_to_word_.push_back(word);
  for (int id = 0; id < vocab.size(); ++id)
    vocab.word_to_id_[vocab.id_to_word_[id]] = id;
  return vocab;
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::Io, "cannot open vocabulary file " + path);
  Vocab vocab;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      raise(ErrorCode::Parse, path + ":" + std::to_string(line_no) +
                                  ": expected word<TAB>id");
    std::string word = line.substr(0, tab);
    int id = 0;
    try {
      id = std::stoi(line.substr(tab + 1));
    } catch (const std::exception&) {
      raise(ErrorCode::Parse, path + ":" + std::to_string(line_no) +
                                  ": id is not an integer");
    }
    if (id != static_cast<int>(vocab.id_to_word_.size()))
      raise(ErrorCode::Parse, path + ":" + std::to_string(line_no) +
                                  ": ids must be dense and ascending");
    vocab.id_to_word_.push_back(word);
  }
  if (vocab.size() < 4)
    raise(ErrorCode::Parse, path + ": missing reserved entries");
  for (int i = 0; i < 4; ++i)
    if (vocab.id_to_word_[i] != kReservedWords[i])
      raise(ErrorCode::Parse, path + ": reserved slot " + std::to_string(i) +
                                  " must be " + kReservedWords[i]);
  for (int id = 0; id < vocab.size(); ++id)
    vocab.word_to_id_[vocab.id_to_word_[id]] = id;
  return vocab;
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::Io, "cannot write vocabulary file " + path);
  for (int id = 0; id < size(); ++id)
    out << id_to_word_[id] << '\t' << id << '\n';
  if (!out) raise(ErrorCode::Io, "short write to " + path);
}

int Vocab::lookup(const std::string& word) const {
  auto it = word_to_id_.find(word);
  return it == word_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocab::word(int id) const {
  if (id < 0 || id >= size())
    raise(ErrorCode::Bounds, "word id " + std::to_string(id) +
                                 " outside vocabulary of " +
                                 std::to_string(size()));
  return id_to_word_[id];
}

int end_token(const GridSpec& grid) { return grid.joint_classes(); }
int begin_token(const GridSpec& grid) { return grid.joint_classes() + 1; }

TargetSequence layout_to_sequence(const Layout& layout, const GridSpec& grid,
                                  int max_objects) {
  if (layout.frame.width != grid.frame.width ||
      layout.frame.height != grid.frame.height)
    raise(ErrorCode::InvalidArgument,
          "layout frame does not match the grid frame");
  if (static_cast<int>(layout.objects.size()) > max_objects)
    raise(ErrorCode::Capacity,
          "layout has " + std::to_string(layout.objects.size()) +
              " objects; limit is " + std::to_string(max_objects));
  for (const LayoutObject& obj : layout.objects) {
    if (!bbox_valid(obj.bbox, layout.frame) ||
        obj.bbox.w > layout.frame.width || obj.bbox.h > layout.frame.height)
      raise(ErrorCode::InvalidArgument,
            "object box does not fit the frame");
  }

  std::vector<int> order(layout.objects.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  auto sort_key = [&](int i) {
    const LayoutObject& o = layout.objects[i];
    GridCell cell = grid_cell_of(bbox_center(o.bbox), grid);
    return std::make_tuple(-bbox_area(o.bbox), o.category,
                           cell.gy * grid.resolution + cell.gx, o.bbox.x,
                           o.bbox.y, o.bbox.w, o.bbox.h);
  };
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return sort_key(a) < sort_key(b); });

  TargetSequence seq;
  for (int idx : order) {
    const LayoutObject& o = layout.objects[idx];
    GridCell cell = grid_cell_of(bbox_center(o.bbox), grid);
    seq.tokens.push_back(joint_index_encode(cell, o.category, grid));
    TargetSequence::Regression reg;
    reg.fx = std::clamp(
        o.bbox.x * grid.resolution / grid.frame.width - cell.gx, 0.0,
        kAlmostOne);
    reg.fy = std::clamp(
        o.bbox.y * grid.resolution / grid.frame.height - cell.gy, 0.0,
        kAlmostOne);
    reg.fw = o.bbox.w / grid.frame.width;
    reg.fh = o.bbox.h / grid.frame.height;
    seq.regressions.push_back(reg);
  }
  seq.tokens.push_back(end_token(grid));
  return seq;
}

Layout sequence_to_layout(const TargetSequence& seq, const GridSpec& grid) {
  Layout layout;
  layout.frame = grid.frame;
  int eos = end_token(grid);
  size_t reg_index = 0;
  bool ended = false;
  for (int token : seq.tokens) {
    if (token == eos) {
      ended = true;
      break;
    }
    if (token < 0 || token >= grid.joint_classes())
      raise(ErrorCode::Parse,
            "token " + std::to_string(token) + " is not an object token");
    if (reg_index >= seq.regressions.size())
      raise(ErrorCode::Parse, "more object tokens than regression entries");
    auto [cell, category] = joint_index_decode(token, grid);
    const TargetSequence::Regression& reg = seq.regressions[reg_index++];
    double cell_w = grid.frame.width / grid.resolution;
    double cell_h = grid.frame.height / grid.resolution;
    BBox box;
    box.x = (cell.gx + reg.fx) * cell_w;
    box.y = (cell.gy + reg.fy) * cell_h;
    box.w = reg.fw * grid.frame.width;
    box.h = reg.fh * grid.frame.height;
    layout.objects.push_back({category, box});
  }
  if (!ended)
    raise(ErrorCode::Parse, "sequence is missing its end marker");
  return layout;
}

TokenizedCaptions tokenize_captions(const std::vector<std::string>& captions,
                                    const Vocab& vocab) {
  if (captions.empty())
    raise(ErrorCode::InvalidArgument, "caption list is empty");
  TokenizedCaptions out;
  for (size_t c = 0; c < captions.size(); ++c) {
    if (c > 0) out.ids.push_back(Vocab::kSep);
    Span span;
    span.begin = static_cast<int>(out.ids.size());
    for (const std::string& word : split_words(captions[c]))
      out.ids.push_back(vocab.lookup(word));
    span.end = static_cast<int>(out.ids.size());
    out.captions.push_back(span);
  }
  return out;
}

AttentionMask build_multicaption_mask(int token_count,
                                      const std::vector<Span>& captions) {
  if (token_count < 0)
    raise(ErrorCode::InvalidArgument, "negative token count");
  AttentionMask mask;
  mask.size = token_count;
  mask.visible.assign(static_cast<size_t>(token_count) * token_count, 0);

  std::vector<Span> sorted = captions;
  std::sort(sorted.begin(), sorted.end(),
            [](const Span& a, const Span& b) { return a.begin < b.begin; });
  int covered_until = 0;
  for (const Span& span : sorted) {
    if (span.begin > span.end || span.begin < 0 || span.end > token_count)
      raise(ErrorCode::Bounds, "caption span outside the token range");
    if (span.begin < covered_until && span.begin < span.end)
      raise(ErrorCode::InvalidArgument, "caption spans overlap");
    covered_until = std::max(covered_until, span.end);
    for (int i = span.begin; i < span.end; ++i)
      for (int j = span.begin; j < span.end; ++j)
        mask.visible[static_cast<size_t>(i) * token_count + j] = 1;
  }
  // Positions outside every span (separators) see only themselves; the
  // diagonal is all ones either way.
  for (int i = 0; i < token_count; ++i)
    mask.visible[static_cast<size_t>(i) * token_count + i] = 1;
  return mask;
}

}  // namespace layoutkit
