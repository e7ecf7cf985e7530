#pragma once

// text-object alignment: attention pooling over word states, conditioning
// vectors, cosine consistency scores, and the batch contrastive loss
#include <cstdint>
#include <string>
#include <vector>

#include "layoutkit/geometry.hpp"
#include "layoutkit/model.hpp"
#include "layoutkit/tensor.hpp"

namespace layoutkit {

// raises on a zero vector: a silent 0 would mask upstream bugs
double cosine_similarity(const std::vector<double>& x,
                         const std::vector<double>& y);

struct PooledSemantics {
  std::vector<double> vector;   // attention-weighted sum of word states
  std::vector<double> weights;  // one weight per word, sums to 1
};

// weights = softmax over words of <word state, category row>
PooledSemantics object_text_attention(const Mat& word_states, int category,
                                      const Mat& category_table);

struct NoiseSpec {
  int image_dims = 4;
  int object_dims = 4;
  std::uint64_t seed = 1;
};

struct GlobalTextRep {
  std::vector<double> mean;       // average word state
  std::vector<double> embedding;  // mean followed by sampled image noise
};

GlobalTextRep global_text_rep(const Mat& word_states, const NoiseSpec& noise);

// one conditioning vector: pooled semantics, category row, then noise
std::vector<double> layout_conditioning(const std::vector<double>& pooled,
                                        int category,
                                        const Mat& category_table,
                                        const std::vector<double>& object_noise);

// whole-layout assembly; noise drawn in object order from the noise seed
std::vector<std::vector<double>> assemble_conditioning(
    const Mat& word_states, const std::vector<int>& categories,
    const Mat& category_table, const NoiseSpec& noise);

double object_consistency_score(
    const std::vector<std::vector<double>>& visual,
    const std::vector<std::vector<double>>& semantic);

double image_consistency_score(const std::vector<double>& image_feature,
                               const std::vector<double>& text_feature);

struct ContrastiveBreakdown {
  double total = 0.0;
  double object_term = 0.0;
  double image_term = 0.0;
};

// score matrices are row = text sample, column = image sample; the diagonal
// holds matched pairs and the softmax runs down each column
ContrastiveBreakdown contrastive_loss(const Mat& object_scores,
                                      const Mat& image_scores);

struct FeatureGrid {
  int rows = 0;
  int cols = 0;
  int channels = 0;
  std::vector<double> data;  // row-major, channel fastest
  FeatureGrid() = default;
  FeatureGrid(int r, int c, int ch);
  double& at(int r, int c, int ch);
  double at(int r, int c, int ch) const;
};

struct VisualFeatures {
  std::vector<std::vector<double>> objects;  // one vector per layout object
  std::vector<double> image;                 // whole-frame vector
};

// per-object vector = overlap-area-weighted average of grid cells under the
// box; the whole-frame vector is the plain mean over all cells
VisualFeatures region_feature_pool(const FeatureGrid& grid,
                                   const Layout& layout);

class VisualFeatureProvider {
 public:
  virtual ~VisualFeatureProvider() = default;
  virtual VisualFeatures features(const Layout& layout) const = 0;
};

// deterministic stand-in for a pretrained backbone: a seeded random grid
class SyntheticGridProvider : public VisualFeatureProvider {
 public:
  SyntheticGridProvider(int rows, int cols, int channels, std::uint64_t seed);
  const FeatureGrid& grid() const { return grid_; }
  VisualFeatures features(const Layout& layout) const override;

 private:
  FeatureGrid grid_;
};

void save_feature_grid(const std::string& path, const FeatureGrid& g);
FeatureGrid load_feature_grid(const std::string& path);

struct AlignSample {
  Mat word_states;              // text side, differentiated
  std::vector<int> categories;  // layout categories, one per object
  VisualFeatures visual;        // image side, held fixed
};

struct AlignBatchResult {
  ContrastiveBreakdown loss;
  Mat object_scores;  // row = text sample, column = image sample
  Mat image_scores;
  Mat category_grad;                  // same shape as the category table
  std::vector<Mat> word_state_grads;  // one per batch sample
};

AlignBatchResult alignment_loss(const std::vector<AlignSample>& batch,
                                const Mat& category_table,
                                bool with_grad = false);

GradCheckReport alignment_grad_check(std::vector<AlignSample> batch,
                                     Mat category_table,
                                     double epsilon = 1e-3);

}  // namespace layoutkit
