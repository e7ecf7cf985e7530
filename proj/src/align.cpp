#include "layoutkit/align.hpp"

#include <algorithm>
#include <cmath>

#include "layoutkit/error.hpp"
#include "layoutkit/rng.hpp"
#include "layoutkit/tensor_io.hpp"

namespace layoutkit {

namespace {

double norm_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot_of(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void check_category(int category, const Mat& table) {
  if (category < 0 || category >= table.rows) {
    raise(ErrorCode::Bounds, "category id outside the embedding table");
  }
}

std::vector<double> mean_rows(const Mat& m) {
  std::vector<double> out(static_cast<std::size_t>(m.cols), 0.0);
  for (int r = 0; r < m.rows; ++r) {
    const double* row = m.row(r);
    for (int c = 0; c < m.cols; ++c) out[static_cast<std::size_t>(c)] += row[c];
  }
  for (double& v : out) v /= m.rows;
  return out;
}

// mean of −log(column softmax at the diagonal), stabilised per column
double column_nll(const Mat& s) {
  int n = s.rows;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    double best = s(0, k);
    for (int i = 1; i < n; ++i) best = std::max(best, s(i, k));
    double denom = 0.0;
    for (int i = 0; i < n; ++i) denom += std::exp(s(i, k) - best);
    acc += std::log(denom) + best - s(k, k);
  }
  return acc / n;
}

// d(column_nll)/dS = (softmax per column − identity) / n
Mat column_nll_grad(const Mat& s) {
  int n = s.rows;
  Mat g(n, n);
  for (int k = 0; k < n; ++k) {
    double best = s(0, k);
    for (int i = 1; i < n; ++i) best = std::max(best, s(i, k));
    double denom = 0.0;
    for (int i = 0; i < n; ++i) denom += std::exp(s(i, k) - best);
    for (int i = 0; i < n; ++i) {
      g(i, k) = std::exp(s(i, k) - best) / denom / n;
    }
    g(k, k) -= 1.0 / n;
  }
  return g;
}

}  // namespace

double cosine_similarity(const std::vector<double>& x,
                         const std::vector<double>& y) {
  if (x.size() != y.size()) {
    raise(ErrorCode::InvalidArgument, "cosine needs equal-length vectors");
  }
  if (x.empty()) raise(ErrorCode::InvalidArgument, "cosine of empty vectors");
  double nx = norm_of(x);
  double ny = norm_of(y);
  if (nx == 0.0 || ny == 0.0) {
    raise(ErrorCode::Numeric, "cosine of a zero vector is undefined");
  }
  return dot_of(x, y) / (nx * ny);
}

PooledSemantics object_text_attention(const Mat& word_states, int category,
                                      const Mat& category_table) {
  if (word_states.rows < 1) {
    raise(ErrorCode::InvalidArgument, "attention needs at least one word state");
  }
  if (word_states.cols != category_table.cols) {
    raise(ErrorCode::InvalidArgument,
          "word-state width does not match the category embedding width");
  }
  check_category(category, category_table);

  int tokens = word_states.rows;
  int d = word_states.cols;
  const double* u = category_table.row(category);

  std::vector<double> logits(static_cast<std::size_t>(tokens));
  for (int t = 0; t < tokens; ++t) {
    const double* z = word_states.row(t);
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += z[j] * u[j];
    logits[static_cast<std::size_t>(t)] = s;
  }
  double best = *std::max_element(logits.begin(), logits.end());
  PooledSemantics out;
  out.weights.resize(static_cast<std::size_t>(tokens));
  double denom = 0.0;
  for (int t = 0; t < tokens; ++t) {
    double e = std::exp(logits[static_cast<std::size_t>(t)] - best);
    out.weights[static_cast<std::size_t>(t)] = e;
    denom += e;
  }
  for (double& w : out.weights) w /= denom;

  out.vector.assign(static_cast<std::size_t>(d), 0.0);
  for (int t = 0; t < tokens; ++t) {
    const double* z = word_states.row(t);
    double w = out.weights[static_cast<std::size_t>(t)];
    for (int j = 0; j < d; ++j) out.vector[static_cast<std::size_t>(j)] += w * z[j];
  }
  return out;
}

GlobalTextRep global_text_rep(const Mat& word_states, const NoiseSpec& noise) {
  if (word_states.rows < 1) {
    raise(ErrorCode::InvalidArgument, "global text pooling needs word states");
  }
  if (noise.image_dims < 0) {
    raise(ErrorCode::InvalidArgument, "noise dimension cannot be negative");
  }
  GlobalTextRep rep;
  rep.mean = mean_rows(word_states);
  rep.embedding = rep.mean;
  Rng rng(noise.seed);
  for (int k = 0; k < noise.image_dims; ++k) rep.embedding.push_back(rng.normal());
  return rep;
}

std::vector<double> layout_conditioning(
    const std::vector<double>& pooled, int category, const Mat& category_table,
    const std::vector<double>& object_noise) {
  check_category(category, category_table);
  if (static_cast<int>(pooled.size()) != category_table.cols) {
    raise(ErrorCode::InvalidArgument,
          "pooled semantics width does not match the category embedding width");
  }
  std::vector<double> out = pooled;
  const double* u = category_table.row(category);
  out.insert(out.end(), u, u + category_table.cols);
  out.insert(out.end(), object_noise.begin(), object_noise.end());
  return out;
}

std::vector<std::vector<double>> assemble_conditioning(
    const Mat& word_states, const std::vector<int>& categories,
    const Mat& category_table, const NoiseSpec& noise) {
  if (noise.object_dims < 0) {
    raise(ErrorCode::InvalidArgument, "noise dimension cannot be negative");
  }
  Rng rng(noise.seed);
  std::vector<std::vector<double>> out;
  out.reserve(categories.size());
  for (int c : categories) {
    PooledSemantics pooled = object_text_attention(word_states, c, category_table);
    std::vector<double> n(static_cast<std::size_t>(noise.object_dims));
    for (double& v : n) v = rng.normal();
    out.push_back(layout_conditioning(pooled.vector, c, category_table, n));
  }
  return out;
}

double object_consistency_score(
    const std::vector<std::vector<double>>& visual,
    const std::vector<std::vector<double>>& semantic) {
  if (visual.empty() || visual.size() != semantic.size()) {
    raise(ErrorCode::InvalidArgument,
          "need matching non-empty visual and semantic feature lists");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < visual.size(); ++k) {
    sum += std::exp(cosine_similarity(visual[k], semantic[k]));
  }
  return std::log(sum);
}

double image_consistency_score(const std::vector<double>& image_feature,
                               const std::vector<double>& text_feature) {
  return cosine_similarity(image_feature, text_feature);
}

ContrastiveBreakdown contrastive_loss(const Mat& object_scores,
                                      const Mat& image_scores) {
  if (object_scores.rows != object_scores.cols ||
      !object_scores.same_shape(image_scores)) {
    raise(ErrorCode::InvalidArgument, "score matrices must be square and equal");
  }
  if (object_scores.rows < 2) {
    raise(ErrorCode::Degenerate,
          "contrastive loss needs at least two samples to contrast");
  }
  ContrastiveBreakdown out;
  out.object_term = column_nll(object_scores);
  out.image_term = column_nll(image_scores);
  out.total = out.object_term + out.image_term;
  return out;
}

FeatureGrid::FeatureGrid(int r, int c, int ch) : rows(r), cols(c), channels(ch) {
  if (r <= 0 || c <= 0 || ch <= 0) {
    raise(ErrorCode::InvalidArgument, "feature grid needs positive extents");
  }
  data.assign(static_cast<std::size_t>(r) * static_cast<std::size_t>(c) *
                  static_cast<std::size_t>(ch),
              0.0);
}

double& FeatureGrid::at(int r, int c, int ch) {
  return data[(static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
               static_cast<std::size_t>(c)) *
                  static_cast<std::size_t>(channels) +
              static_cast<std::size_t>(ch)];
}

double FeatureGrid::at(int r, int c, int ch) const {
  return data[(static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
               static_cast<std::size_t>(c)) *
                  static_cast<std::size_t>(channels) +
              static_cast<std::size_t>(ch)];
}

VisualFeatures region_feature_pool(const FeatureGrid& grid,
                                   const Layout& layout) {
  if (grid.rows <= 0 || grid.cols <= 0 || grid.channels <= 0) {
    raise(ErrorCode::InvalidArgument, "feature grid has no extent");
  }
  validate_layout(layout);

  VisualFeatures out;
  std::size_t ch = static_cast<std::size_t>(grid.channels);
  out.image.assign(ch, 0.0);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      for (int k = 0; k < grid.channels; ++k) {
        out.image[static_cast<std::size_t>(k)] += grid.at(r, c, k);
      }
    }
  }
  double cells = static_cast<double>(grid.rows) * grid.cols;
  for (double& v : out.image) v /= cells;

  double cell_w = layout.frame.width / grid.cols;
  double cell_h = layout.frame.height / grid.rows;
  for (const LayoutObject& obj : layout.objects) {
    double x0 = obj.bbox.x - obj.bbox.w / 2.0;
    double x1 = obj.bbox.x + obj.bbox.w / 2.0;
    double y0 = obj.bbox.y - obj.bbox.h / 2.0;
    double y1 = obj.bbox.y + obj.bbox.h / 2.0;
    std::vector<double> acc(ch, 0.0);
    double total = 0.0;
    for (int r = 0; r < grid.rows; ++r) {
      double cy0 = r * cell_h;
      double cy1 = cy0 + cell_h;
      double oy = std::min(y1, cy1) - std::max(y0, cy0);
      if (oy <= 0.0) continue;
      for (int c = 0; c < grid.cols; ++c) {
        double cx0 = c * cell_w;
        double cx1 = cx0 + cell_w;
        double ox = std::min(x1, cx1) - std::max(x0, cx0);
        if (ox <= 0.0) continue;
        double area = ox * oy;
        total += area;
        for (int k = 0; k < grid.channels; ++k) {
          acc[static_cast<std::size_t>(k)] += area * grid.at(r, c, k);
        }
      }
    }
    if (total <= 0.0) {
      raise(ErrorCode::OutOfFrame, "box does not overlap the feature grid");
    }
    for (double& v : acc) v /= total;
    out.objects.push_back(std::move(acc));
  }
  return out;
}

SyntheticGridProvider::SyntheticGridProvider(int rows, int cols, int channels,
                                             std::uint64_t seed)
    : grid_(rows, cols, channels) {
  Rng rng(seed);
  for (double& v : grid_.data) v = rng.normal();
}

VisualFeatures SyntheticGridProvider::features(const Layout& layout) const {
  return region_feature_pool(grid_, layout);
}

void save_feature_grid(const std::string& path, const FeatureGrid& g) {
  save_tensor(path,
              {static_cast<std::uint32_t>(g.rows),
               static_cast<std::uint32_t>(g.cols),
               static_cast<std::uint32_t>(g.channels)},
              g.data);
}

FeatureGrid load_feature_grid(const std::string& path) {
  TensorFile t = load_tensor(path);
  if (t.dims.size() != 3) raise(ErrorCode::Parse, "expected a rank-3 tensor");
  FeatureGrid g(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]),
                static_cast<int>(t.dims[2]));
  g.data = std::move(t.data);
  return g;
}

namespace {

// replayable record of one text/image pairing inside the batch loss
struct PairTrace {
  std::vector<PooledSemantics> pooled;  // one per object of the image sample
  std::vector<double> cosines;
};

void validate_align_sample(const AlignSample& s, const Mat& table) {
  if (s.word_states.rows < 1 || s.word_states.cols != table.cols) {
    raise(ErrorCode::InvalidArgument,
          "sample word states are empty or of the wrong width");
  }
  if (s.categories.empty()) {
    raise(ErrorCode::InvalidArgument, "sample has no layout objects");
  }
  if (s.visual.objects.size() != s.categories.size()) {
    raise(ErrorCode::InvalidArgument,
          "visual features do not match the object count");
  }
  for (int c : s.categories) check_category(c, table);
  for (const auto& b : s.visual.objects) {
    if (static_cast<int>(b.size()) != table.cols) {
      raise(ErrorCode::InvalidArgument,
            "visual feature width does not match the embedding width");
    }
  }
  if (static_cast<int>(s.visual.image.size()) != table.cols) {
    raise(ErrorCode::InvalidArgument,
          "whole-image feature width does not match the embedding width");
  }
}

}  // namespace

AlignBatchResult alignment_loss(const std::vector<AlignSample>& batch,
                                const Mat& category_table, bool with_grad) {
  int n = static_cast<int>(batch.size());
  if (n < 2) {
    raise(ErrorCode::Degenerate,
          "contrastive loss needs at least two samples to contrast");
  }
  for (const AlignSample& s : batch) validate_align_sample(s, category_table);

  int d = category_table.cols;
  AlignBatchResult out;
  out.object_scores = Mat(n, n);
  out.image_scores = Mat(n, n);

  std::vector<std::vector<double>> text_means;
  text_means.reserve(static_cast<std::size_t>(n));
  for (const AlignSample& s : batch) text_means.push_back(mean_rows(s.word_states));

  // traces[i][k]: text sample i read through image sample k's objects
  std::vector<std::vector<PairTrace>> traces(
      static_cast<std::size_t>(n),
      std::vector<PairTrace>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const AlignSample& text = batch[static_cast<std::size_t>(i)];
      const AlignSample& image = batch[static_cast<std::size_t>(k)];
      PairTrace& tr = traces[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      double expsum = 0.0;
      for (std::size_t j = 0; j < image.categories.size(); ++j) {
        PooledSemantics pooled = object_text_attention(
            text.word_states, image.categories[j], category_table);
        double c = cosine_similarity(image.visual.objects[j], pooled.vector);
        expsum += std::exp(c);
        tr.pooled.push_back(std::move(pooled));
        tr.cosines.push_back(c);
      }
      out.object_scores(i, k) = std::log(expsum);
      out.image_scores(i, k) = cosine_similarity(
          image.visual.image, text_means[static_cast<std::size_t>(i)]);
    }
  }

  out.loss = contrastive_loss(out.object_scores, out.image_scores);
  if (!std::isfinite(out.loss.total)) {
    raise(ErrorCode::Numeric, "alignment loss is not finite");
  }
  if (!with_grad) return out;

  out.category_grad = Mat(category_table.rows, category_table.cols);
  out.word_state_grads.clear();
  for (const AlignSample& s : batch) {
    out.word_state_grads.emplace_back(s.word_states.rows, s.word_states.cols);
  }

  Mat dobj = column_nll_grad(out.object_scores);
  Mat dimg = column_nll_grad(out.image_scores);

  for (int i = 0; i < n; ++i) {
    const AlignSample& text = batch[static_cast<std::size_t>(i)];
    Mat& dz = out.word_state_grads[static_cast<std::size_t>(i)];
    int tokens = text.word_states.rows;

    for (int k = 0; k < n; ++k) {
      const AlignSample& image = batch[static_cast<std::size_t>(k)];
      const PairTrace& tr =
          traces[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];

      // object route: score is log of summed exponentiated cosines
      double gobj = dobj(i, k);
      if (gobj != 0.0) {
        double expsum = 0.0;
        for (double c : tr.cosines) expsum += std::exp(c);
        for (std::size_t j = 0; j < image.categories.size(); ++j) {
          double gcos = gobj * std::exp(tr.cosines[j]) / expsum;
          const std::vector<double>& a = tr.pooled[j].vector;
          const std::vector<double>& w = tr.pooled[j].weights;
          const std::vector<double>& b = image.visual.objects[j];
          double na = norm_of(a);
          double nb = norm_of(b);
          double cosj = tr.cosines[j];

          std::vector<double> da(static_cast<std::size_t>(d));
          for (int x = 0; x < d; ++x) {
            da[static_cast<std::size_t>(x)] =
                gcos * (b[static_cast<std::size_t>(x)] / (na * nb) -
                        cosj * a[static_cast<std::size_t>(x)] / (na * na));
          }

          // through the attention mix: a = sum_t w_t z_t
          int cat = image.categories[j];
          const double* u = category_table.row(cat);
          std::vector<double> dw(static_cast<std::size_t>(tokens));
          double swd = 0.0;
          for (int t = 0; t < tokens; ++t) {
            const double* z = text.word_states.row(t);
            double acc = 0.0;
            for (int x = 0; x < d; ++x) acc += da[static_cast<std::size_t>(x)] * z[x];
            dw[static_cast<std::size_t>(t)] = acc;
            swd += w[static_cast<std::size_t>(t)] * acc;
          }
          for (int t = 0; t < tokens; ++t) {
            double wt = w[static_cast<std::size_t>(t)];
            double dlogit = wt * (dw[static_cast<std::size_t>(t)] - swd);
            const double* z = text.word_states.row(t);
            double* dzr = dz.row(t);
            for (int x = 0; x < d; ++x) {
              dzr[x] += wt * da[static_cast<std::size_t>(x)] + dlogit * u[x];
              out.category_grad(cat, x) += dlogit * z[x];
            }
          }
        }
      }

      // image route: plain cosine against the mean word state
      double gimg = dimg(i, k);
      if (gimg != 0.0) {
        const std::vector<double>& zbar = text_means[static_cast<std::size_t>(i)];
        const std::vector<double>& bbar = image.visual.image;
        double nz = norm_of(zbar);
        double nb = norm_of(bbar);
        double cosik = out.image_scores(i, k);
        for (int x = 0; x < d; ++x) {
          double dmean = gimg * (bbar[static_cast<std::size_t>(x)] / (nz * nb) -
                                 cosik * zbar[static_cast<std::size_t>(x)] / (nz * nz));
          dmean /= tokens;
          for (int t = 0; t < tokens; ++t) dz(t, x) += dmean;
        }
      }
    }
  }
  return out;
}

GradCheckReport alignment_grad_check(std::vector<AlignSample> batch,
                                     Mat category_table, double epsilon) {
  AlignBatchResult base = alignment_loss(batch, category_table, true);

  std::vector<double> params(category_table.a);
  for (const AlignSample& s : batch) {
    params.insert(params.end(), s.word_states.a.begin(), s.word_states.a.end());
  }
  std::vector<double> analytic(base.category_grad.a);
  for (const Mat& g : base.word_state_grads) {
    analytic.insert(analytic.end(), g.a.begin(), g.a.end());
  }

  auto eval = [&batch, &category_table, &params](std::uint64_t*) {
    std::size_t pos = 0;
    std::copy_n(params.begin(), category_table.a.size(),
                category_table.a.begin());
    pos += category_table.a.size();
    for (AlignSample& s : batch) {
      std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(pos),
                  s.word_states.a.size(), s.word_states.a.begin());
      pos += s.word_states.a.size();
    }
    return alignment_loss(batch, category_table, false).loss.total;
  };
  return compare_gradients(params, analytic, eval, epsilon);
}

}  // namespace layoutkit
