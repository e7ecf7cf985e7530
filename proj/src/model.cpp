#include "layoutkit/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "layoutkit/rng.hpp"
#include "wire.hpp"

namespace layoutkit {

namespace {

constexpr double kNormEpsilon = 1e-6;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// FNV-1a over the on/off state of every rectifier in one evaluation. Two
// evaluations that agree here took the same kinks, so a central difference
// across them is trustworthy.
struct SignHasher {
  std::uint64_t state = 1469598103934665603ull;

  void add(bool on) {
    state ^= on ? 0x9Eu : 0x31u;
    state *= 1099511628211ull;
  }
};

struct Visibility {
  enum Kind { kAll, kCausal, kBlock };
  Kind kind = kAll;
  const AttentionMask* mask = nullptr;

  bool at(int i, int j) const {
    if (kind == kAll) return true;
    if (kind == kCausal) return j <= i;
    return mask->at(i, j);
  }
};

struct NormCache {
  Mat xhat;                  // (x - mean) * rstd per row
  std::vector<double> rstd;  // 1 / sqrt(var + eps) per row
  Mat out;                   // gain * xhat + bias
};

struct AttnCache {
  Mat q, k, v;
  std::vector<Mat> weights;  // per head, (Tq, Tk); zero where invisible
  Mat ctx;                   // concatenated head outputs before the out map
};

struct EncLayerCache {
  NormCache attn_norm;
  AttnCache attn;
  Mat after_attn;
  NormCache ffn_norm;
  Mat ffn_pre, ffn_act;
};

struct DecLayerCache {
  NormCache self_norm;
  AttnCache self_attn;
  Mat after_self;
  NormCache cross_norm;
  AttnCache cross_attn;
  Mat after_cross;
  NormCache ffn_norm;
  Mat ffn_pre, ffn_act;
};

struct EncTrace {
  Mat embedded;
  std::vector<EncLayerCache> layers;
  NormCache final_norm;
  Mat states;
};

struct DecTrace {
  std::vector<int> input_ids;
  Mat embedded;
  std::vector<DecLayerCache> layers;
  NormCache final_norm;
  Mat hidden;
  Mat logits;
  int object_count = 0;
  Mat reg_in, reg_pre1, reg_act1, reg_pre2, reg_act2, reg_pre3, reg_out;
};

// All forward and backward passes share one view of the parameter vector.
struct Runner {
  const ModelConfig& cfg;
  const ParamLayout& lay;
  const double* th;
  SignHasher* hasher = nullptr;

  int width() const { return cfg.width; }
  int head_dim() const { return cfg.width / cfg.heads; }

  Mat affine(const Mat& x, TensorRef w, TensorRef b) const {
    if (x.cols != w.rows) {
      raise(ErrorCode::InvalidArgument, "affine input width mismatch");
    }
    Mat y(x.rows, w.cols);
    const double* wp = th + w.offset;
    const double* bp = th + b.offset;
    for (int i = 0; i < x.rows; ++i) {
      double* yr = y.row(i);
      for (int j = 0; j < w.cols; ++j) yr[j] = bp[j];
      const double* xr = x.row(i);
      for (int k = 0; k < x.cols; ++k) {
        double xv = xr[k];
        const double* wr = wp + static_cast<std::size_t>(k) * w.cols;
        for (int j = 0; j < w.cols; ++j) yr[j] += xv * wr[j];
      }
    }
    return y;
  }

  // dW += x^T dy, db += column sums of dy, and dx += dy W^T when dx is given.
  void affine_backward(const Mat& x, const Mat& dy, TensorRef w, TensorRef b,
                       double* grad, Mat* dx) const {
    double* gw = grad + w.offset;
    double* gb = grad + b.offset;
    const double* wp = th + w.offset;
    for (int i = 0; i < x.rows; ++i) {
      const double* xr = x.row(i);
      const double* dyr = dy.row(i);
      for (int j = 0; j < w.cols; ++j) gb[j] += dyr[j];
      for (int k = 0; k < x.cols; ++k) {
        double xv = xr[k];
        double* gwr = gw + static_cast<std::size_t>(k) * w.cols;
        for (int j = 0; j < w.cols; ++j) gwr[j] += xv * dyr[j];
      }
      if (dx != nullptr) {
        double* dxr = dx->row(i);
        for (int k = 0; k < x.cols; ++k) {
          const double* wr = wp + static_cast<std::size_t>(k) * w.cols;
          double acc = 0.0;
          for (int j = 0; j < w.cols; ++j) acc += dyr[j] * wr[j];
          dxr[k] += acc;
        }
      }
    }
  }

  void layer_norm(const Mat& x, TensorRef gain, TensorRef bias,
                  NormCache& c) const {
    const double* gp = th + gain.offset;
    const double* bp = th + bias.offset;
    int n = x.cols;
    c.xhat = Mat(x.rows, n);
    c.out = Mat(x.rows, n);
    c.rstd.assign(static_cast<std::size_t>(x.rows), 0.0);
    for (int i = 0; i < x.rows; ++i) {
      const double* xr = x.row(i);
      double mean = 0.0;
      for (int j = 0; j < n; ++j) mean += xr[j];
      mean /= n;
      double var = 0.0;
      for (int j = 0; j < n; ++j) {
        double dev = xr[j] - mean;
        var += dev * dev;
      }
      var /= n;
      double r = 1.0 / std::sqrt(var + kNormEpsilon);
      c.rstd[i] = r;
      double* xh = c.xhat.row(i);
      double* o = c.out.row(i);
      for (int j = 0; j < n; ++j) {
        xh[j] = (xr[j] - mean) * r;
        o[j] = gp[j] * xh[j] + bp[j];
      }
    }
  }

  void layer_norm_backward(const Mat& dy, TensorRef gain, TensorRef bias,
                           const NormCache& c, double* grad, Mat& dx) const {
    const double* gp = th + gain.offset;
    double* gg = grad + gain.offset;
    double* gb = grad + bias.offset;
    int n = dy.cols;
    for (int i = 0; i < dy.rows; ++i) {
      const double* dyr = dy.row(i);
      const double* xh = c.xhat.row(i);
      double sum_dxh = 0.0;
      double sum_dxh_xh = 0.0;
      for (int j = 0; j < n; ++j) {
        gg[j] += dyr[j] * xh[j];
        gb[j] += dyr[j];
        double dxh = dyr[j] * gp[j];
        sum_dxh += dxh;
        sum_dxh_xh += dxh * xh[j];
      }
      double mean_dxh = sum_dxh / n;
      double mean_dxh_xh = sum_dxh_xh / n;
      double r = c.rstd[i];
      double* dxr = dx.row(i);
      for (int j = 0; j < n; ++j) {
        double dxh = dyr[j] * gp[j];
        dxr[j] += r * (dxh - mean_dxh - xh[j] * mean_dxh_xh);
      }
    }
  }

  Mat rectify(const Mat& pre) const {
    Mat act(pre.rows, pre.cols);
    for (std::size_t i = 0; i < pre.a.size(); ++i) {
      bool on = pre.a[i] > 0.0;
      if (hasher != nullptr) hasher->add(on);
      act.a[i] = on ? pre.a[i] : 0.0;
    }
    return act;
  }

  static Mat rectify_backward(const Mat& da, const Mat& pre) {
    Mat dpre(pre.rows, pre.cols);
    for (std::size_t i = 0; i < pre.a.size(); ++i) {
      dpre.a[i] = pre.a[i] > 0.0 ? da.a[i] : 0.0;
    }
    return dpre;
  }

  Mat attention(const Mat& xq, const Mat& xkv, const AttnRefs& r,
                Visibility vis, AttnCache& c) const {
    c.q = affine(xq, r.query_w, r.query_b);
    c.k = affine(xkv, r.key_w, r.key_b);
    c.v = affine(xkv, r.value_w, r.value_b);
    int tq = xq.rows;
    int tk = xkv.rows;
    int dh = head_dim();
    double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    c.weights.assign(static_cast<std::size_t>(cfg.heads), Mat());
    c.ctx = Mat(tq, width());
    std::vector<double> scores(static_cast<std::size_t>(tk));
    for (int h = 0; h < cfg.heads; ++h) {
      int c0 = h * dh;
      Mat& att = c.weights[static_cast<std::size_t>(h)];
      att = Mat(tq, tk);
      for (int i = 0; i < tq; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        bool any_visible = false;
        for (int j = 0; j < tk; ++j) {
          if (!vis.at(i, j)) continue;
          any_visible = true;
          double dot = 0.0;
          for (int t = 0; t < dh; ++t) dot += c.q(i, c0 + t) * c.k(j, c0 + t);
          scores[static_cast<std::size_t>(j)] = dot * scale;
          if (scores[static_cast<std::size_t>(j)] > best) {
            best = scores[static_cast<std::size_t>(j)];
          }
        }
        if (!any_visible) {
          raise(ErrorCode::InvalidArgument,
                "attention row with nothing visible");
        }
        if (!std::isfinite(best)) {
          raise(ErrorCode::Numeric, "attention scores are not finite");
        }
        double denom = 0.0;
        for (int j = 0; j < tk; ++j) {
          if (!vis.at(i, j)) continue;
          double e = std::exp(scores[static_cast<std::size_t>(j)] - best);
          att(i, j) = e;
          denom += e;
        }
        for (int j = 0; j < tk; ++j) att(i, j) /= denom;
        // exact zeros never touch the mix, so hidden positions cannot leak
        for (int t = 0; t < dh; ++t) {
          double acc = 0.0;
          for (int j = 0; j < tk; ++j) {
            double aij = att(i, j);
            if (aij != 0.0) acc += aij * c.v(j, c0 + t);
          }
          c.ctx(i, c0 + t) = acc;
        }
      }
    }
    return affine(c.ctx, r.out_w, r.out_b);
  }

  // Invisible attention entries are exactly zero in the cached weights, so
  // the softmax backward formula drops them on its own.
  void attention_backward(const Mat& xq, const Mat& xkv, const AttnRefs& r,
                          const AttnCache& c, const Mat& dout, double* grad,
                          Mat& dxq, Mat& dxkv) const {
    int tq = xq.rows;
    int tk = xkv.rows;
    int dh = head_dim();
    double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    Mat dctx(tq, width());
    affine_backward(c.ctx, dout, r.out_w, r.out_b, grad, &dctx);
    Mat dq(tq, width());
    Mat dk(tk, width());
    Mat dv(tk, width());
    std::vector<double> datt(static_cast<std::size_t>(tk));
    std::vector<double> ds(static_cast<std::size_t>(tk));
    for (int h = 0; h < cfg.heads; ++h) {
      int c0 = h * dh;
      const Mat& att = c.weights[static_cast<std::size_t>(h)];
      for (int i = 0; i < tq; ++i) {
        double rowdot = 0.0;
        for (int j = 0; j < tk; ++j) {
          double acc = 0.0;
          for (int t = 0; t < dh; ++t) acc += dctx(i, c0 + t) * c.v(j, c0 + t);
          datt[static_cast<std::size_t>(j)] = acc;
          rowdot += acc * att(i, j);
        }
        for (int j = 0; j < tk; ++j) {
          ds[static_cast<std::size_t>(j)] =
              att(i, j) * (datt[static_cast<std::size_t>(j)] - rowdot);
        }
        for (int j = 0; j < tk; ++j) {
          double aij = att(i, j);
          if (aij != 0.0) {
            for (int t = 0; t < dh; ++t) dv(j, c0 + t) += aij * dctx(i, c0 + t);
          }
        }
        for (int j = 0; j < tk; ++j) {
          double s = ds[static_cast<std::size_t>(j)] * scale;
          if (s != 0.0) {
            for (int t = 0; t < dh; ++t) {
              dq(i, c0 + t) += s * c.k(j, c0 + t);
              dk(j, c0 + t) += s * c.q(i, c0 + t);
            }
          }
        }
      }
    }
    affine_backward(xq, dq, r.query_w, r.query_b, grad, &dxq);
    affine_backward(xkv, dk, r.key_w, r.key_b, grad, &dxkv);
    affine_backward(xkv, dv, r.value_w, r.value_b, grad, &dxkv);
  }

  Mat ffn(const Mat& x, const FfnRefs& r, Mat& pre, Mat& act) const {
    pre = affine(x, r.in_w, r.in_b);
    act = rectify(pre);
    return affine(act, r.out_w, r.out_b);
  }

  Mat embed(const std::vector<int>& ids, TensorRef table) const {
    int n = static_cast<int>(ids.size());
    Mat x(n, width());
    double scale = std::sqrt(static_cast<double>(width()));
    for (int i = 0; i < n; ++i) {
      const double* rowp =
          th + table.offset +
          static_cast<std::size_t>(ids[static_cast<std::size_t>(i)]) *
              static_cast<std::size_t>(width());
      double* xr = x.row(i);
      for (int j = 0; j < width(); ++j) xr[j] = rowp[j] * scale;
    }
    Mat pe = position_encoding(n, width());
    add_inplace(x, pe);
    return x;
  }

  void scatter_embedding(const std::vector<int>& ids, const Mat& dx,
                         TensorRef table, double* grad) const {
    double scale = std::sqrt(static_cast<double>(width()));
    for (int i = 0; i < dx.rows; ++i) {
      double* gr = grad + table.offset +
                   static_cast<std::size_t>(ids[static_cast<std::size_t>(i)]) *
                       static_cast<std::size_t>(width());
      const double* dxr = dx.row(i);
      for (int j = 0; j < width(); ++j) gr[j] += dxr[j] * scale;
    }
  }

  Mat encoder_layer(const Mat& x, const ParamLayout::EncoderLayer& r,
                    Visibility vis, EncLayerCache& c) const {
    layer_norm(x, r.attn.norm_gain, r.attn.norm_bias, c.attn_norm);
    Mat attn_out = attention(c.attn_norm.out, c.attn_norm.out, r.attn, vis,
                             c.attn);
    c.after_attn = add(x, attn_out);
    layer_norm(c.after_attn, r.ffn.norm_gain, r.ffn.norm_bias, c.ffn_norm);
    Mat f = ffn(c.ffn_norm.out, r.ffn, c.ffn_pre, c.ffn_act);
    return add(c.after_attn, f);
  }

  Mat encoder_layer_backward(const ParamLayout::EncoderLayer& r,
                             const EncLayerCache& c, const Mat& dout,
                             double* grad) const {
    Mat d_after = dout;  // residual branch around the feed-forward block
    {
      Mat dact(c.ffn_act.rows, c.ffn_act.cols);
      affine_backward(c.ffn_act, dout, r.ffn.out_w, r.ffn.out_b, grad, &dact);
      Mat dpre = rectify_backward(dact, c.ffn_pre);
      Mat dnorm(c.ffn_norm.out.rows, c.ffn_norm.out.cols);
      affine_backward(c.ffn_norm.out, dpre, r.ffn.in_w, r.ffn.in_b, grad,
                      &dnorm);
      layer_norm_backward(dnorm, r.ffn.norm_gain, r.ffn.norm_bias, c.ffn_norm,
                          grad, d_after);
    }
    Mat dx = d_after;  // residual branch around attention
    {
      Mat dnormed(c.attn_norm.out.rows, c.attn_norm.out.cols);
      attention_backward(c.attn_norm.out, c.attn_norm.out, r.attn, c.attn,
                         d_after, grad, dnormed, dnormed);
      layer_norm_backward(dnormed, r.attn.norm_gain, r.attn.norm_bias,
                          c.attn_norm, grad, dx);
    }
    return dx;
  }

  Mat decoder_layer(const Mat& y, const Mat& enc_states,
                    const ParamLayout::DecoderLayer& r,
                    DecLayerCache& c) const {
    layer_norm(y, r.self_attn.norm_gain, r.self_attn.norm_bias, c.self_norm);
    Mat sa = attention(c.self_norm.out, c.self_norm.out, r.self_attn,
                       Visibility{Visibility::kCausal, nullptr}, c.self_attn);
    c.after_self = add(y, sa);
    layer_norm(c.after_self, r.cross_attn.norm_gain, r.cross_attn.norm_bias,
               c.cross_norm);
    Mat ca = attention(c.cross_norm.out, enc_states, r.cross_attn,
                       Visibility{Visibility::kAll, nullptr}, c.cross_attn);
    c.after_cross = add(c.after_self, ca);
    layer_norm(c.after_cross, r.ffn.norm_gain, r.ffn.norm_bias, c.ffn_norm);
    Mat f = ffn(c.ffn_norm.out, r.ffn, c.ffn_pre, c.ffn_act);
    return add(c.after_cross, f);
  }

  Mat decoder_layer_backward(const Mat& enc_states,
                             const ParamLayout::DecoderLayer& r,
                             const DecLayerCache& c, const Mat& dout,
                             double* grad, Mat& denc) const {
    Mat d_cross = dout;
    {
      Mat dact(c.ffn_act.rows, c.ffn_act.cols);
      affine_backward(c.ffn_act, dout, r.ffn.out_w, r.ffn.out_b, grad, &dact);
      Mat dpre = rectify_backward(dact, c.ffn_pre);
      Mat dnorm(c.ffn_norm.out.rows, c.ffn_norm.out.cols);
      affine_backward(c.ffn_norm.out, dpre, r.ffn.in_w, r.ffn.in_b, grad,
                      &dnorm);
      layer_norm_backward(dnorm, r.ffn.norm_gain, r.ffn.norm_bias, c.ffn_norm,
                          grad, d_cross);
    }
    Mat d_self = d_cross;
    {
      Mat dquery(c.cross_norm.out.rows, c.cross_norm.out.cols);
      attention_backward(c.cross_norm.out, enc_states, r.cross_attn,
                         c.cross_attn, d_cross, grad, dquery, denc);
      layer_norm_backward(dquery, r.cross_attn.norm_gain,
                          r.cross_attn.norm_bias, c.cross_norm, grad, d_self);
    }
    Mat dy = d_self;
    {
      Mat dnormed(c.self_norm.out.rows, c.self_norm.out.cols);
      attention_backward(c.self_norm.out, c.self_norm.out, r.self_attn,
                         c.self_attn, d_self, grad, dnormed, dnormed);
      layer_norm_backward(dnormed, r.self_attn.norm_gain, r.self_attn.norm_bias,
                          c.self_norm, grad, dy);
    }
    return dy;
  }

  void encode(const std::vector<int>& ids, const AttentionMask& mask,
              EncTrace& tr) const {
    int t = static_cast<int>(ids.size());
    if (t == 0) {
      raise(ErrorCode::InvalidArgument, "cannot encode an empty token list");
    }
    if (mask.size != t) {
      raise(ErrorCode::InvalidArgument,
            "attention mask size does not match the token count");
    }
    for (int id : ids) {
      if (id < 0 || id >= cfg.vocab_size) {
        raise(ErrorCode::Bounds, "word id outside the vocabulary");
      }
    }
    tr.embedded = embed(ids, lay.text_embed);
    Visibility vis{Visibility::kBlock, &mask};
    Mat x = tr.embedded;
    tr.layers.resize(static_cast<std::size_t>(cfg.encoder_layers));
    for (int l = 0; l < cfg.encoder_layers; ++l) {
      x = encoder_layer(x, lay.encoder[static_cast<std::size_t>(l)], vis,
                        tr.layers[static_cast<std::size_t>(l)]);
    }
    if (cfg.encoder_layers > 0) {
      layer_norm(x, lay.encoder_norm_gain, lay.encoder_norm_bias,
                 tr.final_norm);
      tr.states = tr.final_norm.out;
    } else {
      tr.states = x;
    }
  }

  void decode(const Mat& enc_states, const std::vector<int>& input_ids,
              DecTrace& tr) const {
    int p = static_cast<int>(input_ids.size());
    if (p == 0) {
      raise(ErrorCode::InvalidArgument,
            "decoder needs at least the start marker");
    }
    if (p > cfg.max_objects + 1) {
      raise(ErrorCode::Capacity,
            "decoder input longer than the configured object cap");
    }
    if (enc_states.cols != width()) {
      raise(ErrorCode::InvalidArgument, "encoder state width mismatch");
    }
    for (int id : input_ids) {
      if (id < 0 || id >= cfg.decoder_vocab()) {
        raise(ErrorCode::Bounds, "layout token outside the joint vocabulary");
      }
    }
    tr.input_ids = input_ids;
    tr.embedded = embed(input_ids, lay.layout_embed);
    Mat y = tr.embedded;
    tr.layers.resize(static_cast<std::size_t>(cfg.decoder_layers));
    for (int l = 0; l < cfg.decoder_layers; ++l) {
      y = decoder_layer(y, enc_states, lay.decoder[static_cast<std::size_t>(l)],
                        tr.layers[static_cast<std::size_t>(l)]);
    }
    if (cfg.decoder_layers > 0) {
      layer_norm(y, lay.decoder_norm_gain, lay.decoder_norm_bias,
                 tr.final_norm);
      tr.hidden = tr.final_norm.out;
    } else {
      tr.hidden = y;
    }
    tr.logits = affine(tr.hidden, lay.class_w, lay.class_b);
  }

  void regression_forward(DecTrace& tr, int object_count) const {
    tr.object_count = object_count;
    tr.reg_in = Mat(object_count, width());
    for (int i = 0; i < object_count; ++i) {
      std::copy(tr.hidden.row(i), tr.hidden.row(i) + width(), tr.reg_in.row(i));
    }
    tr.reg_pre1 = affine(tr.reg_in, lay.box1_w, lay.box1_b);
    tr.reg_act1 = rectify(tr.reg_pre1);
    tr.reg_pre2 = affine(tr.reg_act1, lay.box2_w, lay.box2_b);
    tr.reg_act2 = rectify(tr.reg_pre2);
    tr.reg_pre3 = affine(tr.reg_act2, lay.box3_w, lay.box3_b);
    tr.reg_out = Mat(object_count, 4);
    for (std::size_t i = 0; i < tr.reg_pre3.a.size(); ++i) {
      tr.reg_out.a[i] = sigmoid(tr.reg_pre3.a[i]);
    }
  }

  Mat box_head(const Mat& hidden) const {
    Mat z1 = affine(hidden, lay.box1_w, lay.box1_b);
    Mat a1 = rectify(z1);
    Mat z2 = affine(a1, lay.box2_w, lay.box2_b);
    Mat a2 = rectify(z2);
    Mat z3 = affine(a2, lay.box3_w, lay.box3_b);
    for (double& v : z3.a) v = sigmoid(v);
    return z3;
  }

  void validate_target(const TargetSequence& target) const {
    if (target.tokens.empty()) {
      raise(ErrorCode::InvalidArgument, "target sequence has no tokens");
    }
    int end = end_token(cfg.grid);
    if (target.tokens.back() != end) {
      raise(ErrorCode::InvalidArgument,
            "target sequence does not finish with the end marker");
    }
    std::size_t objects = target.tokens.size() - 1;
    if (target.regressions.size() != objects) {
      raise(ErrorCode::InvalidArgument,
            "target regression count does not match the object count");
    }
    for (std::size_t i = 0; i < objects; ++i) {
      int tok = target.tokens[i];
      if (tok < 0 || tok >= cfg.grid.joint_classes()) {
        raise(ErrorCode::Bounds, "object token outside the joint classes");
      }
      const auto& r = target.regressions[i];
      bool ok = r.fx >= 0.0 && r.fx <= 1.0 && r.fy >= 0.0 && r.fy <= 1.0 &&
                r.fw > 0.0 && r.fw <= 1.0 && r.fh > 0.0 && r.fh <= 1.0;
      if (!ok) {
        raise(ErrorCode::InvalidArgument,
              "target regression outside the unit ranges");
      }
    }
  }

  static double cross_entropy_from_logits(const double* logits, int n,
                                          int target) {
    double best = logits[0];
    for (int j = 1; j < n; ++j) best = std::max(best, logits[j]);
    double denom = 0.0;
    for (int j = 0; j < n; ++j) denom += std::exp(logits[j] - best);
    return best + std::log(denom) - logits[target];
  }

  struct SampleEval {
    EncTrace enc;
    DecTrace dec;
    double classification = 0.0;
    double regression = 0.0;
  };

  void sample_forward(const TrainSample& s, SampleEval& ev) const {
    validate_target(s.target);
    encode(s.caption, s.mask, ev.enc);
    std::vector<int> input_ids;
    input_ids.reserve(s.target.tokens.size());
    input_ids.push_back(begin_token(cfg.grid));
    for (std::size_t i = 0; i + 1 < s.target.tokens.size(); ++i) {
      input_ids.push_back(s.target.tokens[i]);
    }
    decode(ev.enc.states, input_ids, ev.dec);
    int objects = static_cast<int>(s.target.tokens.size()) - 1;
    regression_forward(ev.dec, objects);
    for (int p = 0; p < ev.dec.logits.rows; ++p) {
      ev.classification += cross_entropy_from_logits(
          ev.dec.logits.row(p), ev.dec.logits.cols,
          s.target.tokens[static_cast<std::size_t>(p)]);
    }
    for (int i = 0; i < objects; ++i) {
      const auto& t = s.target.regressions[static_cast<std::size_t>(i)];
      const double* o = ev.dec.reg_out.row(i);
      double ex = o[0] - t.fx;
      double ey = o[1] - t.fy;
      double ew = std::sqrt(o[2]) - std::sqrt(t.fw);
      double eh = std::sqrt(o[3]) - std::sqrt(t.fh);
      ev.regression += ex * ex + ey * ey + ew * ew + eh * eh;
    }
  }

  void sample_backward(const TrainSample& s, const SampleEval& ev,
                       double* grad) const {
    int positions = ev.dec.logits.rows;
    int classes = ev.dec.logits.cols;
    Mat dlogits(positions, classes);
    for (int p = 0; p < positions; ++p) {
      const double* lr = ev.dec.logits.row(p);
      double best = lr[0];
      for (int j = 1; j < classes; ++j) best = std::max(best, lr[j]);
      double denom = 0.0;
      for (int j = 0; j < classes; ++j) denom += std::exp(lr[j] - best);
      double* dr = dlogits.row(p);
      for (int j = 0; j < classes; ++j) {
        dr[j] = std::exp(lr[j] - best) / denom;
      }
      dr[s.target.tokens[static_cast<std::size_t>(p)]] -= 1.0;
    }
    Mat dhidden(positions, width());
    affine_backward(ev.dec.hidden, dlogits, lay.class_w, lay.class_b, grad,
                    &dhidden);
    int objects = ev.dec.object_count;
    if (objects > 0) {
      double lambda = cfg.loss_balance;
      Mat dout(objects, 4);
      for (int i = 0; i < objects; ++i) {
        const auto& t = s.target.regressions[static_cast<std::size_t>(i)];
        const double* o = ev.dec.reg_out.row(i);
        double* dr = dout.row(i);
        dr[0] = lambda * 2.0 * (o[0] - t.fx);
        dr[1] = lambda * 2.0 * (o[1] - t.fy);
        dr[2] = lambda * (1.0 - std::sqrt(t.fw) / std::sqrt(o[2]));
        dr[3] = lambda * (1.0 - std::sqrt(t.fh) / std::sqrt(o[3]));
      }
      Mat dz3(objects, 4);
      for (std::size_t i = 0; i < dz3.a.size(); ++i) {
        double o = ev.dec.reg_out.a[i];
        dz3.a[i] = dout.a[i] * o * (1.0 - o);
      }
      Mat da2(objects, cfg.reg());
      affine_backward(ev.dec.reg_act2, dz3, lay.box3_w, lay.box3_b, grad,
                      &da2);
      Mat dz2 = rectify_backward(da2, ev.dec.reg_pre2);
      Mat da1(objects, cfg.reg());
      affine_backward(ev.dec.reg_act1, dz2, lay.box2_w, lay.box2_b, grad,
                      &da1);
      Mat dz1 = rectify_backward(da1, ev.dec.reg_pre1);
      Mat dreg_in(objects, width());
      affine_backward(ev.dec.reg_in, dz1, lay.box1_w, lay.box1_b, grad,
                      &dreg_in);
      for (int i = 0; i < objects; ++i) {
        double* hr = dhidden.row(i);
        const double* rr = dreg_in.row(i);
        for (int j = 0; j < width(); ++j) hr[j] += rr[j];
      }
    }
    Mat d_dec;
    if (cfg.decoder_layers > 0) {
      d_dec = Mat(positions, width());
      layer_norm_backward(dhidden, lay.decoder_norm_gain, lay.decoder_norm_bias,
                          ev.dec.final_norm, grad, d_dec);
    } else {
      d_dec = dhidden;
    }
    Mat denc(ev.enc.states.rows, width());
    for (int l = cfg.decoder_layers - 1; l >= 0; --l) {
      d_dec = decoder_layer_backward(ev.enc.states,
                                     lay.decoder[static_cast<std::size_t>(l)],
                                     ev.dec.layers[static_cast<std::size_t>(l)],
                                     d_dec, grad, denc);
    }
    scatter_embedding(ev.dec.input_ids, d_dec, lay.layout_embed, grad);
    Mat d_enc;
    if (cfg.encoder_layers > 0) {
      d_enc = Mat(denc.rows, width());
      layer_norm_backward(denc, lay.encoder_norm_gain, lay.encoder_norm_bias,
                          ev.enc.final_norm, grad, d_enc);
    } else {
      d_enc = denc;
    }
    for (int l = cfg.encoder_layers - 1; l >= 0; --l) {
      d_enc = encoder_layer_backward(lay.encoder[static_cast<std::size_t>(l)],
                                     ev.enc.layers[static_cast<std::size_t>(l)],
                                     d_enc, grad);
    }
    scatter_embedding(s.caption, d_enc, lay.text_embed, grad);
  }
};

void fill_uniform(std::vector<double>& theta, TensorRef r, double limit,
                  Rng& rng) {
  for (std::size_t i = 0; i < r.count(); ++i) {
    theta[r.offset + i] = rng.uniform(-limit, limit);
  }
}

void fill_xavier(std::vector<double>& theta, TensorRef r, Rng& rng) {
  double limit = std::sqrt(6.0 / (r.rows + r.cols));
  fill_uniform(theta, r, limit, rng);
}

void fill_const(std::vector<double>& theta, TensorRef r, double value) {
  for (std::size_t i = 0; i < r.count(); ++i) theta[r.offset + i] = value;
}

void init_attn(std::vector<double>& theta, const AttnRefs& r, Rng& rng) {
  fill_const(theta, r.norm_gain, 1.0);
  fill_const(theta, r.norm_bias, 0.0);
  fill_xavier(theta, r.query_w, rng);
  fill_const(theta, r.query_b, 0.0);
  fill_xavier(theta, r.key_w, rng);
  fill_const(theta, r.key_b, 0.0);
  fill_xavier(theta, r.value_w, rng);
  fill_const(theta, r.value_b, 0.0);
  fill_xavier(theta, r.out_w, rng);
  fill_const(theta, r.out_b, 0.0);
}

void init_ffn(std::vector<double>& theta, const FfnRefs& r, Rng& rng) {
  fill_const(theta, r.norm_gain, 1.0);
  fill_const(theta, r.norm_bias, 0.0);
  fill_xavier(theta, r.in_w, rng);
  fill_const(theta, r.in_b, 0.0);
  fill_xavier(theta, r.out_w, rng);
  fill_const(theta, r.out_b, 0.0);
}

}  // namespace

void ModelConfig::validate() const {
  if (width < 1) raise(ErrorCode::InvalidArgument, "model width must be positive");
  if (heads < 1) raise(ErrorCode::InvalidArgument, "head count must be positive");
  if (width % heads != 0) {
    raise(ErrorCode::InvalidArgument, "width must divide evenly into heads");
  }
  if (encoder_layers < 0 || decoder_layers < 0) {
    raise(ErrorCode::InvalidArgument, "layer counts cannot be negative");
  }
  if (ffn_width < 0 || reg_width < 0) {
    raise(ErrorCode::InvalidArgument, "hidden widths cannot be negative");
  }
  if (vocab_size < 1) {
    raise(ErrorCode::InvalidArgument, "vocabulary must be non-empty");
  }
  if (grid.resolution < 1 || grid.categories < 1) {
    raise(ErrorCode::InvalidArgument, "grid must have cells and categories");
  }
  if (max_objects < 1) {
    raise(ErrorCode::InvalidArgument, "object cap must be positive");
  }
  if (!(loss_balance >= 0.0)) {
    raise(ErrorCode::InvalidArgument, "loss balance must be non-negative");
  }
}

ParamLayout ParamLayout::build(const ModelConfig& config) {
  config.validate();
  ParamLayout lay;
  std::size_t at = 0;
  auto tensor = [&at](int rows, int cols) {
    TensorRef r{at, rows, cols};
    at += r.count();
    return r;
  };
  auto vec = [&tensor](int n) { return tensor(n, 1); };
  int d = config.width;
  int f = config.ffn();
  int rg = config.reg();
  auto attn = [&]() {
    AttnRefs a;
    a.norm_gain = vec(d);
    a.norm_bias = vec(d);
    a.query_w = tensor(d, d);
    a.query_b = vec(d);
    a.key_w = tensor(d, d);
    a.key_b = vec(d);
    a.value_w = tensor(d, d);
    a.value_b = vec(d);
    a.out_w = tensor(d, d);
    a.out_b = vec(d);
    return a;
  };
  auto ffn = [&]() {
    FfnRefs r;
    r.norm_gain = vec(d);
    r.norm_bias = vec(d);
    r.in_w = tensor(d, f);
    r.in_b = vec(f);
    r.out_w = tensor(f, d);
    r.out_b = vec(d);
    return r;
  };
  lay.text_embed = tensor(config.vocab_size, d);
  lay.encoder.resize(static_cast<std::size_t>(config.encoder_layers));
  for (auto& layer : lay.encoder) {
    layer.attn = attn();
    layer.ffn = ffn();
  }
  lay.encoder_norm_gain = vec(d);
  lay.encoder_norm_bias = vec(d);
  lay.layout_embed = tensor(config.decoder_vocab(), d);
  lay.decoder.resize(static_cast<std::size_t>(config.decoder_layers));
  for (auto& layer : lay.decoder) {
    layer.self_attn = attn();
    layer.cross_attn = attn();
    layer.ffn = ffn();
  }
  lay.decoder_norm_gain = vec(d);
  lay.decoder_norm_bias = vec(d);
  lay.class_w = tensor(d, config.target_classes());
  lay.class_b = vec(config.target_classes());
  lay.box1_w = tensor(d, rg);
  lay.box1_b = vec(rg);
  lay.box2_w = tensor(rg, rg);
  lay.box2_b = vec(rg);
  lay.box3_w = tensor(rg, 4);
  lay.box3_b = vec(4);
  lay.total = at;
  return lay;
}

Mat position_encoding(int length, int width) {
  Mat pe(length, width);
  for (int p = 0; p < length; ++p) {
    for (int i = 0; i < width; ++i) {
      int pair = i / 2;
      double freq = std::exp(-std::log(10000.0) * (2.0 * pair) / width);
      double angle = p * freq;
      pe(p, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

Model::Model(const ModelConfig& config)
    : config_(config), layout_(ParamLayout::build(config)) {
  theta_.assign(layout_.total, 0.0);
  Rng rng(config_.seed);
  double embed_limit = std::sqrt(3.0 / config_.width);
  fill_uniform(theta_, layout_.text_embed, embed_limit, rng);
  for (const auto& layer : layout_.encoder) {
    init_attn(theta_, layer.attn, rng);
    init_ffn(theta_, layer.ffn, rng);
  }
  fill_const(theta_, layout_.encoder_norm_gain, 1.0);
  fill_const(theta_, layout_.encoder_norm_bias, 0.0);
  fill_uniform(theta_, layout_.layout_embed, embed_limit, rng);
  for (const auto& layer : layout_.decoder) {
    init_attn(theta_, layer.self_attn, rng);
    init_attn(theta_, layer.cross_attn, rng);
    init_ffn(theta_, layer.ffn, rng);
  }
  fill_const(theta_, layout_.decoder_norm_gain, 1.0);
  fill_const(theta_, layout_.decoder_norm_bias, 0.0);
  fill_xavier(theta_, layout_.class_w, rng);
  fill_const(theta_, layout_.class_b, 0.0);
  fill_xavier(theta_, layout_.box1_w, rng);
  fill_const(theta_, layout_.box1_b, 0.0);
  fill_xavier(theta_, layout_.box2_w, rng);
  fill_const(theta_, layout_.box2_b, 0.0);
  fill_xavier(theta_, layout_.box3_w, rng);
  fill_const(theta_, layout_.box3_b, 0.0);
}

Mat Model::encode_text(const std::vector<int>& word_ids,
                       const AttentionMask& mask) const {
  Runner run{config_, layout_, theta_.data(), nullptr};
  EncTrace tr;
  run.encode(word_ids, mask, tr);
  return std::move(tr.states);
}

DecodedSequence Model::decode_sequence(const Mat& encoder_states,
                                       const std::vector<int>& input_ids) const {
  Runner run{config_, layout_, theta_.data(), nullptr};
  DecTrace tr;
  run.decode(encoder_states, input_ids, tr);
  return DecodedSequence{std::move(tr.logits), std::move(tr.hidden)};
}

DecodeStepResult Model::decode_step(const Mat& encoder_states,
                                    const std::vector<int>& prefix) const {
  std::vector<int> input_ids;
  input_ids.reserve(prefix.size() + 1);
  input_ids.push_back(begin_token(config_.grid));
  input_ids.insert(input_ids.end(), prefix.begin(), prefix.end());
  DecodedSequence out = decode_sequence(encoder_states, input_ids);
  int last = out.logits.rows - 1;
  DecodeStepResult r;
  r.logits.assign(out.logits.row(last), out.logits.row(last) + out.logits.cols);
  r.hidden.assign(out.hidden.row(last), out.hidden.row(last) + out.hidden.cols);
  return r;
}

TargetSequence::Regression Model::regress_bbox(
    const std::vector<double>& hidden) const {
  if (static_cast<int>(hidden.size()) != config_.width) {
    raise(ErrorCode::InvalidArgument, "hidden state width mismatch");
  }
  Runner run{config_, layout_, theta_.data(), nullptr};
  Mat h(1, config_.width);
  std::copy(hidden.begin(), hidden.end(), h.row(0));
  Mat out = run.box_head(h);
  return TargetSequence::Regression{out(0, 0), out(0, 1), out(0, 2), out(0, 3)};
}

std::vector<StepPrediction> Model::predict_steps(
    const std::vector<int>& word_ids, const AttentionMask& mask,
    const TargetSequence& target) const {
  Runner run{config_, layout_, theta_.data(), nullptr};
  run.validate_target(target);
  EncTrace enc;
  run.encode(word_ids, mask, enc);
  std::vector<int> input_ids;
  input_ids.push_back(begin_token(config_.grid));
  for (std::size_t i = 0; i + 1 < target.tokens.size(); ++i) {
    input_ids.push_back(target.tokens[i]);
  }
  DecTrace dec;
  run.decode(enc.states, input_ids, dec);
  int objects = static_cast<int>(target.tokens.size()) - 1;
  run.regression_forward(dec, objects);
  std::vector<StepPrediction> steps(target.tokens.size());
  for (int p = 0; p < dec.logits.rows; ++p) {
    const double* lr = dec.logits.row(p);
    int n = dec.logits.cols;
    double best = lr[0];
    for (int j = 1; j < n; ++j) best = std::max(best, lr[j]);
    double denom = 0.0;
    for (int j = 0; j < n; ++j) denom += std::exp(lr[j] - best);
    auto& step = steps[static_cast<std::size_t>(p)];
    step.probs.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      step.probs[static_cast<std::size_t>(j)] = std::exp(lr[j] - best) / denom;
    }
    if (p < objects) {
      const double* o = dec.reg_out.row(p);
      step.reg = TargetSequence::Regression{o[0], o[1], o[2], o[3]};
    }
  }
  return steps;
}

LossBreakdown Model::loss(const std::vector<TrainSample>& batch,
                          std::uint64_t* sign_hash) const {
  if (batch.empty()) {
    raise(ErrorCode::InvalidArgument, "loss needs a non-empty batch");
  }
  SignHasher hasher;
  Runner run{config_, layout_, theta_.data(),
             sign_hash != nullptr ? &hasher : nullptr};
  double cls = 0.0;
  double reg = 0.0;
  for (const TrainSample& s : batch) {
    Runner::SampleEval ev;
    run.sample_forward(s, ev);
    cls += ev.classification;
    reg += ev.regression;
  }
  double n = static_cast<double>(batch.size());
  LossBreakdown out;
  out.classification = cls / n;
  out.regression = reg / n;
  out.total = out.classification + config_.loss_balance * out.regression;
  if (!std::isfinite(out.total)) {
    raise(ErrorCode::Numeric, "loss is not finite");
  }
  if (sign_hash != nullptr) *sign_hash = hasher.state;
  return out;
}

LossBreakdown Model::loss_and_grad(const std::vector<TrainSample>& batch,
                                   std::vector<double>& grad) const {
  if (batch.empty()) {
    raise(ErrorCode::InvalidArgument, "loss needs a non-empty batch");
  }
  grad.assign(theta_.size(), 0.0);
  Runner run{config_, layout_, theta_.data(), nullptr};
  double cls = 0.0;
  double reg = 0.0;
  for (const TrainSample& s : batch) {
    Runner::SampleEval ev;
    run.sample_forward(s, ev);
    cls += ev.classification;
    reg += ev.regression;
    run.sample_backward(s, ev, grad.data());
  }
  double n = static_cast<double>(batch.size());
  for (double& g : grad) g /= n;
  LossBreakdown out;
  out.classification = cls / n;
  out.regression = reg / n;
  out.total = out.classification + config_.loss_balance * out.regression;
  if (!std::isfinite(out.total)) {
    raise(ErrorCode::Numeric, "loss is not finite");
  }
  return out;
}

Layout Model::generate(const std::vector<int>& word_ids,
                       const AttentionMask& mask) const {
  Mat states = encode_text(word_ids, mask);
  int end = end_token(config_.grid);
  TargetSequence seq;
  std::vector<int> prefix;
  while (static_cast<int>(prefix.size()) < config_.max_objects) {
    DecodeStepResult r = decode_step(states, prefix);
    int best = 0;
    for (int j = 1; j < static_cast<int>(r.logits.size()); ++j) {
      if (r.logits[static_cast<std::size_t>(j)] >
          r.logits[static_cast<std::size_t>(best)]) {
        best = j;
      }
    }
    if (best == end) break;
    seq.tokens.push_back(best);
    seq.regressions.push_back(regress_bbox(r.hidden));
    prefix.push_back(best);
  }
  seq.tokens.push_back(end);
  return sequence_to_layout(seq, config_.grid);
}

LossBreakdown layout_loss(const std::vector<StepPrediction>& steps,
                          const TargetSequence& target, double lambda) {
  if (steps.size() != target.tokens.size()) {
    raise(ErrorCode::InvalidArgument,
          "prediction and target step counts differ");
  }
  if (target.tokens.empty()) {
    raise(ErrorCode::InvalidArgument, "target sequence has no tokens");
  }
  if (target.regressions.size() != target.tokens.size() - 1) {
    raise(ErrorCode::InvalidArgument,
          "target regression count does not match the object count");
  }
  double cls = 0.0;
  double reg = 0.0;
  for (std::size_t p = 0; p < steps.size(); ++p) {
    int y = target.tokens[p];
    const auto& probs = steps[p].probs;
    if (y < 0 || y >= static_cast<int>(probs.size())) {
      raise(ErrorCode::Bounds, "target class outside the probability vector");
    }
    double q = probs[static_cast<std::size_t>(y)];
    if (!(q > 0.0)) {
      raise(ErrorCode::Numeric, "target class has zero probability");
    }
    cls += -std::log(q);
    if (p + 1 < steps.size()) {
      const auto& t = target.regressions[p];
      const auto& o = steps[p].reg;
      double ex = o.fx - t.fx;
      double ey = o.fy - t.fy;
      double ew = std::sqrt(o.fw) - std::sqrt(t.fw);
      double eh = std::sqrt(o.fh) - std::sqrt(t.fh);
      reg += ex * ex + ey * ey + ew * ew + eh * eh;
    }
  }
  LossBreakdown out;
  out.classification = cls;
  out.regression = reg;
  out.total = cls + lambda * reg;
  return out;
}

LossBreakdown train_step(Model& model, const std::vector<TrainSample>& batch,
                         AdamState& state) {
  std::size_t n = model.param_count();
  if (state.m.size() != n) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
    state.step = 0;
  }
  std::vector<double> grad;
  LossBreakdown lb = model.loss_and_grad(batch, grad);
  state.step += 1;
  double correct1 =
      1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double correct2 =
      1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  std::vector<double>& theta = model.params();
  for (std::size_t i = 0; i < n; ++i) {
    double g = grad[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    double mhat = state.m[i] / correct1;
    double vhat = state.v[i] / correct2;
    theta[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
  }
  return lb;
}

GradCheckReport compare_gradients(
    std::vector<double>& params, const std::vector<double>& analytic,
    const std::function<double(std::uint64_t*)>& eval, double epsilon) {
  if (params.size() != analytic.size()) {
    raise(ErrorCode::InvalidArgument,
          "analytic gradient size does not match the parameter count");
  }
  if (!(epsilon > 0.0)) {
    raise(ErrorCode::InvalidArgument, "difference step must be positive");
  }
  GradCheckReport rep;
  for (std::size_t i = 0; i < params.size(); ++i) {
    double eps = epsilon;
    double numeric = 0.0;
    for (int attempt = 0;; ++attempt) {
      double saved = params[i];
      std::uint64_t hash_plus = 0;
      std::uint64_t hash_minus = 0;
      params[i] = saved + eps;
      double loss_plus = eval(&hash_plus);
      params[i] = saved - eps;
      double loss_minus = eval(&hash_minus);
      params[i] = saved;
      numeric = (loss_plus - loss_minus) / (2.0 * eps);
      if (hash_plus == hash_minus || attempt >= 3) break;
      eps /= 8.0;  // a rectifier flipped inside the interval; shrink it
    }
    double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-4});
    double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > rep.max_rel_error) {
      rep.max_rel_error = rel;
      rep.worst_index = i;
      rep.analytic = analytic[i];
      rep.numeric = numeric;
    }
  }
  return rep;
}

GradCheckReport grad_check(Model& model, const std::vector<TrainSample>& batch,
                           double epsilon) {
  std::vector<double> grad;
  model.loss_and_grad(batch, grad);
  auto eval = [&model, &batch](std::uint64_t* hash) {
    return model.loss(batch, hash).total;
  };
  return compare_gradients(model.params(), grad, eval, epsilon);
}

using wire::get_f32;
using wire::get_u32;
using wire::get_u64;
using wire::put_f32;
using wire::put_u32;
using wire::put_u64;

void save_model(const Model& model, const std::string& path) {
  const ModelConfig& c = model.config();
  std::string out;
  out.reserve(64 + model.param_count() * 4);
  out += "LTL1";
  put_u32(out, 1);  // container version
  put_u32(out, static_cast<std::uint32_t>(c.width));
  put_u32(out, static_cast<std::uint32_t>(c.encoder_layers));
  put_u32(out, static_cast<std::uint32_t>(c.decoder_layers));
  put_u32(out, static_cast<std::uint32_t>(c.heads));
  put_u32(out, static_cast<std::uint32_t>(c.ffn()));
  put_u32(out, static_cast<std::uint32_t>(c.reg()));
  put_u32(out, static_cast<std::uint32_t>(c.vocab_size));
  put_u32(out, static_cast<std::uint32_t>(c.grid.resolution));
  put_u32(out, static_cast<std::uint32_t>(c.grid.categories));
  put_u32(out, static_cast<std::uint32_t>(c.max_objects));
  put_f32(out, static_cast<float>(c.grid.frame.width));
  put_f32(out, static_cast<float>(c.grid.frame.height));
  put_f32(out, static_cast<float>(c.loss_balance));
  put_u64(out, c.seed);
  put_u64(out, static_cast<std::uint64_t>(model.param_count()));
  for (double p : model.params()) put_f32(out, static_cast<float>(p));
  wire::write_file(path, out);
}

Model load_model(const std::string& path) {
  std::string data = wire::read_file(path);
  if (data.size() < 4 || data.compare(0, 4, "LTL1") != 0) {
    raise(ErrorCode::Parse, "not a model checkpoint: bad magic");
  }
  std::size_t pos = 4;
  std::uint32_t version = get_u32(data, pos);
  if (version != 1) {
    raise(ErrorCode::Parse, "unsupported checkpoint version");
  }
  ModelConfig c;
  c.width = static_cast<int>(get_u32(data, pos));
  c.encoder_layers = static_cast<int>(get_u32(data, pos));
  c.decoder_layers = static_cast<int>(get_u32(data, pos));
  c.heads = static_cast<int>(get_u32(data, pos));
  c.ffn_width = static_cast<int>(get_u32(data, pos));
  c.reg_width = static_cast<int>(get_u32(data, pos));
  c.vocab_size = static_cast<int>(get_u32(data, pos));
  c.grid.resolution = static_cast<int>(get_u32(data, pos));
  c.grid.categories = static_cast<int>(get_u32(data, pos));
  c.max_objects = static_cast<int>(get_u32(data, pos));
  c.grid.frame.width = static_cast<double>(get_f32(data, pos));
  c.grid.frame.height = static_cast<double>(get_f32(data, pos));
  c.loss_balance = static_cast<double>(get_f32(data, pos));
  c.seed = get_u64(data, pos);
  std::uint64_t count = get_u64(data, pos);
  Model model(c);
  if (count != model.param_count()) {
    raise(ErrorCode::Parse,
          "checkpoint parameter count does not match its configuration");
  }
  if (pos + count * 4 != data.size()) {
    raise(ErrorCode::Parse, "checkpoint size does not match its header");
  }
  std::vector<double>& theta = model.params();
  for (std::uint64_t i = 0; i < count; ++i) {
    theta[static_cast<std::size_t>(i)] =
        static_cast<double>(get_f32(data, pos));
  }
  return model;
}

}  // namespace layoutkit
