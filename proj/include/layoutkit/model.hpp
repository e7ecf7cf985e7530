#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "layoutkit/geometry.hpp"
#include "layoutkit/sequence.hpp"
#include "layoutkit/tensor.hpp"

namespace layoutkit {

// Encoder-decoder over word ids and joint layout tokens. Sizes small enough
// that everything runs on one CPU core in doubles.
struct ModelConfig {
  int width = 32;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int heads = 4;
  int ffn_width = 0;  // 0 picks 4 * width
  int reg_width = 0;  // 0 picks width
  int vocab_size = 0;
  GridSpec grid;
  int max_objects = 16;
  double loss_balance = 2.0;
  std::uint64_t seed = 1;

  int ffn() const { return ffn_width > 0 ? ffn_width : 4 * width; }
  int reg() const { return reg_width > 0 ? reg_width : width; }
  // Joint cells plus the end marker; the start marker is input-only.
  int target_classes() const { return grid.joint_classes() + 1; }
  int decoder_vocab() const { return grid.joint_classes() + 2; }

  void validate() const;
};

struct TensorRef {
  std::size_t offset = 0;
  int rows = 0;
  int cols = 1;

  std::size_t count() const {
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }
};

struct AttnRefs {
  TensorRef norm_gain, norm_bias;
  TensorRef query_w, query_b;
  TensorRef key_w, key_b;
  TensorRef value_w, value_b;
  TensorRef out_w, out_b;
};

struct FfnRefs {
  TensorRef norm_gain, norm_bias;
  TensorRef in_w, in_b;
  TensorRef out_w, out_b;
};

// Offsets of every tensor inside the flat parameter vector. Checkpoints write
// the flat vector as-is, so this order is the serialization order.
struct ParamLayout {
  struct EncoderLayer {
    AttnRefs attn;
    FfnRefs ffn;
  };
  struct DecoderLayer {
    AttnRefs self_attn;
    AttnRefs cross_attn;
    FfnRefs ffn;
  };

  TensorRef text_embed;
  std::vector<EncoderLayer> encoder;
  TensorRef encoder_norm_gain, encoder_norm_bias;
  TensorRef layout_embed;
  std::vector<DecoderLayer> decoder;
  TensorRef decoder_norm_gain, decoder_norm_bias;
  TensorRef class_w, class_b;
  TensorRef box1_w, box1_b;
  TensorRef box2_w, box2_b;
  TensorRef box3_w, box3_b;
  std::size_t total = 0;

  static ParamLayout build(const ModelConfig& config);
};

struct TrainSample {
  std::vector<int> caption;  // word ids
  AttentionMask mask;
  TargetSequence target;
};

struct LossBreakdown {
  double total = 0.0;
  double classification = 0.0;
  double regression = 0.0;
};

struct DecodeStepResult {
  std::vector<double> logits;  // one entry per target class
  std::vector<double> hidden;  // width entries
};

struct DecodedSequence {
  Mat logits;  // one row per input position
  Mat hidden;
};

struct StepPrediction {
  std::vector<double> probs;
  TargetSequence::Regression reg;  // meaningful at object steps only
};

// Classic interleaved sine/cosine table, row per position.
Mat position_encoding(int length, int width);

class Model {
 public:
  explicit Model(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const ParamLayout& param_layout() const { return layout_; }
  std::vector<double>& params() { return theta_; }
  const std::vector<double>& params() const { return theta_; }
  std::size_t param_count() const { return theta_.size(); }

  // One state per word; attention confined by the caption mask.
  Mat encode_text(const std::vector<int>& word_ids,
                  const AttentionMask& mask) const;

  // Teacher-forced pass over explicit decoder inputs (start marker included
  // by the caller). Position p sees inputs 0..p only.
  DecodedSequence decode_sequence(const Mat& encoder_states,
                                  const std::vector<int>& input_ids) const;

  // Logits and hidden state for the position following the given prefix of
  // already-emitted layout tokens.
  DecodeStepResult decode_step(const Mat& encoder_states,
                               const std::vector<int>& prefix) const;

  // Box head on one hidden state; all four outputs squashed into (0, 1).
  TargetSequence::Regression regress_bbox(
      const std::vector<double>& hidden) const;

  // Per-step probability vectors and box outputs under teacher forcing.
  std::vector<StepPrediction> predict_steps(const std::vector<int>& word_ids,
                                            const AttentionMask& mask,
                                            const TargetSequence& target) const;

  // Mean per-sample losses. sign_hash, when given, receives a digest of the
  // rectifier on/off pattern of the whole evaluation.
  LossBreakdown loss(const std::vector<TrainSample>& batch,
                     std::uint64_t* sign_hash = nullptr) const;
  LossBreakdown loss_and_grad(const std::vector<TrainSample>& batch,
                              std::vector<double>& grad) const;

  // Greedy decoding: argmax token per step, lowest index on ties, stop at the
  // end marker or the object cap.
  Layout generate(const std::vector<int>& word_ids,
                  const AttentionMask& mask) const;

 private:
  ModelConfig config_;
  ParamLayout layout_;
  std::vector<double> theta_;
};

// Loss on explicit per-step probabilities; the end-marker step carries no box
// term. total = classification + lambda * regression, exactly.
LossBreakdown layout_loss(const std::vector<StepPrediction>& steps,
                          const TargetSequence& target, double lambda);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long long step = 0;
  std::vector<double> m, v;
};

LossBreakdown train_step(Model& model, const std::vector<TrainSample>& batch,
                         AdamState& state);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central differences against a provided analytic gradient. eval receives a
// pointer that collects the rectifier sign pattern; when the two sides of a
// difference disagree there, the step shrinks and the pair is retried.
GradCheckReport compare_gradients(
    std::vector<double>& params, const std::vector<double>& analytic,
    const std::function<double(std::uint64_t*)>& eval, double epsilon);

GradCheckReport grad_check(Model& model, const std::vector<TrainSample>& batch,
                           double epsilon = 1e-3);

// Little-endian binary checkpoint; save -> load -> save is byte-identical.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace layoutkit
