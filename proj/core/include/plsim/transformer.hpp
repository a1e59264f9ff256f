#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace plsim::nn {

/// Flat parameter storage, aligned for the widest vector unit; every tensor
/// inside starts on an aligned boundary.
template <typename Scalar>
using ParamVector = std::vector<Scalar, Eigen::aligned_allocator<Scalar>>;

struct TransformerShape {
  int vocab = 0;
  int dim = 64;
  int layers = 2;
  int heads = 4;
  int ffn = 256;
  int max_positions = 64;

  void validate() const;
  friend bool operator==(const TransformerShape&, const TransformerShape&) = default;
};

/// A masked-LM training batch of `batch` sequences of `length` ids each.
struct MlmBatch {
  int batch = 0;
  int length = 0;
  std::vector<int> inputs;       // batch * length ids, row-major
  std::vector<int> target_rows;  // flattened positions that carry a loss
  std::vector<int> target_ids;   // original id at each target row
};

/// Bidirectional pre-LayerNorm transformer encoder with a linear masked-LM
/// head. All parameters live in one flat vector so optimizers, checkpoints
/// and finite-difference checks can treat them uniformly.
template <typename Scalar>
class Transformer {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  struct LayerOffsets {
    std::size_t ln1_g, ln1_b, w_qkv, b_qkv, w_o, b_o, ln2_g, ln2_b, w_1, b_1, w_2, b_2;
  };
  struct Offsets {
    std::size_t tok_emb, pos_emb;
    std::vector<LayerOffsets> layers;
    std::size_t lnf_g, lnf_b, w_out, b_out;
    std::size_t total;
  };

  Transformer() = default;
  explicit Transformer(TransformerShape shape);

  const TransformerShape& shape() const { return shape_; }
  const Offsets& offsets() const { return offsets_; }
  ParamVector<Scalar>& parameters() { return params_; }
  const ParamVector<Scalar>& parameters() const { return params_; }

  /// Normal(0, 0.02) weights, unit LayerNorm gains, zero biases. Rows of the
  /// token embedding and columns of the output projection are seeded from
  /// their piece strings, so models sharing a seed start identical on every
  /// piece they have in common regardless of id assignment.
  void initialize(std::uint64_t seed, std::span<const std::string> piece_strings);

  /// Hidden states for one sequence (ids.size() <= max_positions).
  /// layer == shape().layers selects the final normalized output; smaller
  /// values select the residual stream after that many blocks.
  Matrix hidden_states(std::span<const int> ids, int layer) const;

  /// Mean cross-entropy over the batch's target rows. When `grad` is given
  /// it must have parameters().size() entries; the gradient is added to it.
  Scalar mlm_loss(const MlmBatch& batch, ParamVector<Scalar>* grad) const;

 private:
  struct LayerCache;
  struct Cache;

  Matrix forward(std::span<const int> ids, int batch, int length, int stop_layer, Cache* cache) const;

  TransformerShape shape_;
  Offsets offsets_{};
  ParamVector<Scalar> params_;
};

/// AdamW with decoupled weight decay on matrices only.
template <typename Scalar>
class AdamW {
 public:
  AdamW() = default;
  AdamW(std::size_t size, std::vector<bool> decay_mask);

  void step(ParamVector<Scalar>& params, const ParamVector<Scalar>& grad, double lr);

  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;

 private:
  ParamVector<Scalar> m_, v_;
  std::vector<bool> decay_;
  long t_ = 0;
};

/// Which parameters are weight matrices (eligible for weight decay).
template <typename Scalar>
std::vector<bool> matrix_mask(const Transformer<Scalar>& model);

extern template class Transformer<float>;
extern template class Transformer<double>;
extern template class AdamW<float>;
extern template class AdamW<double>;

}  // namespace plsim::nn
