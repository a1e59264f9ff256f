#include "plsim/transformer.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "plsim/error.hpp"
#include "plsim/text.hpp"

namespace plsim::nn {

void TransformerShape::validate() const {
  if (vocab <= 0 || dim <= 0 || layers <= 0 || heads <= 0 || ffn <= 0 || max_positions <= 0) {
    throw EncoderError("transformer shape entries must be positive");
  }
  if (dim % heads != 0) throw EncoderError("dim must be divisible by heads");
}

namespace {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;

constexpr double kLayerNormEps = 1e-5;
constexpr double kInitStd = 0.02;

template <typename S>
void layer_norm_forward(const Mat<S>& x, const S* gain, const S* bias, Mat<S>& xhat, std::vector<S>& rstd,
                        Mat<S>& y) {
  const auto n = x.rows();
  const auto d = x.cols();
  Eigen::Map<const RowVec<S>> g(gain, d), b(bias, d);
  xhat.resize(n, d);
  y.resize(n, d);
  rstd.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const S mu = x.row(i).mean();
    const auto centered = (x.row(i).array() - mu).eval();
    const S var = centered.square().mean();
    const S r = S(1) / std::sqrt(var + S(kLayerNormEps));
    rstd[static_cast<std::size_t>(i)] = r;
    xhat.row(i) = centered * r;
    y.row(i) = xhat.row(i).array() * g.array() + b.array();
  }
}

template <typename S>
Mat<S> layer_norm_backward(const Mat<S>& dy, const Mat<S>& xhat, const std::vector<S>& rstd, const S* gain,
                           S* dgain, S* dbias) {
  const auto n = dy.rows();
  const auto d = dy.cols();
  Eigen::Map<const RowVec<S>> g(gain, d);
  Mat<S> dx(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto dxhat = (dy.row(i).array() * g.array()).eval();
    const S m1 = dxhat.mean();
    const S m2 = (dxhat * xhat.row(i).array()).mean();
    dx.row(i) = rstd[static_cast<std::size_t>(i)] * (dxhat - m1 - xhat.row(i).array() * m2);
  }
  if (dgain) {
    Eigen::Map<RowVec<S>>(dgain, d) += (dy.array() * xhat.array()).colwise().sum().matrix();
    Eigen::Map<RowVec<S>>(dbias, d) += dy.colwise().sum();
  }
  return dx;
}

// tanh approximation of GELU, applied elementwise.
template <typename S>
Mat<S> gelu(const Mat<S>& x) {
  const S c = S(0.7978845608028654);
  const auto a = x.array();
  const auto t = (c * (a + S(0.044715) * a.cube())).tanh();
  return (S(0.5) * a * (S(1) + t)).matrix();
}

template <typename S>
Mat<S> gelu_grad(const Mat<S>& x) {
  const S c = S(0.7978845608028654);
  const auto a = x.array();
  const auto t = (c * (a + S(0.044715) * a.cube())).tanh().eval();
  return (S(0.5) * (S(1) + t) + S(0.5) * a * (S(1) - t.square()) * c * (S(1) + S(3 * 0.044715) * a.square()))
      .matrix();
}

template <typename S>
void softmax_rows(Mat<S>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const S mx = m.row(i).maxCoeff();
    m.row(i) = (m.row(i).array() - mx).exp();
    m.row(i) /= m.row(i).sum();
  }
}

}  // namespace

template <typename Scalar>
struct Transformer<Scalar>::LayerCache {
  Matrix xhat1, a_in, qkv, o, xhat2, f_in, h1, g;
  std::vector<Scalar> rstd1, rstd2;
  std::vector<Matrix> probs;  // batch * heads, each length x length
};

template <typename Scalar>
struct Transformer<Scalar>::Cache {
  std::vector<LayerCache> layers;
  Matrix xhat_f;
  std::vector<Scalar> rstd_f;
};

template <typename Scalar>
Transformer<Scalar>::Transformer(TransformerShape shape) : shape_(shape) {
  shape_.validate();
  const auto d = static_cast<std::size_t>(shape_.dim);
  const auto f = static_cast<std::size_t>(shape_.ffn);
  const auto v = static_cast<std::size_t>(shape_.vocab);
  std::size_t at = 0;
  constexpr std::size_t kAlign = 64 / sizeof(Scalar);
  auto take = [&](std::size_t n) {
    at = (at + kAlign - 1) / kAlign * kAlign;
    const std::size_t off = at;
    at += n;
    return off;
  };
  offsets_.tok_emb = take(v * d);
  offsets_.pos_emb = take(static_cast<std::size_t>(shape_.max_positions) * d);
  for (int l = 0; l < shape_.layers; ++l) {
    LayerOffsets lo{};
    lo.ln1_g = take(d);
    lo.ln1_b = take(d);
    lo.w_qkv = take(d * 3 * d);
    lo.b_qkv = take(3 * d);
    lo.w_o = take(d * d);
    lo.b_o = take(d);
    lo.ln2_g = take(d);
    lo.ln2_b = take(d);
    lo.w_1 = take(d * f);
    lo.b_1 = take(f);
    lo.w_2 = take(f * d);
    lo.b_2 = take(d);
    offsets_.layers.push_back(lo);
  }
  offsets_.lnf_g = take(d);
  offsets_.lnf_b = take(d);
  offsets_.w_out = take(d * v);
  offsets_.b_out = take(v);
  offsets_.total = (at + kAlign - 1) / kAlign * kAlign;
  params_.assign(offsets_.total, Scalar(0));
}

template <typename Scalar>
void Transformer<Scalar>::initialize(std::uint64_t seed, std::span<const std::string> piece_strings) {
  if (piece_strings.size() != static_cast<std::size_t>(shape_.vocab)) {
    throw EncoderError("initialize: piece list does not match vocabulary size");
  }
  const int d = shape_.dim;
  const int v = shape_.vocab;
  std::normal_distribution<double> normal(0.0, kInitStd);
  auto fill = [&](std::size_t off, std::size_t n, const std::string& name) {
    std::mt19937_64 rng(derive_seed(seed, name));
    for (std::size_t i = 0; i < n; ++i) params_[off + i] = static_cast<Scalar>(normal(rng));
  };
  auto ones = [&](std::size_t off) { std::fill_n(params_.begin() + static_cast<long>(off), d, Scalar(1)); };

  std::fill(params_.begin(), params_.end(), Scalar(0));
  for (int i = 0; i < v; ++i) {
    std::mt19937_64 rng(derive_seed(seed, "tok\x1f" + piece_strings[static_cast<std::size_t>(i)]));
    for (int k = 0; k < d; ++k) {
      params_[offsets_.tok_emb + static_cast<std::size_t>(i * d + k)] = static_cast<Scalar>(normal(rng));
    }
    std::mt19937_64 out_rng(derive_seed(seed, "out\x1f" + piece_strings[static_cast<std::size_t>(i)]));
    for (int k = 0; k < d; ++k) {
      params_[offsets_.w_out + static_cast<std::size_t>(k * v + i)] = static_cast<Scalar>(normal(out_rng));
    }
  }
  fill(offsets_.pos_emb, static_cast<std::size_t>(shape_.max_positions * d), "pos");
  const auto ud = static_cast<std::size_t>(d);
  const auto uf = static_cast<std::size_t>(shape_.ffn);
  for (int l = 0; l < shape_.layers; ++l) {
    const auto& lo = offsets_.layers[static_cast<std::size_t>(l)];
    const std::string p = "layer" + std::to_string(l) + ".";
    ones(lo.ln1_g);
    ones(lo.ln2_g);
    fill(lo.w_qkv, ud * 3 * ud, p + "w_qkv");
    fill(lo.w_o, ud * ud, p + "w_o");
    fill(lo.w_1, ud * uf, p + "w_1");
    fill(lo.w_2, uf * ud, p + "w_2");
  }
  ones(offsets_.lnf_g);
}

template <typename Scalar>
typename Transformer<Scalar>::Matrix Transformer<Scalar>::forward(std::span<const int> ids, int batch, int length,
                                                                  int stop_layer, Cache* cache) const {
  using Map = Eigen::Map<const Matrix>;
  using VMap = Eigen::Map<const RowVec<Scalar>>;
  const int d = shape_.dim;
  const int heads = shape_.heads;
  const int dh = d / heads;
  const int f = shape_.ffn;
  const Eigen::Index n = static_cast<Eigen::Index>(batch) * length;
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));
  const Scalar* p = params_.data();

  Map tok(p + offsets_.tok_emb, shape_.vocab, d);
  Map pos(p + offsets_.pos_emb, shape_.max_positions, d);
  Matrix x(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    x.row(r) = tok.row(ids[static_cast<std::size_t>(r)]) + pos.row(r % length);
  }
  if (cache) cache->layers.resize(static_cast<std::size_t>(shape_.layers));

  for (int l = 0; l < stop_layer; ++l) {
    const auto& lo = offsets_.layers[static_cast<std::size_t>(l)];
    LayerCache local;
    LayerCache& c = cache ? cache->layers[static_cast<std::size_t>(l)] : local;

    layer_norm_forward<Scalar>(x, p + lo.ln1_g, p + lo.ln1_b, c.xhat1, c.rstd1, c.a_in);
    c.qkv.noalias() = c.a_in * Map(p + lo.w_qkv, d, 3 * d);
    c.qkv.rowwise() += VMap(p + lo.b_qkv, 3 * d);
    c.o.resize(n, d);
    if (cache) c.probs.resize(static_cast<std::size_t>(batch * heads));
    for (int b = 0; b < batch; ++b) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(b) * length;
      for (int h = 0; h < heads; ++h) {
        const auto q = c.qkv.block(r0, h * dh, length, dh);
        const auto k = c.qkv.block(r0, d + h * dh, length, dh);
        const auto v = c.qkv.block(r0, 2 * d + h * dh, length, dh);
        Matrix probs = (q * k.transpose()) * scale;
        softmax_rows<Scalar>(probs);
        c.o.block(r0, h * dh, length, dh).noalias() = probs * v;
        if (cache) c.probs[static_cast<std::size_t>(b * heads + h)] = std::move(probs);
      }
    }
    Matrix x_mid = x;
    x_mid.noalias() += c.o * Map(p + lo.w_o, d, d);
    x_mid.rowwise() += VMap(p + lo.b_o, d);

    layer_norm_forward<Scalar>(x_mid, p + lo.ln2_g, p + lo.ln2_b, c.xhat2, c.rstd2, c.f_in);
    c.h1.noalias() = c.f_in * Map(p + lo.w_1, d, f);
    c.h1.rowwise() += VMap(p + lo.b_1, f);
    c.g = gelu<Scalar>(c.h1);
    x = std::move(x_mid);
    x.noalias() += c.g * Map(p + lo.w_2, f, d);
    x.rowwise() += VMap(p + lo.b_2, d);
  }
  if (stop_layer < shape_.layers) return x;

  Matrix y;
  Matrix xhat_f;
  std::vector<Scalar> rstd_f;
  layer_norm_forward<Scalar>(x, p + offsets_.lnf_g, p + offsets_.lnf_b, xhat_f, rstd_f, y);
  if (cache) {
    cache->xhat_f = std::move(xhat_f);
    cache->rstd_f = std::move(rstd_f);
  }
  return y;
}

template <typename Scalar>
typename Transformer<Scalar>::Matrix Transformer<Scalar>::hidden_states(std::span<const int> ids, int layer) const {
  if (ids.empty()) throw EncoderError("hidden_states: empty sequence");
  if (ids.size() > static_cast<std::size_t>(shape_.max_positions)) {
    throw EncoderError("hidden_states: sequence longer than positional capacity");
  }
  if (layer < 0 || layer > shape_.layers) throw EncoderError("hidden_states: layer out of range");
  for (int id : ids) {
    if (id < 0 || id >= shape_.vocab) throw EncoderError("hidden_states: id out of range");
  }
  return forward(ids, 1, static_cast<int>(ids.size()), layer, nullptr);
}

template <typename Scalar>
Scalar Transformer<Scalar>::mlm_loss(const MlmBatch& batch, ParamVector<Scalar>* grad) const {
  using Map = Eigen::Map<const Matrix>;
  using GMap = Eigen::Map<Matrix>;
  using GVMap = Eigen::Map<RowVec<Scalar>>;
  if (batch.length <= 0 || batch.length > shape_.max_positions) throw EncoderError("mlm_loss: bad sequence length");
  if (batch.inputs.size() != static_cast<std::size_t>(batch.batch * batch.length)) {
    throw EncoderError("mlm_loss: input size mismatch");
  }
  if (batch.target_rows.empty() || batch.target_rows.size() != batch.target_ids.size()) {
    throw EncoderError("mlm_loss: no targets");
  }
  if (grad && grad->size() != params_.size()) throw EncoderError("mlm_loss: gradient size mismatch");

  const int d = shape_.dim;
  const int heads = shape_.heads;
  const int dh = d / heads;
  const int f = shape_.ffn;
  const int v = shape_.vocab;
  const int length = batch.length;
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));
  const Scalar* p = params_.data();

  Cache cache;
  const Matrix y = forward(batch.inputs, batch.batch, length, shape_.layers, grad ? &cache : nullptr);

  const auto m = static_cast<Eigen::Index>(batch.target_rows.size());
  Matrix ysel(m, d);
  for (Eigen::Index i = 0; i < m; ++i) ysel.row(i) = y.row(batch.target_rows[static_cast<std::size_t>(i)]);
  Matrix logits = ysel * Map(p + offsets_.w_out, d, v);
  logits.rowwise() += Eigen::Map<const RowVec<Scalar>>(p + offsets_.b_out, v);

  double loss = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Scalar mx = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - mx).exp();
    const Scalar sum = logits.row(i).sum();
    logits.row(i) /= sum;  // now probabilities
    const Scalar pt = logits(i, batch.target_ids[static_cast<std::size_t>(i)]);
    loss -= std::log(static_cast<double>(std::max(pt, std::numeric_limits<Scalar>::min())));
  }
  loss /= static_cast<double>(m);
  if (!grad) return static_cast<Scalar>(loss);

  Scalar* g = grad->data();
  Matrix dz = std::move(logits);
  for (Eigen::Index i = 0; i < m; ++i) dz(i, batch.target_ids[static_cast<std::size_t>(i)]) -= Scalar(1);
  dz /= static_cast<Scalar>(m);
  GMap(g + offsets_.w_out, d, v).noalias() += ysel.transpose() * dz;
  GVMap(g + offsets_.b_out, v) += dz.colwise().sum();
  const Matrix dysel = dz * Map(p + offsets_.w_out, d, v).transpose();
  Matrix dy = Matrix::Zero(y.rows(), d);
  for (Eigen::Index i = 0; i < m; ++i) dy.row(batch.target_rows[static_cast<std::size_t>(i)]) += dysel.row(i);

  Matrix dx = layer_norm_backward<Scalar>(dy, cache.xhat_f, cache.rstd_f, p + offsets_.lnf_g, g + offsets_.lnf_g,
                                          g + offsets_.lnf_b);

  for (int l = shape_.layers - 1; l >= 0; --l) {
    const auto& lo = offsets_.layers[static_cast<std::size_t>(l)];
    const LayerCache& c = cache.layers[static_cast<std::size_t>(l)];

    GMap(g + lo.w_2, f, d).noalias() += c.g.transpose() * dx;
    GVMap(g + lo.b_2, d) += dx.colwise().sum();
    Matrix dh1 = dx * Map(p + lo.w_2, f, d).transpose();
    dh1.array() *= gelu_grad<Scalar>(c.h1).array();
    GMap(g + lo.w_1, d, f).noalias() += c.f_in.transpose() * dh1;
    GVMap(g + lo.b_1, f) += dh1.colwise().sum();
    const Matrix dfin = dh1 * Map(p + lo.w_1, d, f).transpose();
    Matrix dx_mid = dx + layer_norm_backward<Scalar>(dfin, c.xhat2, c.rstd2, p + lo.ln2_g, g + lo.ln2_g, g + lo.ln2_b);

    GMap(g + lo.w_o, d, d).noalias() += c.o.transpose() * dx_mid;
    GVMap(g + lo.b_o, d) += dx_mid.colwise().sum();
    const Matrix d_o = dx_mid * Map(p + lo.w_o, d, d).transpose();

    Matrix dqkv(c.qkv.rows(), 3 * d);
    for (int b = 0; b < batch.batch; ++b) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(b) * length;
      for (int h = 0; h < heads; ++h) {
        const Matrix& probs = c.probs[static_cast<std::size_t>(b * heads + h)];
        const auto q = c.qkv.block(r0, h * dh, length, dh);
        const auto k = c.qkv.block(r0, d + h * dh, length, dh);
        const auto vv = c.qkv.block(r0, 2 * d + h * dh, length, dh);
        const auto dob = d_o.block(r0, h * dh, length, dh);
        Matrix dp = dob * vv.transpose();
        dqkv.block(r0, 2 * d + h * dh, length, dh).noalias() = probs.transpose() * dob;
        const auto row_dot = (dp.array() * probs.array()).rowwise().sum().eval();
        Matrix ds = (probs.array() * (dp.array().colwise() - row_dot)).matrix();
        dqkv.block(r0, h * dh, length, dh).noalias() = (ds * k) * scale;
        dqkv.block(r0, d + h * dh, length, dh).noalias() = (ds.transpose() * q) * scale;
      }
    }
    GMap(g + lo.w_qkv, d, 3 * d).noalias() += c.a_in.transpose() * dqkv;
    GVMap(g + lo.b_qkv, 3 * d) += dqkv.colwise().sum();
    const Matrix da_in = dqkv * Map(p + lo.w_qkv, d, 3 * d).transpose();
    dx = dx_mid + layer_norm_backward<Scalar>(da_in, c.xhat1, c.rstd1, p + lo.ln1_g, g + lo.ln1_g, g + lo.ln1_b);
  }

  GMap gtok(g + offsets_.tok_emb, v, d);
  GMap gpos(g + offsets_.pos_emb, shape_.max_positions, d);
  for (Eigen::Index r = 0; r < dx.rows(); ++r) {
    gtok.row(batch.inputs[static_cast<std::size_t>(r)]) += dx.row(r);
    gpos.row(r % length) += dx.row(r);
  }
  return static_cast<Scalar>(loss);
}

template <typename Scalar>
AdamW<Scalar>::AdamW(std::size_t size, std::vector<bool> decay_mask)
    : m_(size, Scalar(0)), v_(size, Scalar(0)), decay_(std::move(decay_mask)) {
  if (decay_.size() != size) throw EncoderError("AdamW: decay mask size mismatch");
}

template <typename Scalar>
void AdamW<Scalar>::step(ParamVector<Scalar>& params, const ParamVector<Scalar>& grad, double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw EncoderError("AdamW: size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
  const auto b1 = static_cast<Scalar>(beta1), b2 = static_cast<Scalar>(beta2);
  const auto step = static_cast<Scalar>(lr / c1);
  const auto inv_c2 = static_cast<Scalar>(1.0 / c2);
  const auto e = static_cast<Scalar>(eps);
  const auto decay = static_cast<Scalar>(lr * weight_decay);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (Scalar(1) - b1) * grad[i];
    v_[i] = b2 * v_[i] + (Scalar(1) - b2) * grad[i] * grad[i];
    if (decay_[i]) params[i] -= decay * params[i];
    params[i] -= step * m_[i] / (std::sqrt(v_[i] * inv_c2) + e);
  }
}

template <typename Scalar>
std::vector<bool> matrix_mask(const Transformer<Scalar>& model) {
  const auto& o = model.offsets();
  const auto& s = model.shape();
  const auto d = static_cast<std::size_t>(s.dim);
  const auto f = static_cast<std::size_t>(s.ffn);
  std::vector<bool> mask(o.total, false);
  auto mark = [&](std::size_t off, std::size_t n) { std::fill_n(mask.begin() + static_cast<long>(off), n, true); };
  mark(o.tok_emb, static_cast<std::size_t>(s.vocab) * d);
  mark(o.pos_emb, static_cast<std::size_t>(s.max_positions) * d);
  for (const auto& lo : o.layers) {
    mark(lo.w_qkv, d * 3 * d);
    mark(lo.w_o, d * d);
    mark(lo.w_1, d * f);
    mark(lo.w_2, f * d);
  }
  mark(o.w_out, d * static_cast<std::size_t>(s.vocab));
  return mask;
}

template class Transformer<float>;
template class Transformer<double>;
template class AdamW<float>;
template class AdamW<double>;
template std::vector<bool> matrix_mask(const Transformer<float>&);
template std::vector<bool> matrix_mask(const Transformer<double>&);

}  // namespace plsim::nn
