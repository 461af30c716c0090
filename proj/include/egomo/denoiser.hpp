#pragma once

#include "egomo/diffusion.hpp"
#include "egomo/nn/adam.hpp"
#include "egomo/nn/layers.hpp"
#include "egomo/parallel.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace egomo {

struct DenoiserConfig {
  int latent_dim = 512;
  int layers = 8;
  int heads = 8;
  int mlp_ratio = 4;
  int frames = 240;       // window length T, one token per frame
  int feat_dim = 138;     // F = 23 * 6
  int cond_dim = 911;     // head features + image embedding + pc latent
  int schedule_steps = 1000;
  std::uint64_t seed = 0;

  void validate() const {
    if (latent_dim <= 0 || layers <= 0 || heads <= 0 || mlp_ratio <= 0 || frames <= 0 ||
        feat_dim <= 0 || cond_dim <= 0 || schedule_steps <= 0)
      throw BadConfig("denoiser config: all sizes must be positive");
    if (latent_dim % heads != 0)
      throw BadConfig("denoiser config: latent_dim must be divisible by heads");
  }

  static DenoiserConfig toy() {
    DenoiserConfig c;
    c.latent_dim = 64;
    c.layers = 2;
    c.heads = 4;
    return c;
  }
};

// fixed sinusoidal features over positions 0..n-1
template <class S>
MatX<S> sinusoid_table(Eigen::Index n, Eigen::Index dim) {
  MatX<S> t(n, dim);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i / 2) / static_cast<double>(dim));
      const double v = static_cast<double>(p) * freq;
      t(p, i) = static_cast<S>((i % 2 == 0) ? std::sin(v) : std::cos(v));
    }
  return t;
}

namespace detail {

template <class S>
struct BlockCache {
  MatX<S> x_in;
  nn::LayerNormCache<S> ln1, ln2;
  MatX<S> a_in;             // modulated attention input
  MatX<S> qkv;              // T x 3d
  std::vector<MatX<S>> p;   // per-head softmax rows
  MatX<S> attn_concat;      // heads merged, pre projection
  MatX<S> attn_out;
  MatX<S> x_mid;
  MatX<S> m_in;             // modulated mlp input
  MatX<S> mlp1_pre, mlp1_post, mlp_out;
};

}  // namespace detail

template <class S>
struct DenoiserCache {
  int tau = 0;
  MatX<S> input;            // T x (F + cond)
  MatX<S> h1_pre, h1_post;  // input mlp
  MatX<S> temb_sin;         // 1 x d
  MatX<S> t1_pre, t1_post, temb;
  std::vector<detail::BlockCache<S>> blocks;
  nn::LayerNormCache<S> ln_f;
  MatX<S> f_in;             // modulated final tokens
  std::vector<MatX<S>> mods;  // per block 1 x 6d, plus final 1 x 2d at the end
};

// Transformer denoiser D(x_tau, c, tau): one token per frame, the timestep
// modulates every normalization (shift/scale/gate from the tau embedding),
// and the zero-initialized output head makes a fresh model predict zero.
template <class S>
class Denoiser {
 public:
  explicit Denoiser(const DenoiserConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int d = cfg_.latent_dim;
    input1_.init(store_, "input.l1", cfg_.feat_dim + cfg_.cond_dim, 2 * d);
    input2_.init(store_, "input.l2", 2 * d, d);
    temb1_.init(store_, "temb.l1", d, d);
    temb2_.init(store_, "temb.l2", d, d);
    blocks_.resize(cfg_.layers);
    for (int i = 0; i < cfg_.layers; ++i) {
      const std::string p = "blk" + std::to_string(i);
      blocks_[i].qkv.init(store_, p + ".qkv", d, 3 * d);
      blocks_[i].proj.init(store_, p + ".proj", d, d);
      blocks_[i].mlp1.init(store_, p + ".mlp1", d, cfg_.mlp_ratio * d);
      blocks_[i].mlp2.init(store_, p + ".mlp2", cfg_.mlp_ratio * d, d);
      blocks_[i].ada.init(store_, p + ".ada", d, 6 * d);
    }
    final_ada_.init(store_, "final.ada", d, 2 * d);
    out_.init(store_, "final.out", d, cfg_.feat_dim);
    store_.finalize();
    pos_ = sinusoid_table<S>(cfg_.frames, d);
  }

  const DenoiserConfig& config() const { return cfg_; }
  nn::ParamStore<S>& params() { return store_; }
  const nn::ParamStore<S>& params() const { return store_; }

  // deterministic for a given cfg.seed; modulation and output head start at
  // zero so blocks begin as identity and the prediction starts at zero
  void init_params(Rng* external_rng = nullptr) {
    Rng own(cfg_.seed);
    Rng& rng = external_rng ? *external_rng : own;
    store_.data().setZero();
    const double std = 0.02;
    // final.out, every .ada weight and all biases stay zero
    for (nn::Linear<S>* lin : weight_layers_()) store_.fill_normal(lin->w, rng, std);
  }

  MatX<S> denoise(const MatX<S>& x_tau, const MatX<S>& cond, int tau) const {
    DenoiserCache<S> cache;
    return forward(x_tau, cond, tau, cache);
  }

  MatX<S> forward(const MatX<S>& x_tau, const MatX<S>& cond, int tau,
                  DenoiserCache<S>& c) const {
    if (x_tau.rows() != cfg_.frames || x_tau.cols() != cfg_.feat_dim)
      throw ShapeMismatch("denoise: x_tau shape mismatch");
    if (cond.rows() != cfg_.frames || cond.cols() != cfg_.cond_dim)
      throw ShapeMismatch("denoise: condition shape mismatch");
    const int d = cfg_.latent_dim;
    c.tau = tau;
    c.mods.clear();

    c.input.resize(cfg_.frames, cfg_.feat_dim + cfg_.cond_dim);
    c.input << x_tau, cond;
    c.h1_pre = input1_.forward(store_, c.input);
    c.h1_post = nn::gelu<S>(c.h1_pre);
    MatX<S> x = input2_.forward(store_, c.h1_post) + pos_;

    c.temb_sin = timestep_embedding_(tau);
    c.t1_pre = temb1_.forward(store_, c.temb_sin);
    c.t1_post = nn::silu<S>(c.t1_pre);
    c.temb = temb2_.forward(store_, c.t1_post);

    c.blocks.assign(static_cast<std::size_t>(cfg_.layers), {});
    for (int l = 0; l < cfg_.layers; ++l) x = block_forward_(l, x, c);

    MatX<S> mod = final_ada_.forward(store_, c.temb);  // 1 x 2d
    c.mods.push_back(mod);
    nn::layer_norm<S>(x, c.ln_f);
    c.f_in = modulate_(c.ln_f.normalized, mod, 0, 1);
    return out_.forward(store_, c.f_in);
  }

  // accumulates parameter gradients into gbuf (layout of params())
  void backward(const DenoiserCache<S>& c, const MatX<S>& dy, VecX<S>& gbuf) const {
    MatX<S> d_temb = MatX<S>::Zero(1, cfg_.latent_dim);

    MatX<S> d_fin = out_.backward(store_, gbuf, c.f_in, dy);
    const MatX<S>& fmod = c.mods.back();
    MatX<S> d_fmod = MatX<S>::Zero(1, 2 * cfg_.latent_dim);
    MatX<S> d_lnf = demodulate_(c.ln_f.normalized, fmod, 0, 1, d_fin, d_fmod);
    d_temb += final_ada_.backward(store_, gbuf, c.temb, d_fmod);
    MatX<S> dx = nn::layer_norm_backward<S>(c.ln_f, d_lnf);

    for (int l = cfg_.layers - 1; l >= 0; --l) dx = block_backward_(l, c, dx, d_temb, gbuf);

    // input mlp (positional table is constant)
    MatX<S> d_h1post = input2_.backward(store_, gbuf, c.h1_post, dx);
    MatX<S> d_h1pre = nn::gelu_backward<S>(c.h1_pre, d_h1post);
    input1_.backward(store_, gbuf, c.input, d_h1pre);

    // timestep embedder
    MatX<S> d_t1post = temb2_.backward(store_, gbuf, c.t1_post, d_temb);
    MatX<S> d_t1pre = nn::silu_backward<S>(c.t1_pre, d_t1post);
    temb1_.backward(store_, gbuf, c.temb_sin, d_t1pre);
  }

 private:
  struct Block {
    nn::Linear<S> qkv, proj, mlp1, mlp2, ada;
  };

  MatX<S> timestep_embedding_(int tau) const {
    const int d = cfg_.latent_dim;
    MatX<S> e(1, d);
    for (int i = 0; i < d; ++i) {
      const double freq = std::pow(10000.0, -2.0 * (i / 2) / static_cast<double>(d));
      const double v = static_cast<double>(tau) * freq;
      e(0, i) = static_cast<S>((i % 2 == 0) ? std::sin(v) : std::cos(v));
    }
    return e;
  }

  // y = z .* (1 + scale) + shift with per-feature rows taken from mod
  MatX<S> modulate_(const MatX<S>& z, const MatX<S>& mod, int shift_slot, int scale_slot) const {
    const int d = cfg_.latent_dim;
    const auto shift = mod.row(0).segment(shift_slot * d, d);
    const auto scale = mod.row(0).segment(scale_slot * d, d);
    MatX<S> y = z;
    y.array().rowwise() *= (scale.array() + S(1));
    y.rowwise() += shift;
    return y;
  }

  // accumulates the shift/scale gradients into the matching dmod slots
  MatX<S> demodulate_(const MatX<S>& z, const MatX<S>& mod, int shift_slot, int scale_slot,
                      const MatX<S>& dy, MatX<S>& dmod) const {
    const int d = cfg_.latent_dim;
    const auto scale = mod.row(0).segment(scale_slot * d, d);
    dmod.row(0).segment(shift_slot * d, d) += dy.colwise().sum();
    dmod.row(0).segment(scale_slot * d, d) += (dy.array() * z.array()).colwise().sum().matrix();
    MatX<S> dz = dy;
    dz.array().rowwise() *= (scale.array() + S(1));
    return dz;
  }

  MatX<S> block_forward_(int l, const MatX<S>& x, DenoiserCache<S>& c) const {
    const Block& blk = blocks_[static_cast<std::size_t>(l)];
    auto& bc = c.blocks[static_cast<std::size_t>(l)];
    const int d = cfg_.latent_dim;
    const int heads = cfg_.heads;
    const int dh = d / heads;
    const Eigen::Index n = x.rows();

    bc.x_in = x;
    MatX<S> mod = blk.ada.forward(store_, c.temb);  // 1 x 6d
    c.mods.push_back(mod);

    nn::layer_norm<S>(x, bc.ln1);
    bc.a_in = modulate_(bc.ln1.normalized, mod, 0, 1);
    bc.qkv = blk.qkv.forward(store_, bc.a_in);
    bc.p.assign(static_cast<std::size_t>(heads), {});
    bc.attn_concat.resize(n, d);
    const S inv_sqrt = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
    for (int h = 0; h < heads; ++h) {
      const auto q = bc.qkv.middleCols(h * dh, dh);
      const auto k = bc.qkv.middleCols(d + h * dh, dh);
      const auto v = bc.qkv.middleCols(2 * d + h * dh, dh);
      MatX<S> scores = (q * k.transpose()) * inv_sqrt;
      // rowwise softmax with max subtraction
      for (Eigen::Index i = 0; i < n; ++i) {
        const S m = scores.row(i).maxCoeff();
        scores.row(i) = (scores.row(i).array() - m).exp();
        scores.row(i) /= scores.row(i).sum();
      }
      bc.p[static_cast<std::size_t>(h)] = scores;
      bc.attn_concat.middleCols(h * dh, dh).noalias() = scores * v;
    }
    bc.attn_out = blk.proj.forward(store_, bc.attn_concat);
    const auto gate1 = mod.row(0).segment(2 * d, d);
    bc.x_mid = bc.x_in;
    bc.x_mid.array() += bc.attn_out.array().rowwise() * gate1.array();

    nn::layer_norm<S>(bc.x_mid, bc.ln2);
    bc.m_in = modulate_(bc.ln2.normalized, mod, 3, 4);
    bc.mlp1_pre = blk.mlp1.forward(store_, bc.m_in);
    bc.mlp1_post = nn::gelu<S>(bc.mlp1_pre);
    bc.mlp_out = blk.mlp2.forward(store_, bc.mlp1_post);
    const auto gate2 = mod.row(0).segment(5 * d, d);
    MatX<S> x_out = bc.x_mid;
    x_out.array() += bc.mlp_out.array().rowwise() * gate2.array();
    return x_out;
  }

  MatX<S> block_backward_(int l, const DenoiserCache<S>& c, const MatX<S>& d_xout,
                          MatX<S>& d_temb, VecX<S>& gbuf) const {
    const Block& blk = blocks_[static_cast<std::size_t>(l)];
    const auto& bc = c.blocks[static_cast<std::size_t>(l)];
    const MatX<S>& mod = c.mods[static_cast<std::size_t>(l)];
    const int d = cfg_.latent_dim;
    const int heads = cfg_.heads;
    const int dh = d / heads;
    MatX<S> dmod = MatX<S>::Zero(1, 6 * d);

    // x_out = x_mid + gate2 .* mlp_out
    const auto gate2 = mod.row(0).segment(5 * d, d);
    dmod.row(0).segment(5 * d, d) += (d_xout.array() * bc.mlp_out.array()).colwise().sum().matrix();
    MatX<S> d_mlp_out = d_xout;
    d_mlp_out.array().rowwise() *= gate2.array();
    MatX<S> d_x_mid = d_xout;

    MatX<S> d_m1post = blk.mlp2.backward(store_, gbuf, bc.mlp1_post, d_mlp_out);
    MatX<S> d_m1pre = nn::gelu_backward<S>(bc.mlp1_pre, d_m1post);
    MatX<S> d_m_in = blk.mlp1.backward(store_, gbuf, bc.m_in, d_m1pre);

    {
      MatX<S> d_ln2y = demodulate_(bc.ln2.normalized, mod, 3, 4, d_m_in, dmod);
      d_x_mid += nn::layer_norm_backward<S>(bc.ln2, d_ln2y);
    }

    // x_mid = x_in + gate1 .* attn_out
    const auto gate1 = mod.row(0).segment(2 * d, d);
    dmod.row(0).segment(2 * d, d) += (d_x_mid.array() * bc.attn_out.array()).colwise().sum().matrix();
    MatX<S> d_attn_out = d_x_mid;
    d_attn_out.array().rowwise() *= gate1.array();
    MatX<S> d_x_in = d_x_mid;

    MatX<S> d_concat = blk.proj.backward(store_, gbuf, bc.attn_concat, d_attn_out);
    MatX<S> d_qkv = MatX<S>::Zero(bc.qkv.rows(), bc.qkv.cols());
    const S inv_sqrt = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
    for (int h = 0; h < heads; ++h) {
      const auto q = bc.qkv.middleCols(h * dh, dh);
      const auto k = bc.qkv.middleCols(d + h * dh, dh);
      const auto v = bc.qkv.middleCols(2 * d + h * dh, dh);
      const MatX<S>& p = bc.p[static_cast<std::size_t>(h)];
      const auto d_oh = d_concat.middleCols(h * dh, dh);
      MatX<S> dp = d_oh * v.transpose();
      d_qkv.middleCols(2 * d + h * dh, dh).noalias() = p.transpose() * d_oh;
      // softmax rows: ds = (dp - rowsum(dp .* p)) .* p
      MatX<S> ds = dp;
      for (Eigen::Index i = 0; i < p.rows(); ++i) {
        const S dot = dp.row(i).dot(p.row(i));
        ds.row(i) = (dp.row(i).array() - dot) * p.row(i).array();
      }
      ds *= inv_sqrt;
      d_qkv.middleCols(h * dh, dh).noalias() = ds * k;
      d_qkv.middleCols(d + h * dh, dh).noalias() = ds.transpose() * q;
    }
    MatX<S> d_a_in = blk.qkv.backward(store_, gbuf, bc.a_in, d_qkv);

    {
      MatX<S> d_ln1y = demodulate_(bc.ln1.normalized, mod, 0, 1, d_a_in, dmod);
      d_x_in += nn::layer_norm_backward<S>(bc.ln1, d_ln1y);
    }

    d_temb += blk.ada.backward(store_, gbuf, c.temb, dmod);
    return d_x_in;
  }

  std::vector<nn::Linear<S>*> weight_layers_() {
    std::vector<nn::Linear<S>*> v{&input1_, &input2_, &temb1_, &temb2_};
    for (auto& b : blocks_) {
      v.push_back(&b.qkv);
      v.push_back(&b.proj);
      v.push_back(&b.mlp1);
      v.push_back(&b.mlp2);
    }
    return v;
  }

  DenoiserConfig cfg_;
  nn::ParamStore<S> store_;
  nn::Linear<S> input1_, input2_, temb1_, temb2_, final_ada_, out_;
  std::vector<Block> blocks_;
  MatX<S> pos_;
};

// frozen per-item corruption: timestep and noise sample
template <class S>
struct DiffusionDraw {
  int tau = 1;
  MatX<S> eps;
};

template <class S>
std::vector<DiffusionDraw<S>> draw_training_noise(const std::vector<MatX<S>>& x0, Rng& rng,
                                                  const DiffusionSchedule& sched) {
  std::vector<DiffusionDraw<S>> draws(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    draws[i].tau = static_cast<int>(rng.uniform_int(1, sched.steps));
    draws[i].eps = rng.gaussian_matrix<S>(x0[i].rows(), x0[i].cols());
  }
  return draws;
}

// Mean x0-prediction MSE over a batch under fixed draws; pass grad = nullptr
// for evaluation only. Per-item work runs in parallel but gradients reduce
// in item order, so the result does not depend on the worker count.
template <class S>
double loss_and_grad_fixed(Denoiser<S>& model, const std::vector<MatX<S>>& x0,
                           const std::vector<MatX<S>>& cond,
                           const std::vector<DiffusionDraw<S>>& draws,
                           const DiffusionSchedule& sched, VecX<S>* grad, int workers = 1) {
  const std::size_t batch = x0.size();
  if (batch == 0) throw EmptyCorpus("loss_and_grad: empty batch");
  if (cond.size() != batch || draws.size() != batch)
    throw LengthMismatch("loss_and_grad: batch arrays disagree");
  std::vector<VecX<S>> item_grad(grad ? batch : 0);
  std::vector<double> item_loss(batch, 0.0);
  parallel_for(batch, workers, [&](std::size_t i) {
    const MatX<S> xt = forward_diffuse<S>(x0[i], draws[i].tau, draws[i].eps, sched);
    const double denom = static_cast<double>(batch) * static_cast<double>(x0[i].size());
    if (grad) {
      DenoiserCache<S> cache;
      const MatX<S> pred = model.forward(xt, cond[i], draws[i].tau, cache);
      const MatX<S> diff = pred - x0[i];
      item_loss[i] = static_cast<double>(diff.squaredNorm()) / denom;
      const MatX<S> dy = static_cast<S>(2.0 / denom) * diff;
      item_grad[i] = model.params().zeros_like();
      model.backward(cache, dy, item_grad[i]);
    } else {
      const MatX<S> diff = model.denoise(xt, cond[i], draws[i].tau) - x0[i];
      item_loss[i] = static_cast<double>(diff.squaredNorm()) / denom;
    }
  });
  double loss = 0.0;
  for (std::size_t i = 0; i < batch; ++i) loss += item_loss[i];
  if (grad) {
    *grad = model.params().zeros_like();
    for (std::size_t i = 0; i < batch; ++i) *grad += item_grad[i];
  }
  if (!std::isfinite(loss)) throw NonFiniteLoss("loss_and_grad: non-finite loss");
  return loss;
}

template <class S>
double loss_and_grad(Denoiser<S>& model, const std::vector<MatX<S>>& x0,
                     const std::vector<MatX<S>>& cond, Rng& rng,
                     const DiffusionSchedule& sched, VecX<S>& grad, int workers = 1) {
  const auto draws = draw_training_noise<S>(x0, rng, sched);
  return loss_and_grad_fixed<S>(model, x0, cond, draws, sched, &grad, workers);
}

struct DenoiserTrainConfig {
  int steps = 2000;
  int batch = 8;
  nn::AdamConfig adam{1e-4, 0.9, 0.999, 1e-8};
  std::uint64_t seed = 1;
  int workers = 1;
  int checkpoint_every = 0;  // 0 disables the callback
};

struct TrainLog {
  std::vector<double> loss;

  double smoothed(std::size_t from, std::size_t count) const {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = from; i < std::min(from + count, loss.size()); ++i, ++n) s += loss[i];
    return n ? s / static_cast<double>(n) : 0.0;
  }
};

// item provider: fills (x0, cond) for a dataset index
template <class S>
using WindowSource = std::function<void(std::size_t index, MatX<S>& x0, MatX<S>& cond)>;

template <class S>
TrainLog train(Denoiser<S>& model, std::size_t dataset_size, const WindowSource<S>& source,
               const DiffusionSchedule& sched, const DenoiserTrainConfig& cfg,
               const std::function<void(int step)>& checkpoint_cb = nullptr) {
  if (dataset_size == 0) throw EmptyCorpus("train: empty dataset");
  Rng rng(cfg.seed);
  nn::Adam<S> opt(cfg.adam);
  TrainLog log;
  std::vector<MatX<S>> x0(static_cast<std::size_t>(cfg.batch));
  std::vector<MatX<S>> cond(static_cast<std::size_t>(cfg.batch));
  VecX<S> grad;
  for (int step = 0; step < cfg.steps; ++step) {
    for (int b = 0; b < cfg.batch; ++b) {
      const auto idx = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(dataset_size) - 1));
      source(idx, x0[static_cast<std::size_t>(b)], cond[static_cast<std::size_t>(b)]);
    }
    const double loss = loss_and_grad<S>(model, x0, cond, rng, sched, grad, cfg.workers);
    opt.step(model.params().data(), grad);
    log.loss.push_back(loss);
    if (checkpoint_cb && cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0)
      checkpoint_cb(step + 1);
  }
  return log;
}

}  // namespace egomo
