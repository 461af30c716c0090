#pragma once

#include "egomo/nn/params.hpp"

#include <cmath>
#include <string>

namespace egomo::nn {

// ---- elementwise activations (derivative taken at the pre-activation) ----

template <class S>
MatX<S> gelu(const MatX<S>& x) {
  const S k = static_cast<S>(0.7978845608028654);  // sqrt(2/pi)
  return x.unaryExpr([k](S v) {
    const S t = std::tanh(k * (v + S(0.044715) * v * v * v));
    return S(0.5) * v * (S(1) + t);
  });
}

template <class S>
MatX<S> gelu_backward(const MatX<S>& pre, const MatX<S>& dy) {
  const S k = static_cast<S>(0.7978845608028654);
  MatX<S> dx = pre;
  for (Eigen::Index j = 0; j < pre.cols(); ++j)
    for (Eigen::Index i = 0; i < pre.rows(); ++i) {
      const S v = pre(i, j);
      const S u = k * (v + S(0.044715) * v * v * v);
      const S t = std::tanh(u);
      const S du = k * (S(1) + S(3) * S(0.044715) * v * v);
      dx(i, j) = dy(i, j) * (S(0.5) * (S(1) + t) + S(0.5) * v * (S(1) - t * t) * du);
    }
  return dx;
}

template <class S>
MatX<S> silu(const MatX<S>& x) {
  return x.unaryExpr([](S v) { return v / (S(1) + std::exp(-v)); });
}

template <class S>
MatX<S> silu_backward(const MatX<S>& pre, const MatX<S>& dy) {
  MatX<S> dx = pre;
  for (Eigen::Index j = 0; j < pre.cols(); ++j)
    for (Eigen::Index i = 0; i < pre.rows(); ++i) {
      const S sg = S(1) / (S(1) + std::exp(-pre(i, j)));
      dx(i, j) = dy(i, j) * sg * (S(1) + pre(i, j) * (S(1) - sg));
    }
  return dx;
}

template <class S>
MatX<S> relu(const MatX<S>& x) {
  return x.cwiseMax(S(0));
}

template <class S>
MatX<S> relu_backward(const MatX<S>& pre, const MatX<S>& dy) {
  return (pre.array() > S(0)).select(dy, MatX<S>::Zero(dy.rows(), dy.cols()));
}

// ---- dense layer: y = x * W^T + b, x rows are samples/tokens ----

template <class S>
struct Linear {
  int w = -1, b = -1;
  Eigen::Index in = 0, out = 0;

  void init(ParamStore<S>& ps, const std::string& name, Eigen::Index in_dim,
            Eigen::Index out_dim) {
    in = in_dim;
    out = out_dim;
    w = ps.add(name + ".w", out, in);
    b = ps.add(name + ".b", out, 1);
  }

  MatX<S> forward(const ParamStore<S>& ps, const MatX<S>& x) const {
    MatX<S> y = x * ps.mat(w).transpose();
    y.rowwise() += ps.mat(b).col(0).transpose();
    return y;
  }

  MatX<S> backward(const ParamStore<S>& ps, VecX<S>& gbuf, const MatX<S>& x,
                   const MatX<S>& dy) const {
    ps.in(gbuf, w).noalias() += dy.transpose() * x;
    ps.in(gbuf, b).col(0) += dy.colwise().sum().transpose();
    return dy * ps.mat(w);
  }
};

// ---- layer norm over each row, no learned affine ----

template <class S>
struct LayerNormCache {
  MatX<S> normalized;   // the output
  VecX<S> inv_std;      // per row
};

template <class S>
MatX<S> layer_norm(const MatX<S>& x, LayerNormCache<S>& cache, S eps = S(1e-6)) {
  const Eigen::Index n = x.rows(), d = x.cols();
  cache.normalized.resize(n, d);
  cache.inv_std.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const S mu = x.row(i).mean();
    const S var = (x.row(i).array() - mu).square().mean();
    const S r = S(1) / std::sqrt(var + eps);
    cache.inv_std(i) = r;
    cache.normalized.row(i) = (x.row(i).array() - mu) * r;
  }
  return cache.normalized;
}

template <class S>
MatX<S> layer_norm_backward(const LayerNormCache<S>& cache, const MatX<S>& dy) {
  const Eigen::Index n = dy.rows(), d = dy.cols();
  MatX<S> dx(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto y = cache.normalized.row(i).array();
    const auto g = dy.row(i).array();
    const S gmean = g.mean();
    const S gymean = (g * y).mean();
    dx.row(i) = (cache.inv_std(i) * (g - gmean - y * gymean)).matrix();
  }
  return dx;
}

}  // namespace egomo::nn
