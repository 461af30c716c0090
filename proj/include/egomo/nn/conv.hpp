#pragma once

#include "egomo/nn/layers.hpp"

#include <vector>

namespace egomo::nn {

// gather table mapping (output position, tap) -> input position or -1 (pad)
struct GatherTable {
  std::vector<int> idx;  // size positions * taps
  int positions = 0, taps = 0;

  int at(int pos, int tap) const { return idx[static_cast<std::size_t>(pos) * taps + tap]; }
};

// 3x3x3 neighborhood over an (n x n x n) grid flattened x-fastest, zero pad 1
inline GatherTable cube_neighbors(int n) {
  GatherTable t;
  t.positions = n * n * n;
  t.taps = 27;
  t.idx.assign(static_cast<std::size_t>(t.positions) * 27, -1);
  int pos = 0;
  for (int z = 0; z < n; ++z)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x, ++pos) {
        int tap = 0;
        for (int dz = -1; dz <= 1; ++dz)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx, ++tap) {
              const int xx = x + dx, yy = y + dy, zz = z + dz;
              if (xx < 0 || yy < 0 || zz < 0 || xx >= n || yy >= n || zz >= n) continue;
              t.idx[static_cast<std::size_t>(pos) * 27 + tap] = xx + n * (yy + n * zz);
            }
      }
  return t;
}

// size-k window along a length-n axis with stride s and zero pad k/2
inline GatherTable line_neighbors(int n, int k, int stride) {
  GatherTable t;
  const int pad = k / 2;
  t.positions = (n + 2 * pad - k) / stride + 1;
  t.taps = k;
  t.idx.assign(static_cast<std::size_t>(t.positions) * k, -1);
  for (int o = 0; o < t.positions; ++o)
    for (int tap = 0; tap < k; ++tap) {
      const int i = o * stride - pad + tap;
      if (i >= 0 && i < n) t.idx[static_cast<std::size_t>(o) * k + tap] = i;
    }
  return t;
}

// Convolution over gathered neighborhoods as one GEMM: activations are
// (channels x positions) matrices, the kernel is (cout x cin*taps).
template <class S>
struct Conv {
  int w = -1, b = -1;
  Eigen::Index cin = 0, cout = 0;
  int taps = 0;

  void init(ParamStore<S>& ps, const std::string& name, Eigen::Index cin_, Eigen::Index cout_,
            int taps_) {
    cin = cin_;
    cout = cout_;
    taps = taps_;
    w = ps.add(name + ".w", cout, cin * taps);
    b = ps.add(name + ".b", cout, 1);
  }

  MatX<S> im2col(const MatX<S>& x, const GatherTable& t) const {
    MatX<S> cols = MatX<S>::Zero(cin * taps, t.positions);
    for (int pos = 0; pos < t.positions; ++pos)
      for (int tap = 0; tap < taps; ++tap) {
        const int src = t.at(pos, tap);
        if (src >= 0) cols.block(tap * cin, pos, cin, 1) = x.col(src);
      }
    return cols;
  }

  MatX<S> forward(const ParamStore<S>& ps, const MatX<S>& x, const GatherTable& t,
                  MatX<S>& cols_cache) const {
    if (x.rows() != cin) throw ShapeMismatch("Conv: input channel mismatch");
    cols_cache = im2col(x, t);
    MatX<S> y = ps.mat(w) * cols_cache;
    y.colwise() += ps.mat(b).col(0);
    return y;
  }

  MatX<S> backward(const ParamStore<S>& ps, VecX<S>& gbuf, const MatX<S>& cols_cache,
                   const GatherTable& t, Eigen::Index in_positions, const MatX<S>& dy) const {
    ps.in(gbuf, w).noalias() += dy * cols_cache.transpose();
    ps.in(gbuf, b).col(0) += dy.rowwise().sum();
    const MatX<S> dcols = ps.mat(w).transpose() * dy;
    MatX<S> dx = MatX<S>::Zero(cin, in_positions);
    for (int pos = 0; pos < t.positions; ++pos)
      for (int tap = 0; tap < taps; ++tap) {
        const int src = t.at(pos, tap);
        if (src >= 0) dx.col(src) += dcols.block(tap * cin, pos, cin, 1);
      }
    return dx;
  }
};

// nearest-neighbor x2 upsampling along the position axis
template <class S>
MatX<S> upsample2(const MatX<S>& x) {
  MatX<S> y(x.rows(), x.cols() * 2);
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    y.col(2 * c) = x.col(c);
    y.col(2 * c + 1) = x.col(c);
  }
  return y;
}

template <class S>
MatX<S> upsample2_backward(const MatX<S>& dy) {
  MatX<S> dx(dy.rows(), dy.cols() / 2);
  for (Eigen::Index c = 0; c < dx.cols(); ++c) dx.col(c) = dy.col(2 * c) + dy.col(2 * c + 1);
  return dx;
}

}  // namespace egomo::nn
