#pragma once

#include "egomo/common.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace egomo {

// Deterministic random source. Gaussians use Box-Muller on top of
// mt19937_64 so draws are bit-identical across standard libraries;
// std::normal_distribution is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // uniform integer in [lo, hi] via rejection-free Lemire reduction
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  template <class S>
  MatX<S> gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
    MatX<S> m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = static_cast<S>(gaussian());
    return m;
  }

  template <class S>
  VecX<S> gaussian_vector(Eigen::Index n) {
    VecX<S> v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = static_cast<S>(gaussian());
    return v;
  }

  // split off an independent stream (for per-item/per-window draws)
  Rng fork() { return Rng(engine_() ^ 0x9e3779b97f4a7c15ull); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace egomo
