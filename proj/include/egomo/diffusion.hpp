#pragma once

#include "egomo/common.hpp"
#include "egomo/rng.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace egomo {

// Signal-retention schedule alpha_tau, tau in [0, S]: alpha_0 = 1 (clean),
// alpha_S = 0 (pure noise), strictly decreasing in between.
struct DiffusionSchedule {
  int steps = 0;          // S
  Vec alpha;              // length S+1
  std::string kind;

  double a(int tau) const { return alpha[tau]; }
};

DiffusionSchedule build_schedule(int steps, const std::string& kind = "cosine");

// Coefficients of one reverse transition tau -> tau_prev. eta scales the
// stochastic part: eta = 1 is the posterior variance as derived, eta = 0 the
// deterministic limit.
struct ReverseCoeffs {
  int tau = 0, tau_prev = 0;
  double sigma2 = 0.0;  // variance of the added noise
  double c = 0.0;       // weight of the implied-noise direction
};

ReverseCoeffs reverse_coeffs(const DiffusionSchedule& sched, int tau, int tau_prev,
                             double eta = 1.0);

// Descending step indices; consecutive entries are transitions, with a final
// implicit transition to tau = 0.
struct StridedPlan {
  std::vector<int> steps;

  int denoiser_calls() const { return static_cast<int>(steps.size()); }
};

StridedPlan strided_plan(int steps, int strided_count);

// x_tau = sqrt(alpha) x0 + sqrt(1 - alpha) eps, elementwise
template <class S>
MatX<S> forward_diffuse(const MatX<S>& x0, int tau, const MatX<S>& eps,
                        const DiffusionSchedule& sched) {
  if (tau < 0 || tau > sched.steps) throw BadStepPair("forward_diffuse: tau out of range");
  if (eps.rows() != x0.rows() || eps.cols() != x0.cols())
    throw ShapeMismatch("forward_diffuse: eps shape != x0 shape");
  const S sa = static_cast<S>(std::sqrt(sched.a(tau)));
  const S sb = static_cast<S>(std::sqrt(1.0 - sched.a(tau)));
  return sa * x0 + sb * eps;
}

// x_prev = sqrt(a_prev) x0hat + c (x_tau - sqrt(a_tau) x0hat)/sqrt(1-a_tau) + sigma noise
template <class S>
MatX<S> reverse_step(const MatX<S>& x_tau, const MatX<S>& x0hat, const ReverseCoeffs& rc,
                     const DiffusionSchedule& sched, const MatX<S>* noise = nullptr) {
  if (x0hat.rows() != x_tau.rows() || x0hat.cols() != x_tau.cols())
    throw ShapeMismatch("reverse_step: x0hat shape != x_tau shape");
  const double a_tau = sched.a(rc.tau);
  const double a_prev = sched.a(rc.tau_prev);
  const S sa_prev = static_cast<S>(std::sqrt(a_prev));
  const S scale = static_cast<S>(rc.c / std::sqrt(1.0 - a_tau));
  const S sa_tau = static_cast<S>(std::sqrt(a_tau));
  MatX<S> x = sa_prev * x0hat + scale * (x_tau - sa_tau * x0hat);
  if (rc.sigma2 > 0.0) {
    if (noise == nullptr) throw BadStepPair("reverse_step: sigma > 0 requires noise");
    if (noise->rows() != x_tau.rows() || noise->cols() != x_tau.cols())
      throw ShapeMismatch("reverse_step: noise shape mismatch");
    x += static_cast<S>(std::sqrt(rc.sigma2)) * (*noise);
  }
  return x;
}

template <class S>
using DenoiseFn = std::function<MatX<S>(const MatX<S>& x_tau, const MatX<S>& cond, int tau)>;

template <class S>
using InpaintHook = std::function<void(MatX<S>& x0hat)>;

// Full strided reverse pass from pure noise. The hook edits x0hat after
// every model evaluation, before the reverse transition.
template <class S>
MatX<S> sample(const DenoiseFn<S>& denoise_fn, const MatX<S>& cond, Eigen::Index feat_dim,
               const StridedPlan& plan, const DiffusionSchedule& sched, Rng& rng,
               const InpaintHook<S>& hook = nullptr, double eta = 1.0) {
  const Eigen::Index frames = cond.rows();
  MatX<S> x = rng.gaussian_matrix<S>(frames, feat_dim);
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    const int tau = plan.steps[k];
    const int tau_prev = (k + 1 < plan.steps.size()) ? plan.steps[k + 1] : 0;
    MatX<S> x0hat = denoise_fn(x, cond, tau);
    if (hook) hook(x0hat);
    const ReverseCoeffs rc = reverse_coeffs(sched, tau, tau_prev, eta);
    if (rc.sigma2 > 0.0) {
      const MatX<S> noise = rng.gaussian_matrix<S>(frames, feat_dim);
      x = reverse_step<S>(x, x0hat, rc, sched, &noise);
    } else {
      x = reverse_step<S>(x, x0hat, rc, sched, nullptr);
    }
  }
  return x;
}

// Monte-Carlo x0-prediction loss for one window: tau ~ U{1..S}, the
// condition stays clean, MSE normalized by the element count.
template <class S>
S training_loss(const DenoiseFn<S>& denoise_fn, const MatX<S>& x0, const MatX<S>& cond,
                Rng& rng, const DiffusionSchedule& sched) {
  const int tau = static_cast<int>(rng.uniform_int(1, sched.steps));
  const MatX<S> eps = rng.gaussian_matrix<S>(x0.rows(), x0.cols());
  const MatX<S> x_tau = forward_diffuse<S>(x0, tau, eps, sched);
  const MatX<S> pred = denoise_fn(x_tau, cond, tau);
  return static_cast<S>((pred - x0).squaredNorm() / static_cast<double>(x0.size()));
}

}  // namespace egomo
