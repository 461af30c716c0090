#include "egomo/diffusion.hpp"

#include <algorithm>
#include <cmath>

namespace egomo {

DiffusionSchedule build_schedule(int steps, const std::string& kind) {
  if (steps < 2) throw BadStepCount("build_schedule: need at least 2 steps");
  DiffusionSchedule sched;
  sched.steps = steps;
  sched.kind = kind;
  sched.alpha.resize(steps + 1);
  if (kind == "cosine") {
    const double s = 0.008;
    auto f = [s](double u) {
      const double a = std::cos((u + s) / (1.0 + s) * M_PI / 2.0);
      return a * a;
    };
    const double f0 = f(0.0);
    for (int t = 0; t <= steps; ++t)
      sched.alpha[t] = f(static_cast<double>(t) / steps) / f0;
  } else if (kind == "linear") {
    // classic linear-beta schedule, rescaled so both endpoints are exact
    const double beta0 = 1e-4, beta1 = 0.02;
    double acc = 1.0;
    sched.alpha[0] = 1.0;
    for (int t = 1; t <= steps; ++t) {
      const double beta = beta0 + (beta1 - beta0) * (t - 1) / std::max(1, steps - 1);
      acc *= 1.0 - beta;
      sched.alpha[t] = acc;
    }
    const double tail = sched.alpha[steps];
    for (int t = 1; t <= steps; ++t)
      sched.alpha[t] = (sched.alpha[t] - tail) / (1.0 - tail);
  } else {
    throw BadConfig("build_schedule: unknown kind '" + kind + "'");
  }
  sched.alpha[0] = 1.0;
  sched.alpha[steps] = 0.0;
  for (int t = 0; t < steps; ++t)
    if (!(sched.alpha[t + 1] < sched.alpha[t]))
      throw BadConfig("build_schedule: alpha not strictly decreasing");
  return sched;
}

ReverseCoeffs reverse_coeffs(const DiffusionSchedule& sched, int tau, int tau_prev,
                             double eta) {
  if (tau_prev < 0 || tau <= tau_prev || tau > sched.steps)
    throw BadStepPair("reverse_coeffs: need S >= tau > tau_prev >= 0");
  const double a_tau = sched.a(tau);
  const double a_prev = sched.a(tau_prev);
  if (!(a_tau < 1.0)) throw BadStepPair("reverse_coeffs: alpha[tau] must be < 1");
  ReverseCoeffs rc;
  rc.tau = tau;
  rc.tau_prev = tau_prev;
  const double sigma2 = (1.0 - a_tau / a_prev) * (1.0 - a_prev) / (1.0 - a_tau);
  rc.sigma2 = eta * eta * sigma2;
  rc.c = std::sqrt(std::max(0.0, 1.0 - a_prev - rc.sigma2));
  return rc;
}

StridedPlan strided_plan(int steps, int strided_count) {
  if (strided_count < 1 || strided_count > steps)
    throw BadStepCount("strided_plan: need 1 <= strided count <= S");
  StridedPlan plan;
  const double stride = static_cast<double>(steps) / strided_count;
  for (int k = 0; k < strided_count; ++k) {
    int idx = static_cast<int>(std::llround(steps - k * stride));
    idx = std::clamp(idx, 1, steps);
    if (plan.steps.empty() || idx < plan.steps.back()) plan.steps.push_back(idx);
  }
  return plan;
}

}  // namespace egomo
