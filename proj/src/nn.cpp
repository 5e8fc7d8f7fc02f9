#include "commod/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace commod {

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double glorot_limit(int fan_in, int fan_out) {
  return std::sqrt(6.0 / (fan_in + fan_out));
}

Matrix glorot_init(int fan_in, int fan_out, Rng& rng) {
  if (fan_in <= 0 || fan_out <= 0) throw std::invalid_argument("glorot_init: fans must be positive");
  const double limit = glorot_limit(fan_in, fan_out);
  Matrix m(fan_out, fan_in);
  for (double& w : m.a) w = rng.uniform(-limit, limit);
  return m;
}

LossGrad bce_loss_and_grad(double p, double y) {
  constexpr double kClamp = 1e-12;
  if (p < kClamp) p = kClamp;
  if (p > 1.0 - kClamp) p = 1.0 - kClamp;
  return {-(y * std::log(p) + (1.0 - y) * std::log(1.0 - p)), p - y};
}

void adam_step(std::span<ParamView> params, std::span<const ParamView> grads,
               AdamState& state) {
  if (params.size() != grads.size()) throw std::invalid_argument("adam_step: group count mismatch");
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t g = 0; g < params.size(); ++g) {
      state.m[g].assign(params[g].values.size(), 0.0);
      state.v[g].assign(params[g].values.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw std::invalid_argument("adam_step: state shape mismatch");

  const AdamConfig& c = state.cfg;
  state.t += 1;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));

  for (std::size_t g = 0; g < params.size(); ++g) {
    auto theta = params[g].values;
    auto grad = grads[g].values;
    if (theta.size() != grad.size() || theta.size() != state.m[g].size()) {
      throw std::invalid_argument("adam_step: shape mismatch in group " + params[g].name);
    }
    double* m = state.m[g].data();
    double* v = state.v[g].data();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grad[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      theta[i] -= c.alpha * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

std::vector<GroupCheck> finite_difference_check(
    const std::function<double()>& loss_fn, std::span<ParamView> params,
    std::span<const ParamView> analytic_grads, double eps) {
  if (params.size() != analytic_grads.size()) {
    throw std::invalid_argument("finite_difference_check: group count mismatch");
  }
  std::vector<GroupCheck> out;
  out.reserve(params.size());
  for (std::size_t g = 0; g < params.size(); ++g) {
    auto theta = params[g].values;
    auto analytic = analytic_grads[g].values;
    GroupCheck check{params[g].name, 0.0, 0.0};
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double saved = theta[i];
      theta[i] = saved + eps;
      const double lp = loss_fn();
      theta[i] = saved - eps;
      const double lm = loss_fn();
      theta[i] = saved;
      const double numeric = (lp - lm) / (2.0 * eps);
      const double a = analytic[i];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      check.max_rel_err = std::max(check.max_rel_err, std::fabs(a - numeric) / denom);
      check.max_abs_analytic = std::max(check.max_abs_analytic, std::fabs(a));
    }
    out.push_back(check);
  }
  return out;
}

}  // namespace commod
