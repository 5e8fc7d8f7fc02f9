#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "commod/la.hpp"
#include "commod/rng.hpp"

namespace commod {

// Numerically stable logistic function (sign-split form).
double sigmoid(double x);

// Uniform Glorot initialization on [-L, L], L = sqrt(6 / (fan_in + fan_out)).
// Entries drawn row-major.
double glorot_limit(int fan_in, int fan_out);
Matrix glorot_init(int fan_in, int fan_out, Rng& rng);

struct LossGrad {
  double loss;
  double dz;  // d loss / d logit, i.e. p - y
};

// Binary cross-entropy with the probability clamped 1e-12 away from {0,1}.
LossGrad bce_loss_and_grad(double p, double y);

// Named, shape-tagged view over one parameter (or gradient) group.
struct ParamView {
  std::string name;
  std::span<double> values;
  int rows = 0;
  int cols = 0;
};

struct AdamConfig {
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment accumulators shaped like the parameter groups they track.
struct AdamState {
  AdamConfig cfg;
  std::vector<Vector> m;
  std::vector<Vector> v;
  std::int64_t t = 0;

  explicit AdamState(AdamConfig c = {}) : cfg(c) {}
};

// One bias-corrected Adam step over matching parameter/gradient group lists.
// Accumulators are allocated on first use; afterwards shapes must match.
void adam_step(std::span<ParamView> params, std::span<const ParamView> grads,
               AdamState& state);

struct GroupCheck {
  std::string name;
  double max_rel_err = 0.0;
  double max_abs_analytic = 0.0;
};

// Central finite differences against analytic gradients, elementwise.
// Relative error per element is |a - n| / max(|a|, |n|, 1e-8); the loss
// function must be a deterministic pure function of the viewed parameters.
std::vector<GroupCheck> finite_difference_check(
    const std::function<double()>& loss_fn, std::span<ParamView> params,
    std::span<const ParamView> analytic_grads, double eps = 1e-5);

}  // namespace commod
