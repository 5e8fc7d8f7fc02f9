#pragma once

#include <span>

#include "commod/model.hpp"

namespace commod {

// Batch kernels. The serial versions are the reference implementation; the
// parallel versions split per-example work across OpenMP threads and reduce
// per-example gradients in ascending example order, so for any thread count
// they produce bit-identical results to the serial path.

struct BatchResult {
  double loss_sum = 0.0;
  int n = 0;
};

BatchResult batch_backward_serial(std::span<const EncodedExample> batch,
                                  const ModelParameters& params, ModelGradients& grads);

BatchResult batch_backward_parallel(std::span<const EncodedExample> batch,
                                    const ModelParameters& params, ModelGradients& grads);

void score_examples_serial(std::span<const EncodedExample> examples,
                           const ModelParameters& params, std::span<double> scores);

void score_examples_parallel(std::span<const EncodedExample> examples,
                             const ModelParameters& params, std::span<double> scores);

// Mean BCE loss over examples, forward only (parallel, order-fixed sum).
double mean_loss(std::span<const EncodedExample> examples, const ModelParameters& params);

int max_threads();

}  // namespace commod
