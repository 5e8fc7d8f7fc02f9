#include "commod/batch.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <vector>

namespace commod {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

BatchResult batch_backward_serial(std::span<const EncodedExample> batch,
                                  const ModelParameters& params, ModelGradients& grads) {
  BatchResult res;
  res.n = static_cast<int>(batch.size());
  ExampleGradients scratch;
  for (const EncodedExample& ex : batch) {
    model_backward(ex, params, scratch);
    accumulate(grads, scratch, params);
    res.loss_sum += scratch.loss;
  }
  return res;
}

BatchResult batch_backward_parallel(std::span<const EncodedExample> batch,
                                    const ModelParameters& params, ModelGradients& grads) {
#ifndef _OPENMP
  return batch_backward_serial(batch, params, grads);
#else
  const int n = static_cast<int>(batch.size());
  const int n_threads = std::min(omp_get_max_threads(), std::max(1, n));
  if (n_threads <= 1) return batch_backward_serial(batch, params, grads);

  BatchResult res;
  res.n = n;

  // Per-example gradients are computed concurrently block by block, then
  // reduced serially in ascending example order, so the floating-point
  // summation order matches the serial reference exactly.
  const int block = std::max(1, 4 * n_threads);
  std::vector<ExampleGradients> scratch(static_cast<std::size_t>(std::min(block, n)));

  for (int start = 0; start < n; start += block) {
    const int end = std::min(n, start + block);
#pragma omp parallel for schedule(dynamic) num_threads(n_threads)
    for (int i = start; i < end; ++i) {
      model_backward(batch[i], params, scratch[i - start]);
    }
    for (int i = start; i < end; ++i) {
      accumulate(grads, scratch[i - start], params);
      res.loss_sum += scratch[i - start].loss;
    }
  }
  return res;
#endif
}

void score_examples_serial(std::span<const EncodedExample> examples,
                           const ModelParameters& params, std::span<double> scores) {
  for (std::size_t i = 0; i < examples.size(); ++i) {
    scores[i] = model_forward(examples[i], params);
  }
}

void score_examples_parallel(std::span<const EncodedExample> examples,
                             const ModelParameters& params, std::span<double> scores) {
#ifndef _OPENMP
  score_examples_serial(examples, params, scores);
#else
  const std::int64_t n = static_cast<std::int64_t>(examples.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    scores[i] = model_forward(examples[i], params);
  }
#endif
}

double mean_loss(std::span<const EncodedExample> examples, const ModelParameters& params) {
  if (examples.empty()) return 0.0;
  std::vector<double> scores(examples.size());
  score_examples_parallel(examples, params, scores);
  double sum = 0.0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    sum += bce_loss_and_grad(scores[i], examples[i].y).loss;
  }
  return sum / static_cast<double>(examples.size());
}

}  // namespace commod
