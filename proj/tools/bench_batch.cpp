#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "commod/batch.hpp"
#include "commod/model.hpp"
#include "commod/rng.hpp"

using namespace commod;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<EncodedExample> random_batch(int n, int vocab, int k, int n_slots, Rng& rng) {
  std::vector<EncodedExample> batch(n);
  for (EncodedExample& ex : batch) {
    ex.tokens.resize(k);
    for (int& t : ex.tokens) t = static_cast<int>(rng.next_below(vocab));
    ex.user_row = static_cast<int>(rng.next_below(n_slots));
    ex.y = rng.next_double() < 0.5 ? 0.0 : 1.0;
  }
  return batch;
}

bool identical(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int d = 300, m = 128, batch = 128, k = 16, reps = 5;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const int value = std::atoi(argv[i + 1]);
    if (flag == "--d") d = value;
    else if (flag == "--m") m = value;
    else if (flag == "--batch") batch = value;
    else if (flag == "--k") k = value;
    else if (flag == "--reps") reps = value;
  }
  const int vocab = 400, n_slots = 50;

  Rng rng(42);
  ModelParameters params = init_parameters(Variant::ueRNN, vocab, d, m, n_slots, rng);
  const auto examples = random_batch(batch, vocab, k, n_slots, rng);

  // MACs per token: 3 gate input matvecs + 3 recurrent matvecs, forward;
  // backward roughly doubles it (transposed matvecs + outer products).
  const double flops =
      static_cast<double>(batch) * k * 3.0 * (static_cast<double>(m) * d + static_cast<double>(m) * m) * 2.0 * 3.0;

  std::printf("batch backward: d=%d m=%d batch=%d k=%d (%d reps, ~%.2f Gflop/rep)\n", d, m,
              batch, k, reps, flops * 1e-9);

  ModelGradients ref(params);
  double best_serial = 1e30;
  for (int r = 0; r < reps; ++r) {
    ref.zero();
    const double t0 = now_seconds();
    batch_backward_serial(examples, params, ref);
    best_serial = std::min(best_serial, now_seconds() - t0);
  }
  std::printf("  serial          %8.1f ms   %6.2f Gflop/s\n", 1e3 * best_serial,
              flops / best_serial * 1e-9);

  ModelGradients par(params);
  double best_parallel = 1e30;
  for (int r = 0; r < reps; ++r) {
    par.zero();
    const double t0 = now_seconds();
    batch_backward_parallel(examples, params, par);
    best_parallel = std::min(best_parallel, now_seconds() - t0);
  }
  std::printf("  openmp (%d thr)  %8.1f ms   %6.2f Gflop/s   speedup %.2fx\n", max_threads(),
              1e3 * best_parallel, flops / best_parallel * 1e-9, best_serial / best_parallel);

  bool same = true;
  auto rv = ref.views();
  auto pv = par.views();
  for (std::size_t g = 0; g < rv.size(); ++g) {
    same = same && identical(rv[g].values, pv[g].values);
  }
  std::printf("  parallel == serial (bitwise): %s\n", same ? "yes" : "NO");

  // Forward-only scoring.
  std::vector<double> s1(examples.size()), s2(examples.size());
  double t_serial = 1e30, t_parallel = 1e30;
  for (int r = 0; r < reps; ++r) {
    double t0 = now_seconds();
    score_examples_serial(examples, params, s1);
    t_serial = std::min(t_serial, now_seconds() - t0);
    t0 = now_seconds();
    score_examples_parallel(examples, params, s2);
    t_parallel = std::min(t_parallel, now_seconds() - t0);
  }
  std::printf("scoring: serial %.1f ms, openmp %.1f ms, speedup %.2fx, identical %s\n",
              1e3 * t_serial, 1e3 * t_parallel, t_serial / t_parallel,
              identical(s1, s2) ? "yes" : "NO");
  return same && identical(s1, s2) ? 0 : 1;
}
