#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "commod/corpus.hpp"
#include "commod/rng.hpp"

namespace commod {

// Generator constants (fixed; SyntheticSpec only exposes the knobs the
// experiments vary). Users split into a Zipf-weighted active pool and a
// light casual pool so that T(u) <= 10 users exist; per-user rejection
// propensities p_u follow a low-skewed grid assigned by a seeded shuffle.
// A comment is "flavored" with probability q(p_u) = 0.35 + 0.30 p_u, in
// which case 1-3 abusive lexicon tokens are injected, and its gold label is
// reject with probability 0.5 * [flavored] + 0.5 * p_u.
namespace {

constexpr double kCasualUserFraction = 0.6;
constexpr double kCasualPoolWeight = 0.12;  // relative to the active pool
constexpr double kPropensitySkew = 2.2;
constexpr double kFlavorBase = 0.35;
constexpr double kFlavorSlope = 0.30;
constexpr double kLambda = 0.5;
constexpr int kMinLen = 4;
constexpr int kMaxLen = 16;

struct Plan {
  std::vector<double> cum_weights;  // author sampling CDF
  std::vector<double> propensity;
  int n_abusive = 0;
  int n_normal = 0;
};

void validate(const SyntheticSpec& spec) {
  if (spec.n_users <= 0 || spec.n_train <= 0 || spec.n_dev <= 0 || spec.n_test <= 0) {
    throw std::invalid_argument("generate_synthetic: counts must be positive");
  }
  if (spec.vocab_size < 2) throw std::invalid_argument("generate_synthetic: vocab_size < 2");
  if (!(spec.abusive_fraction > 0.0 && spec.abusive_fraction < 1.0)) {
    throw std::invalid_argument("generate_synthetic: abusive_fraction outside (0,1)");
  }
  if (spec.user_propensity_spread < 0.0) {
    throw std::invalid_argument("generate_synthetic: negative propensity spread");
  }
}

// Consumes rng draws in a fixed order; generate_synthetic continues the
// same stream for the comments.
Plan build_plan(const SyntheticSpec& spec, Rng& rng) {
  Plan plan;
  const int n = spec.n_users;
  const int n_casual = static_cast<int>(n * kCasualUserFraction);
  const int n_active = n - n_casual;

  std::vector<double> w(n, 0.0);
  double active_mass = 0.0;
  for (int j = 0; j < n_active; ++j) {
    w[j] = 1.0 / (j + 1);
    active_mass += w[j];
  }
  const double casual_each = n_casual > 0 ? kCasualPoolWeight * active_mass / n_casual : 0.0;
  for (int j = n_active; j < n; ++j) w[j] = casual_each;

  double total = 0.0;
  plan.cum_weights.resize(n);
  for (int j = 0; j < n; ++j) {
    total += w[j];
    plan.cum_weights[j] = total;
  }
  for (double& c : plan.cum_weights) c /= total;

  std::vector<int> perm(n);
  for (int j = 0; j < n; ++j) perm[j] = j;
  rng.shuffle(perm);

  plan.propensity.resize(n);
  for (int j = 0; j < n; ++j) {
    const double x = (perm[j] + 0.5) / n;
    const double y = std::pow(x, kPropensitySkew);
    const double p = 0.5 + spec.user_propensity_spread * (y - 0.5);
    plan.propensity[j] = std::clamp(p, 0.02, 0.98);
  }

  plan.n_abusive = std::max(1, static_cast<int>(std::lround(spec.abusive_fraction * spec.vocab_size)));
  plan.n_normal = spec.vocab_size - plan.n_abusive;
  if (plan.n_normal < 1) throw std::invalid_argument("generate_synthetic: no normal tokens left");
  return plan;
}

int pick_author(const Plan& plan, Rng& rng) {
  const double u = rng.next_double();
  auto it = std::upper_bound(plan.cum_weights.begin(), plan.cum_weights.end(), u);
  if (it == plan.cum_weights.end()) --it;
  return static_cast<int>(it - plan.cum_weights.begin());
}

std::string format_id(const char* prefix, int i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, i);
  return buf;
}

}  // namespace

std::vector<double> synthetic_propensities(const SyntheticSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  return build_plan(spec, rng).propensity;
}

Corpus generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const Plan plan = build_plan(spec, rng);

  std::vector<std::string> normal_tokens(plan.n_normal), abusive_tokens(plan.n_abusive);
  for (int k = 0; k < plan.n_normal; ++k) normal_tokens[k] = format_id("w", k, 4);
  for (int k = 0; k < plan.n_abusive; ++k) abusive_tokens[k] = format_id("bad", k, 3);

  const int total = spec.n_train + spec.n_dev + spec.n_test;
  Corpus corpus;
  corpus.comments.reserve(total);

  for (int i = 0; i < total; ++i) {
    Comment c;
    c.id = format_id("c", i, 6);
    c.split = i < spec.n_train            ? Split::Train
              : i < spec.n_train + spec.n_dev ? Split::Dev
                                              : Split::Test;
    const int author = pick_author(plan, rng);
    c.author = format_id("u", author, 4);
    const double p_u = plan.propensity[author];

    const int len = kMinLen + static_cast<int>(rng.next_below(kMaxLen - kMinLen + 1));
    const bool flavored = rng.next_double() < kFlavorBase + kFlavorSlope * p_u;

    c.tokens.resize(len);
    for (int t = 0; t < len; ++t) {
      c.tokens[t] = normal_tokens[rng.next_below(plan.n_normal)];
    }
    if (flavored) {
      const int n_ab = 1 + static_cast<int>(rng.next_below(3));
      for (int j = 0; j < n_ab; ++j) {
        const int pos = static_cast<int>(rng.next_below(len));
        c.tokens[pos] = abusive_tokens[rng.next_below(plan.n_abusive)];
      }
    }
    const double p_reject = kLambda * (flavored ? 1.0 : 0.0) + (1.0 - kLambda) * p_u;
    c.label = rng.next_double() < p_reject ? Label::Reject : Label::Accept;
    corpus.comments.push_back(std::move(c));
  }
  return corpus;
}

}  // namespace commod
