#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "thermopress/markov_opt.hpp"
#include "thermopress/sft.hpp"

namespace fixtures {

using thermopress::LocallyConstantFn;
using thermopress::SftModel;
using thermopress::Symbol;
using thermopress::Word;

inline SftModel full_shift(int m = 2) {
  std::vector<std::vector<int>> a(m, std::vector<int>(m, 1));
  return SftModel(m, a);
}

inline SftModel golden_mean() {
  return SftModel(2, {{1, 1}, {1, 0}});
}

/// 4-state matrix with an all-ones 3x3 block and an isolated fixed state.
inline SftModel ones_block_plus_fixed_point() {
  return SftModel(4, {{1, 1, 1, 0}, {1, 1, 1, 0}, {1, 1, 1, 0}, {0, 0, 0, 1}});
}

/// chi_[0]: depth-1 indicator of reading symbol 0.
inline LocallyConstantFn indicator_of_symbol(const SftModel& model, Symbol s) {
  LocallyConstantFn f(model, 1, 0.0);
  std::vector<Symbol> w{s};
  f.set(w, 1.0);
  return f;
}

/// Depth-2 potential phi(ij) = log w_j (Bernoulli weights on the full shift).
inline LocallyConstantFn log_weight_second_symbol(const SftModel& model,
                                                  const std::vector<double>& w) {
  LocallyConstantFn f(model, 2, 0.0);
  std::vector<Symbol> pair(2);
  for (Symbol i = 0; i < model.alphabet_size(); ++i)
    for (Symbol j : model.successors(i)) {
      pair[0] = i;
      pair[1] = j;
      f.set(pair, std::log(w[j]));
    }
  return f;
}

inline LocallyConstantFn random_table(const SftModel& model, int depth, std::uint64_t seed,
                                      double lo = -1.0, double hi = 1.0) {
  thermopress::SplitMix64 rng(seed);
  LocallyConstantFn f(model, depth, 0.0);
  thermopress::enumerate_words(model, depth, [&](std::span<const Symbol> w) {
    f.set(w, rng.uniform(lo, hi));
  });
  return f;
}

/// Deterministic random primitive model with m states.
inline SftModel random_primitive_model(int m, std::uint64_t seed) {
  thermopress::SplitMix64 rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<std::vector<int>> a(m, std::vector<int>(m, 0));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) a[i][j] = rng.uniform(0.0, 1.0) < 0.6 ? 1 : 0;
    try {
      SftModel model(m, a);
      if (model.is_primitive()) return model;
    } catch (const std::invalid_argument&) {
      // stranded symbol; redraw
    }
  }
  throw std::runtime_error("failed to draw a primitive model");
}

// ---- closed forms used as frozen oracles -------------------------------

inline double log2() { return std::log(2.0); }

/// Binomial rate function on the full 2-shift with phi = 0, psi = chi_[0],
/// in uncentered coordinates: I(s) = log 2 + s log s + (1-s) log(1-s).
inline double binomial_rate(double s) {
  if (s <= 0.0 || s >= 1.0) {
    if (s == 0.0 || s == 1.0) return std::log(2.0);
    return std::numeric_limits<double>::infinity();
  }
  return std::log(2.0) + s * std::log(s) + (1.0 - s) * std::log(1.0 - s);
}

/// Exact C(n, k) for n <= 60 via Pascal's triangle (integers stay below 2^53).
inline double binomial_coeff(int n, int k) {
  static std::vector<std::vector<double>> pascal;
  if (pascal.empty()) {
    pascal.resize(61);
    for (int r = 0; r <= 60; ++r) {
      pascal[r].resize(r + 1, 1.0);
      for (int c = 1; c < r; ++c) pascal[r][c] = pascal[r - 1][c - 1] + pascal[r - 1][c];
    }
  }
  if (k < 0 || k > n) return 0.0;
  return pascal[n][k];
}

/// Exact P(#zeros/n in [lo, hi]) for the fair Bernoulli word measure.
inline double binomial_band_mass(int n, double lo, double hi) {
  double total = 0.0;
  for (int k = 0; k <= n; ++k) {
    double frac = static_cast<double>(k) / n;
    if (frac >= lo && frac <= hi) total += binomial_coeff(n, k);
  }
  return total * std::ldexp(1.0, -n);
}

inline std::uint64_t fibonacci(int n) {
  std::uint64_t a = 0, b = 1;
  for (int i = 0; i < n; ++i) {
    std::uint64_t c = a + b;
    a = b;
    b = c;
  }
  return a;
}

}  // namespace fixtures
