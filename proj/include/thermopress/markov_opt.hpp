#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "thermopress/errors.hpp"
#include "thermopress/matrix.hpp"
#include "thermopress/sft.hpp"
#include "thermopress/transfer.hpp"

namespace thermopress {

/// Deterministic 64-bit generator (splitmix64); used for multi-start seeds
/// and perturbation noise so runs are reproducible bit for bit.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// uniform double in [lo, hi)
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
  }
};

/// Stationary Markov(1) chains supported on the transition structure,
/// parametrised by unconstrained reals: each row of the kernel is the
/// softmax of its edge parameters.
class MarkovFamily {
 public:
  explicit MarkovFamily(const SftModel& model) : model_(&model) {
    const int m = model.alphabet_size();
    row_begin_.assign(m + 1, 0);
    for (Symbol i = 0; i < m; ++i) {
      row_begin_[i + 1] = row_begin_[i] + static_cast<int>(model.successors(i).size());
      for (Symbol j : model.successors(i)) edges_.emplace_back(i, j);
    }
  }

  const SftModel& model() const { return *model_; }
  int param_count() const { return static_cast<int>(edges_.size()); }

  Matrix kernel(std::span<const double> theta) const {
    const int m = model_->alphabet_size();
    Matrix p(m, m, 0.0);
    for (Symbol i = 0; i < m; ++i) {
      const int b = row_begin_[i], e = row_begin_[i + 1];
      double mx = theta[b];
      for (int k = b + 1; k < e; ++k) mx = std::max(mx, theta[k]);
      double z = 0.0;
      for (int k = b; k < e; ++k) z += std::exp(theta[k] - mx);
      for (int k = b; k < e; ++k)
        p(edges_[k].first, edges_[k].second) = std::exp(theta[k] - mx) / z;
    }
    return p;
  }

  /// Stationary vector of a kernel supported on an irreducible pattern,
  /// by direct linear solve with a normalisation row, then power polish.
  static std::vector<double> stationary(const Matrix& p) {
    const int m = p.rows;
    // solve x (P - I) = 0 with sum x = 1  ==>  (P^T - I) x = 0, last eq sum=1
    Matrix A(m, m, 0.0);
    std::vector<double> rhs(m, 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) A(i, j) = p(j, i) - (i == j ? 1.0 : 0.0);
    for (int j = 0; j < m; ++j) A(m - 1, j) = 1.0;
    rhs[m - 1] = 1.0;
    // Gaussian elimination with partial pivoting
    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    for (int col = 0; col < m; ++col) {
      int piv = col;
      double best = std::abs(A(col, col));
      for (int r = col + 1; r < m; ++r)
        if (std::abs(A(r, col)) > best) { best = std::abs(A(r, col)); piv = r; }
      if (best < 1e-14) throw numerical_error("stationary solve: singular system");
      if (piv != col) {
        for (int j = 0; j < m; ++j) std::swap(A(col, j), A(piv, j));
        std::swap(rhs[col], rhs[piv]);
      }
      for (int r = col + 1; r < m; ++r) {
        double f = A(r, col) / A(col, col);
        if (f == 0.0) continue;
        for (int j = col; j < m; ++j) A(r, j) -= f * A(col, j);
        rhs[r] -= f * rhs[col];
      }
    }
    std::vector<double> x(m);
    for (int r = m - 1; r >= 0; --r) {
      double s = rhs[r];
      for (int j = r + 1; j < m; ++j) s -= A(r, j) * x[j];
      x[r] = s / A(r, r);
    }
    for (double& v : x) v = std::max(v, 0.0);
    double tot = 0.0;
    for (double v : x) tot += v;
    for (double& v : x) v /= tot;
    // a few polish passes keep downstream entropy sums clean
    std::vector<double> nx(m);
    for (int pass = 0; pass < 8; ++pass) {
      for (int j = 0; j < m; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += x[i] * p(i, j);
        nx[j] = s;
      }
      double t2 = 0.0;
      for (double v : nx) t2 += v;
      for (int j = 0; j < m; ++j) x[j] = nx[j] / t2;
    }
    return x;
  }

  MarkovMeasure measure(std::span<const double> theta) const {
    Matrix p = kernel(theta);
    return MarkovMeasure{stationary(p), std::move(p)};
  }

 private:
  const SftModel* model_;
  std::vector<std::pair<Symbol, Symbol>> edges_;
  std::vector<int> row_begin_;
};

struct DescentOptions {
  int max_iters = 300;
  double grad_tol = 1e-10;
  double fd_step = 1e-6;
  double init_step = 0.5;
};

struct DescentResult {
  std::vector<double> theta;
  double value = 0.0;
  int iters = 0;
};

/// Plain gradient descent with central-difference gradients and Armijo
/// backtracking; deterministic for a fixed start.
inline DescentResult minimize_descent(const std::function<double(std::span<const double>)>& f,
                                      std::vector<double> theta, const DescentOptions& opt = {}) {
  const int n = static_cast<int>(theta.size());
  std::vector<double> grad(n), trial(n);
  double fx = f(theta);
  double step = opt.init_step;
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    double gnorm2 = 0.0;
    for (int k = 0; k < n; ++k) {
      double save = theta[k];
      theta[k] = save + opt.fd_step;
      double fp = f(theta);
      theta[k] = save - opt.fd_step;
      double fm = f(theta);
      theta[k] = save;
      grad[k] = (fp - fm) / (2 * opt.fd_step);
      gnorm2 += grad[k] * grad[k];
    }
    if (std::sqrt(gnorm2) < opt.grad_tol) break;
    bool moved = false;
    double s = step;
    for (int bt = 0; bt < 40; ++bt) {
      for (int k = 0; k < n; ++k) trial[k] = theta[k] - s * grad[k];
      double ft = f(trial);
      if (ft <= fx - 1e-4 * s * gnorm2) {
        theta = trial;
        fx = ft;
        step = s * 1.5;
        moved = true;
        break;
      }
      s *= 0.5;
    }
    if (!moved) break;  // no descent direction at resolvable step
  }
  return DescentResult{std::move(theta), fx, it};
}

struct ConstrainedOptions {
  DescentOptions descent;
  int outer_iters = 10;
  double beta0 = 10.0;
  double beta_growth = 6.0;
  double constraint_tol = 1e-8;
};

struct ConstrainedResult {
  std::vector<double> theta;
  double value = 0.0;          // objective at the final point
  double constraint = 0.0;     // h(theta) or min(0, g(theta))
  bool feasible = false;
};

/// Augmented-Lagrangian minimisation of f subject to h == 0.
inline ConstrainedResult minimize_equality(
    const std::function<double(std::span<const double>)>& f,
    const std::function<double(std::span<const double>)>& h, std::vector<double> theta,
    const ConstrainedOptions& opt = {}) {
  double lambda = 0.0, beta = opt.beta0;
  ConstrainedResult res;
  for (int outer = 0; outer < opt.outer_iters; ++outer) {
    auto al = [&](std::span<const double> th) {
      double hv = h(th);
      return f(th) + lambda * hv + 0.5 * beta * hv * hv;
    };
    DescentResult d = minimize_descent(al, std::move(theta), opt.descent);
    theta = std::move(d.theta);
    double hv = h(theta);
    lambda += beta * hv;
    beta *= opt.beta_growth;
    res.theta = theta;
    res.value = f(theta);
    res.constraint = hv;
    if (std::abs(hv) <= opt.constraint_tol && outer >= 2) break;
  }
  res.feasible = std::abs(res.constraint) <= opt.constraint_tol * 100;
  return res;
}

/// Augmented-Lagrangian minimisation of f subject to g >= 0.
inline ConstrainedResult minimize_inequality(
    const std::function<double(std::span<const double>)>& f,
    const std::function<double(std::span<const double>)>& g, std::vector<double> theta,
    const ConstrainedOptions& opt = {}) {
  double lambda = 0.0, beta = opt.beta0;
  ConstrainedResult res;
  for (int outer = 0; outer < opt.outer_iters; ++outer) {
    auto al = [&](std::span<const double> th) {
      double gv = g(th);
      double t = std::max(0.0, lambda - beta * gv);
      return f(th) + (t * t - lambda * lambda) / (2 * beta);
    };
    DescentResult d = minimize_descent(al, std::move(theta), opt.descent);
    theta = std::move(d.theta);
    double gv = g(theta);
    lambda = std::max(0.0, lambda - beta * gv);
    beta *= opt.beta_growth;
    res.theta = theta;
    res.value = f(theta);
    res.constraint = std::min(0.0, gv);
    if (gv >= -opt.constraint_tol && d.iters < opt.descent.max_iters && outer >= 2) break;
  }
  res.feasible = res.constraint >= -opt.constraint_tol * 100;
  return res;
}

struct MultiStartResult {
  std::vector<double> theta;
  double value = 0.0;
  double constraint = 0.0;
  double spread = 0.0;         // gap to the closest competing feasible start
  int feasible_starts = 0;
  bool low_confidence = false;
};

/// Runs a constrained solver from n_starts deterministic initial points
/// (theta = 0 first, then uniform[-2,2] draws) and keeps the best feasible
/// result; ties resolve to the lowest start index.
inline MultiStartResult multistart(
    const std::function<ConstrainedResult(std::vector<double>)>& solve_from, int n_params,
    int n_starts, std::uint64_t seed) {
  MultiStartResult best;
  std::vector<double> values;
  bool have = false;
  for (int s = 0; s < n_starts; ++s) {
    std::vector<double> theta(n_params, 0.0);
    if (s > 0) {
      SplitMix64 rng(seed + static_cast<std::uint64_t>(s) * 0x9e3779b9ull);
      for (int k = 0; k < n_params; ++k) theta[k] = rng.uniform(-2.0, 2.0);
    }
    ConstrainedResult r = solve_from(std::move(theta));
    if (!r.feasible) continue;
    values.push_back(r.value);
    if (!have || r.value < best.value) {
      have = true;
      best.theta = std::move(r.theta);
      best.value = r.value;
      best.constraint = r.constraint;
    }
  }
  best.feasible_starts = static_cast<int>(values.size());
  if (!have) {
    best.low_confidence = true;
    return best;
  }
  double closest = std::numeric_limits<double>::infinity();
  for (double v : values)
    if (v > best.value + 1e-15) closest = std::min(closest, v - best.value);
  int near = 0;
  for (double v : values)
    if (v <= best.value + 1e-6) ++near;
  best.spread = near >= 2 ? 0.0 : (std::isfinite(closest) ? closest : 0.0);
  best.low_confidence = best.feasible_starts < 2 || best.spread > 1e-4;
  return best;
}

}  // namespace thermopress
