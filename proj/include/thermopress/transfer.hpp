#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "thermopress/errors.hpp"
#include "thermopress/matrix.hpp"
#include "thermopress/sft.hpp"

namespace thermopress {

inline constexpr double kLambdaTol = 1e-13;
inline constexpr double kResidualTol = 1e-11;
inline constexpr int kMaxPowerIterations = 1'000'000;

/// Weighted transition matrix for a depth<=2 potential: entry (i,j) is
/// A(i,j) * exp(phi(ij)). Depth-1 potentials are read in the first-symbol
/// convention phi(ij) = phi(i). Deeper potentials must be recoded first.
inline Matrix transfer_matrix(const SftModel& model, const LocallyConstantFn& phi) {
  if (phi.depth() > 2)
    throw std::invalid_argument(
        "potential depth > 2; apply recode_to_depth2 and use the block presentation");
  const int m = model.alphabet_size();
  Matrix L(m, m, 0.0);
  Symbol pair[2];
  for (Symbol i = 0; i < m; ++i) {
    for (Symbol j : model.successors(i)) {
      pair[0] = i;
      pair[1] = j;
      double w = phi.depth() == 1
                     ? std::exp(phi.value(std::span<const Symbol>(pair, 1)))
                     : std::exp(phi.value(std::span<const Symbol>(pair, 2)));
      if (!std::isfinite(w))
        throw numerical_error("transfer matrix entry overflowed at (" +
                              std::to_string(i) + "," + std::to_string(j) + ")");
      L(i, j) = w;
    }
  }
  return L;
}

/// Perron eigendata: leading eigenvalue with right/left eigenvectors
/// (right sup-norm 1, left scaled so l.r = 1) and the residual norms
/// achieved by the iteration.
struct PerronData {
  double lambda = 0.0;
  std::vector<double> right;
  std::vector<double> left;
  double res_right = 0.0;
  double res_left = 0.0;
  int iterations = 0;
};

namespace detail {

/// Deterministic power iteration with all-ones start. The update runs on the
/// shifted matrix L + sI with s tracking the eigenvalue estimate, which keeps
/// periodic and near-periodic spectra (lambda_2 close to -lambda_1)
/// converging; eigenvalue estimates use the two-sided Rayleigh quotient on L
/// itself, so the shift never biases the result.
inline PerronData spectral_radius_data(const Matrix& L) {
  const int m = L.rows;
  std::vector<double> r(m, 1.0), l(m, 1.0), Lr(m), Ltl(m);
  double lambda_prev = std::numeric_limits<double>::quiet_NaN();
  int stable = 0;
  PerronData out;
  for (int iter = 1; iter <= kMaxPowerIterations; ++iter) {
    L.apply(r, Lr);
    L.apply_transpose(l, Ltl);
    const double lr = dot(l, r);
    const double lambda = dot(l, Lr) / lr;
    // shifted update: (L + sI) v, s at the scale of the leading eigenvalue
    const double shift = std::max(1e-3, lambda);
    for (int i = 0; i < m; ++i) Lr[i] += shift * r[i];
    for (int i = 0; i < m; ++i) Ltl[i] += shift * l[i];
    const double nr = sup_norm(Lr), nl = sup_norm(Ltl);
    if (nr == 0.0 || nl == 0.0)
      throw numerical_error("power iteration collapsed to zero vector");
    for (int i = 0; i < m; ++i) r[i] = Lr[i] / nr;
    for (int i = 0; i < m; ++i) l[i] = Ltl[i] / nl;

    const double scale = std::max(1.0, std::abs(lambda));
    if (std::isfinite(lambda_prev) && std::abs(lambda - lambda_prev) < kLambdaTol * scale)
      ++stable;
    else
      stable = 0;
    lambda_prev = lambda;
    if (stable >= 3) {
      // residuals on the unshifted matrix
      std::vector<double> t(m);
      L.apply(r, t);
      double resr = 0.0;
      for (int i = 0; i < m; ++i) resr = std::max(resr, std::abs(t[i] - lambda * r[i]));
      L.apply_transpose(l, t);
      double resl = 0.0;
      for (int i = 0; i < m; ++i) resl = std::max(resl, std::abs(t[i] - lambda * l[i]));
      if (resr < kResidualTol * scale && resl < kResidualTol * scale) {
        out.lambda = lambda;
        out.right = r;
        out.left = l;
        out.res_right = resr;
        out.res_left = resl;
        out.iterations = iter;
        // normalise: right sup-norm 1, l.r = 1
        double nrm = sup_norm(out.right);
        for (double& x : out.right) x /= nrm;
        double lr2 = dot(out.left, out.right);
        for (double& x : out.left) x /= lr2;
        return out;
      }
      stable = 0;
    }
  }
  throw numerical_error("power iteration failed to converge in 1e6 iterations (last lambda " +
                        std::to_string(lambda_prev) + ")");
}

inline bool pattern_primitive(const Matrix& L) {
  const int m = L.rows;
  const int words = (m + 63) / 64;
  std::vector<std::uint64_t> cur(static_cast<std::size_t>(m) * words, 0);
  bool some_row_empty = false;
  for (int i = 0; i < m; ++i) {
    bool any = false;
    for (int j = 0; j < m; ++j)
      if (L(i, j) > 0.0) {
        cur[static_cast<std::size_t>(i) * words + j / 64] |= std::uint64_t(1) << (j % 64);
        any = true;
      }
    if (!any) some_row_empty = true;
  }
  if (some_row_empty) return false;
  auto all_positive = [&]() {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (!(cur[static_cast<std::size_t>(i) * words + j / 64] >> (j % 64) & 1)) return false;
    return true;
  };
  long long exponent = 1;
  const long long bound = static_cast<long long>(m - 1) * (m - 1) + 1;
  while (true) {
    if (all_positive()) return true;
    if (exponent > bound) return false;
    std::vector<std::uint64_t> next(static_cast<std::size_t>(m) * words, 0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (cur[static_cast<std::size_t>(i) * words + j / 64] >> (j % 64) & 1)
          for (int w = 0; w < words; ++w)
            next[static_cast<std::size_t>(i) * words + w] |=
                cur[static_cast<std::size_t>(j) * words + w];
    cur = std::move(next);
    exponent *= 2;
  }
}

}  // namespace detail

/// Perron data of a primitive nonnegative matrix. Non-primitive support
/// patterns are rejected (the equilibrium construction needs mixing).
inline PerronData perron(const Matrix& L) {
  if (L.rows != L.cols) throw std::invalid_argument("matrix must be square");
  if (!detail::pattern_primitive(L))
    throw not_mixing_error("matrix support pattern is not primitive");
  PerronData d = detail::spectral_radius_data(L);
  for (double x : d.right)
    if (!(x > 0.0)) throw numerical_error("right eigenvector not strictly positive");
  for (double x : d.left)
    if (!(x > 0.0)) throw numerical_error("left eigenvector not strictly positive");
  return d;
}

/// log of the spectral radius of the weighted transition matrix. Defined for
/// any valid model (primitivity not required; only the leading eigenvalue is
/// used).
inline double pressure(const SftModel& model, const LocallyConstantFn& phi) {
  return std::log(detail::spectral_radius_data(transfer_matrix(model, phi)).lambda);
}

/// Stationary Markov chain (pi, p) on the model's alphabet.
struct MarkovMeasure {
  std::vector<double> pi;
  Matrix p;

  int states() const { return static_cast<int>(pi.size()); }

  double stationarity_residual() const {
    const int m = states();
    double worst = 0.0;
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += pi[i] * p(i, j);
      worst = std::max(worst, std::abs(s - pi[j]));
    }
    return worst;
  }

  double row_sum_defect() const {
    double worst = 0.0;
    for (int i = 0; i < states(); ++i) {
      double s = 0.0;
      for (int j = 0; j < states(); ++j) s += p(i, j);
      worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
  }

  double log_cylinder_mass(std::span<const Symbol> w) const {
    double g = std::log(pi[w[0]]);
    for (std::size_t t = 0; t + 1 < w.size(); ++t) g += std::log(p(w[t], w[t + 1]));
    return g;
  }

  double cylinder_mass(std::span<const Symbol> w) const {
    double g = pi[w[0]];
    for (std::size_t t = 0; t + 1 < w.size(); ++t) g *= p(w[t], w[t + 1]);
    return g;
  }
};

/// Equilibrium state of a depth<=2 potential, realised as the Parry-type
/// chain built from Perron eigendata, with pressure and Perron data attached.
struct EquilibriumMeasure {
  MarkovMeasure chain;
  double pressure = 0.0;
  PerronData perron;
  LocallyConstantFn potential;  // depth-2 presentation actually used

  const std::vector<double>& pi() const { return chain.pi; }
  const Matrix& p() const { return chain.p; }
  double cylinder_mass(std::span<const Symbol> w) const { return chain.cylinder_mass(w); }
  double log_cylinder_mass(std::span<const Symbol> w) const {
    return chain.log_cylinder_mass(w);
  }
};

inline EquilibriumMeasure equilibrium(const SftModel& model, const LocallyConstantFn& phi) {
  if (!model.is_primitive())
    throw not_mixing_error(
        "equilibrium state requires a primitive (mixing) transition matrix");
  Matrix L = transfer_matrix(model, phi);
  PerronData d = detail::spectral_radius_data(L);
  const int m = model.alphabet_size();
  for (int i = 0; i < m; ++i)
    if (!(d.right[i] > 0.0) || !(d.left[i] > 0.0))
      throw numerical_error("Perron vectors not strictly positive on primitive model");

  MarkovMeasure mu;
  mu.p = Matrix(m, m, 0.0);
  for (int i = 0; i < m; ++i) {
    double row = 0.0;
    for (Symbol j : model.successors(i)) {
      mu.p(i, j) = L(i, j) * d.right[j] / (d.lambda * d.right[i]);
      row += mu.p(i, j);
    }
    // exact row normalisation so cylinder masses sum to one at every depth
    for (Symbol j : model.successors(i)) mu.p(i, j) /= row;
  }
  mu.pi.resize(m);
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    mu.pi[i] = d.left[i] * d.right[i];
    z += mu.pi[i];
  }
  for (int i = 0; i < m; ++i) mu.pi[i] /= z;
  // polish stationarity against the normalised kernel
  std::vector<double> next(m);
  for (int pass = 0; pass < 200 && mu.stationarity_residual() > 1e-15; ++pass) {
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += mu.pi[i] * mu.p(i, j);
      next[j] = s;
    }
    double tot = 0.0;
    for (double x : next) tot += x;
    for (int j = 0; j < m; ++j) mu.pi[j] = next[j] / tot;
  }

  LocallyConstantFn phi2 = phi.depth() == 2 ? phi : phi.padded(model, 2);
  return EquilibriumMeasure{std::move(mu), std::log(d.lambda), std::move(d), std::move(phi2)};
}

/// Shannon entropy rate of a stationary chain, with 0 log 0 = 0.
inline double entropy_rate(const MarkovMeasure& eta) {
  double h = 0.0;
  for (int i = 0; i < eta.states(); ++i)
    for (int j = 0; j < eta.states(); ++j) {
      double pij = eta.p(i, j);
      if (pij > 0.0) h -= eta.pi[i] * pij * std::log(pij);
    }
  return h;
}

/// Integral of a depth<=2 function against a stationary chain.
inline double integral(const MarkovMeasure& eta, const LocallyConstantFn& f) {
  if (f.depth() > 2)
    throw std::invalid_argument("integral needs depth <= 2; recode deeper functions");
  double s = 0.0;
  Symbol pair[2];
  for (int i = 0; i < eta.states(); ++i) {
    if (f.depth() == 1) {
      pair[0] = i;
      s += eta.pi[i] * f.value(std::span<const Symbol>(pair, 1));
    } else {
      for (int j = 0; j < eta.states(); ++j) {
        if (eta.p(i, j) > 0.0) {
          pair[0] = i;
          pair[1] = j;
          s += eta.pi[i] * eta.p(i, j) * f.value(std::span<const Symbol>(pair, 2));
        }
      }
    }
  }
  return s;
}

/// Entropy plus integrals of the given functions; validates stationarity.
inline std::pair<double, std::vector<double>> entropy_and_integrals(
    const MarkovMeasure& eta, std::span<const LocallyConstantFn> fns) {
  if (eta.states() == 0) throw std::invalid_argument("empty chain");
  double total = 0.0;
  for (double x : eta.pi) {
    if (x < -1e-12) throw std::invalid_argument("negative stationary mass");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-8)
    throw std::invalid_argument("stationary vector does not sum to 1");
  if (eta.row_sum_defect() > 1e-8)
    throw std::invalid_argument("kernel rows do not sum to 1");
  if (eta.stationarity_residual() > 1e-8)
    throw std::invalid_argument("measure is not stationary: pi p != pi");
  std::vector<double> ints;
  ints.reserve(fns.size());
  for (const auto& f : fns) ints.push_back(integral(eta, f));
  return {entropy_rate(eta), std::move(ints)};
}

/// Gibbs comparison over all cylinders up to n_max: the empirical constant
/// K together with the worst cylinder and the per-length maxima, plus the
/// eigenvector-ratio prediction the empirical value must stabilise to.
struct GibbsCertificate {
  int n_max = 0;
  double K = 1.0;
  std::string worst_word;
  double ratio_min = 1.0;
  double ratio_max = 1.0;
  std::vector<double> per_n_K;
  double analytic_K = 1.0;
};

/// Eigenvector-ratio prediction for the stabilised Gibbs constant, built
/// from the cylinder convention mu(C_n(w)) vs exp(-nP + S_n phi(w+)) where
/// w+ appends the lexicographically-first admissible symbol.
inline double analytic_gibbs_K(const SftModel& model, const LocallyConstantFn& phi2,
                               const PerronData& d) {
  const int m = model.alphabet_size();
  Symbol pair[2];
  double worst = 0.0;
  for (Symbol i = 0; i < m; ++i) {
    for (Symbol j = 0; j < m; ++j) {
      pair[0] = j;
      pair[1] = model.first_successor(j);
      double boundary = phi2.depth() == 1
                            ? phi2.value(std::span<const Symbol>(pair, 1))
                            : phi2.value(std::span<const Symbol>(pair, 2));
      double lg = std::log(d.left[i]) + std::log(d.right[j]) + std::log(d.lambda) - boundary;
      worst = std::max(worst, std::abs(lg));
    }
  }
  return std::exp(worst);
}

inline GibbsCertificate gibbs_certify(const SftModel& model, const EquilibriumMeasure& mu,
                                      const LocallyConstantFn& phi, double P, int n_max,
                                      std::uint64_t budget = 100'000'000ull) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  std::uint64_t total = 0;
  for (int n = 1; n <= n_max; ++n) {
    std::uint64_t c = model.word_count(n);
    total = total + c < total ? ~0ull : total + c;
    if (total > budget)
      throw resource_limit_error("cylinder budget exceeded in gibbs_certify", total, budget);
  }
  LocallyConstantFn phi2 = phi.depth() == 2 ? phi : phi.padded(model, 2);
  const int m = model.alphabet_size();

  // boundary term phi2(j, ext(j)) per terminal symbol
  std::vector<double> boundary(m);
  Symbol pair[2];
  for (Symbol j = 0; j < m; ++j) {
    pair[0] = j;
    pair[1] = model.first_successor(j);
    boundary[j] = phi2.value(std::span<const Symbol>(pair, 2));
  }

  GibbsCertificate cert;
  cert.n_max = n_max;
  cert.per_n_K.assign(n_max, 1.0);
  std::vector<double> per_n_max(n_max, -std::numeric_limits<double>::infinity());
  std::vector<double> per_n_min(n_max, std::numeric_limits<double>::infinity());
  double worst_abs = -1.0;
  std::vector<Symbol> worst(1);

  // DFS over words up to length n_max carrying the running value
  // g = log pi(w0) + sum log p - sum phi2 over determined windows.
  std::vector<Symbol> path(n_max);
  struct Frame { double g; int choice; };
  std::vector<Frame> stack(n_max);
  for (Symbol s0 = 0; s0 < m; ++s0) {
    path[0] = s0;
    stack[0] = {std::log(mu.pi()[s0]), 0};
    int depth = 0;
    while (depth >= 0) {
      if (depth == 0 && stack[0].choice == 0) {
        // visit length-1 word
        double lg = stack[0].g + 1 * P - boundary[path[0]];
        per_n_max[0] = std::max(per_n_max[0], lg);
        per_n_min[0] = std::min(per_n_min[0], lg);
        if (std::abs(lg) > worst_abs) {
          worst_abs = std::abs(lg);
          worst.assign(path.begin(), path.begin() + 1);
        }
      }
      if (depth == n_max - 1) { --depth; continue; }
      const auto& succ = model.successors(path[depth]);
      if (stack[depth].choice >= static_cast<int>(succ.size())) { --depth; continue; }
      Symbol nxt = succ[stack[depth].choice++];
      path[depth + 1] = nxt;
      pair[0] = path[depth];
      pair[1] = nxt;
      double step = std::log(mu.p()(path[depth], nxt)) -
                    phi2.value(std::span<const Symbol>(pair, 2));
      stack[depth + 1] = {stack[depth].g + step, 0};
      ++depth;
      int n = depth + 1;
      double lg = stack[depth].g + n * P - boundary[path[depth]];
      per_n_max[n - 1] = std::max(per_n_max[n - 1], lg);
      per_n_min[n - 1] = std::min(per_n_min[n - 1], lg);
      if (std::abs(lg) > worst_abs) {
        worst_abs = std::abs(lg);
        worst.assign(path.begin(), path.begin() + n);
      }
    }
  }

  double global = 0.0;
  for (int n = 0; n < n_max; ++n) {
    double a = std::max(std::abs(per_n_max[n]), std::abs(per_n_min[n]));
    cert.per_n_K[n] = std::exp(a);
    global = std::max(global, a);
  }
  cert.K = std::exp(global);
  cert.ratio_max = std::exp(*std::max_element(per_n_max.begin(), per_n_max.end()));
  cert.ratio_min = std::exp(*std::min_element(per_n_min.begin(), per_n_min.end()));
  cert.worst_word = Word{worst}.str();
  cert.analytic_K = analytic_gibbs_K(model, phi2, mu.perron);
  return cert;
}

}  // namespace thermopress
