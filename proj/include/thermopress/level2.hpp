#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "thermopress/markov_opt.hpp"
#include "thermopress/ratefn.hpp"
#include "thermopress/transfer.hpp"

namespace thermopress {

/// Translation-invariant, positively homogeneous metric on measures:
/// weighted sum of |differences of cylinder masses|, the generating family
/// being all cylinder indicators ordered depth-major then lexicographic and
/// truncated at depth D, with weight 2^{-k} for the k-th indicator
/// (indicators have sup-norm 1). The enumeration order is part of the
/// external contract.
struct MeasureMetric {
  const SftModel* model = nullptr;
  int truncation_depth = 0;
  std::vector<Word> cylinders;
  std::vector<double> weights;

  /// Truncation tail: sum of the dropped weights.
  double tail_bound() const {
    // remaining geometric tail after K = cylinders.size() terms
    return std::ldexp(1.0, -static_cast<int>(cylinders.size()));
  }

  std::vector<double> masses(const MarkovMeasure& eta) const {
    std::vector<double> out;
    out.reserve(cylinders.size());
    for (const Word& w : cylinders) out.push_back(eta.cylinder_mass(w.symbols));
    return out;
  }

  /// Metric on raw mass vectors; translation invariance and positive
  /// homogeneity hold exactly in this form.
  double distance_masses(std::span<const double> x, std::span<const double> y) const {
    double s = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) s += weights[k] * std::abs(x[k] - y[k]);
    return s;
  }

  double distance(const MarkovMeasure& a, const MarkovMeasure& b) const {
    return distance_masses(masses(a), masses(b));
  }
};

inline MeasureMetric make_measure_metric(const SftModel& model, int truncation_depth) {
  if (truncation_depth < 1) throw std::invalid_argument("truncation depth must be >= 1");
  MeasureMetric mm;
  mm.model = &model;
  mm.truncation_depth = truncation_depth;
  int k = 0;
  for (int depth = 1; depth <= truncation_depth; ++depth) {
    for (const Word& w : enumerate_words(model, depth)) {
      mm.cylinders.push_back(w);
      mm.weights.push_back(std::ldexp(1.0, -(++k)));
    }
  }
  return mm;
}

/// Level-2 rate: Q(eta) = P_top - h(eta) - integral of phi. Nonnegative on
/// stationary chains supported in the transition structure, zero exactly at
/// the equilibrium state.
inline double Q_rate(const SftModel& model, const LocallyConstantFn& phi,
                     const MarkovMeasure& eta, double p_top) {
  for (int i = 0; i < eta.states(); ++i)
    for (int j = 0; j < eta.states(); ++j)
      if (eta.p(i, j) > 0.0 && !model.admissible(i, j))
        throw std::invalid_argument("chain leaves the transition support at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
  return p_top - entropy_rate(eta) - integral(eta, phi);
}

inline double Q_rate(const SftModel& model, const LocallyConstantFn& phi,
                     const MarkovMeasure& eta) {
  return Q_rate(model, phi, eta, pressure(model, phi));
}

/// Largest distance from the equilibrium reachable inside the Markov(1)
/// family, estimated by deterministic multi-start ascent.
inline double max_radius(const SftModel& model, const LocallyConstantFn& phi, int depth,
                         int n_starts = 16) {
  EquilibriumMeasure mu = equilibrium(model, phi);
  MeasureMetric metric = make_measure_metric(model, depth);
  std::vector<double> mu_masses = metric.masses(mu.chain);
  MarkovFamily fam(model);
  auto neg_d = [&](std::span<const double> th) {
    return -metric.distance_masses(metric.masses(fam.measure(th)), mu_masses);
  };
  double best = 0.0;
  for (int s = 0; s < n_starts; ++s) {
    std::vector<double> theta(fam.param_count(), 0.0);
    if (s > 0) {
      SplitMix64 rng(0xadull + static_cast<std::uint64_t>(s) * 0x9e3779b9ull);
      for (auto& x : theta) x = rng.uniform(-4.0, 4.0);
    }
    DescentOptions opt;
    opt.max_iters = 200;
    DescentResult r = minimize_descent(neg_d, std::move(theta), opt);
    best = std::max(best, -r.value);
  }
  return best;
}

/// Infimum of Q over the sphere d(eta, mu) = c, with the closed-ball
/// complement infimum computed alongside (the two coincide for the pressure
/// formula; the report records both).
struct SphereInfimum {
  double c = 0.0;
  double value = 0.0;       // inf over the sphere
  double ball_value = 0.0;  // inf over { d >= c }
  MarkovMeasure argmin;
  double constraint_residual = 0.0;
  double spread = 0.0;
  bool low_confidence = false;
  bool sphere_ball_agree = false;
  double reachable_radius = 0.0;
};

inline SphereInfimum infimum_on_sphere(const SftModel& model, const LocallyConstantFn& phi,
                                       double c, int depth, int n_starts = 64,
                                       std::uint64_t seed = 0x51ull) {
  if (c < 0.0) throw std::invalid_argument("radius must be >= 0");
  EquilibriumMeasure mu = equilibrium(model, phi);
  MeasureMetric metric = make_measure_metric(model, depth);
  std::vector<double> mu_masses = metric.masses(mu.chain);
  SphereInfimum out;
  out.c = c;
  out.reachable_radius = max_radius(model, phi, depth);
  if (c == 0.0) {
    out.value = out.ball_value = 0.0;
    out.argmin = mu.chain;
    out.sphere_ball_agree = true;
    return out;
  }
  if (c > out.reachable_radius + 1e-9)
    throw domain_error("radius unreachable within the Markov(1) family", 0.0,
                       out.reachable_radius);

  MarkovFamily fam(model);
  const double p_top = mu.pressure;
  auto objective = [&](std::span<const double> th) {
    MarkovMeasure eta = fam.measure(th);
    return p_top - entropy_rate(eta) - integral(eta, mu.potential);
  };
  auto dist = [&](std::span<const double> th) {
    return metric.distance_masses(metric.masses(fam.measure(th)), mu_masses);
  };
  ConstrainedOptions copt;
  copt.descent.max_iters = 250;

  MultiStartResult sphere = multistart(
      [&](std::vector<double> theta) {
        return minimize_equality(
            objective, [&](std::span<const double> th) { return dist(th) - c; },
            std::move(theta), copt);
      },
      fam.param_count(), n_starts, seed);
  MultiStartResult ball = multistart(
      [&](std::vector<double> theta) {
        return minimize_inequality(
            objective, [&](std::span<const double> th) { return dist(th) - c; },
            std::move(theta), copt);
      },
      fam.param_count(), n_starts, seed ^ 0xba11ull);
  if (sphere.feasible_starts == 0)
    throw numerical_error("no multi-start satisfied the sphere constraint");
  out.value = sphere.value;
  out.ball_value = ball.feasible_starts > 0 ? ball.value : sphere.value;
  out.argmin = fam.measure(sphere.theta);
  out.constraint_residual = std::abs(sphere.constraint);
  out.spread = sphere.spread;
  out.low_confidence = sphere.low_confidence;
  out.sphere_ball_agree = std::abs(out.value - out.ball_value) <= 1e-6;
  return out;
}

/// P_top - inf_{d(eta,mu)=c} Q(eta); strictly below P_top for c > 0.
inline double level2_pressure(const SftModel& model, const LocallyConstantFn& phi, double c,
                              int depth, int n_starts = 64,
                              std::uint64_t seed = 0x51ull) {
  EquilibriumMeasure mu = equilibrium(model, phi);
  return mu.pressure - infimum_on_sphere(model, phi, c, depth, n_starts, seed).value;
}

/// Cross-check tying the level-2 rate to the level-1 rate function: the
/// minimum of Q over chains whose psi-average deviates from the mean by at
/// least c must equal min{I(-c), I(c)}.
struct ContractionReport {
  double level2_min = 0.0;
  double level1_min = 0.0;
  double difference = 0.0;
  bool agree = false;  // within 1e-4
};

inline ContractionReport contraction_consistency(const SftModel& model,
                                                 const LocallyConstantFn& phi,
                                                 const LocallyConstantFn& psi, double c,
                                                 int n_starts = 64,
                                                 double T_max = kDefaultTmax,
                                                 std::uint64_t seed = 0xc0ull) {
  if (c < 0.0) throw std::invalid_argument("deviation radius must be >= 0");
  FreeEnergy fe(model, phi, psi);
  const SftModel& wm = fe.working_model();
  EquilibriumMeasure mu = equilibrium(wm, fe.phi2());
  const double mean = fe.centering();
  const double p_top = mu.pressure;

  ContractionReport rep;
  if (c == 0.0) {
    rep.level2_min = rep.level1_min = 0.0;
    rep.agree = true;
    return rep;
  }
  double ip = legendre_point(fe, c, T_max, true).I;
  double im = legendre_point(fe, -c, T_max, true).I;
  rep.level1_min = std::min(ip, im);

  MarkovFamily fam(wm);
  auto objective = [&](std::span<const double> th) {
    MarkovMeasure eta = fam.measure(th);
    return p_top - entropy_rate(eta) - integral(eta, fe.phi2());
  };
  auto slack = [&](std::span<const double> th) {
    return std::abs(integral(fam.measure(th), fe.psi2_raw()) - mean) - c;
  };
  ConstrainedOptions copt;
  copt.descent.max_iters = 250;
  MultiStartResult best = multistart(
      [&](std::vector<double> theta) {
        return minimize_inequality(objective, slack, std::move(theta), copt);
      },
      fam.param_count(), n_starts, seed);
  if (best.feasible_starts == 0)
    throw numerical_error("no multi-start reached the deviation constraint set");
  rep.level2_min = best.value;
  rep.difference = std::abs(rep.level2_min - rep.level1_min);
  rep.agree = rep.difference <= 1e-4;
  return rep;
}

}  // namespace thermopress
