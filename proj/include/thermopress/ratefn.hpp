#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "thermopress/errors.hpp"
#include "thermopress/markov_opt.hpp"
#include "thermopress/recode.hpp"
#include "thermopress/transfer.hpp"

namespace thermopress {

inline constexpr double kDefaultTmax = 50.0;
inline constexpr double kDegeneracyTol = 1e-9;
inline constexpr double kLegendreTol = 1e-10;

/// Free energy t -> P(phi + t psi) - P(phi) of a potential/observable pair,
/// together with its derivative E'(t) = integral of psi against the tilted
/// equilibrium state. The observable is centered (E'(0) = 0) unless asked
/// otherwise; deeper-than-2 data is moved to the block presentation first.
/// Evaluations are cached; the cache behaves as a map with atomic
/// insert-if-absent semantics.
class FreeEnergy {
 public:
  FreeEnergy(const SftModel& model, const LocallyConstantFn& phi,
             const LocallyConstantFn& psi) {
    auto [rec, fns] = recode_to_depth2(model, {phi, psi});
    recoding_ = std::make_shared<BlockRecoding>(std::move(rec));
    phi2_ = std::make_shared<LocallyConstantFn>(std::move(fns[0]));
    psi2_raw_ = std::make_shared<LocallyConstantFn>(std::move(fns[1]));
    if (!working_model().is_primitive())
      throw not_mixing_error("free energy requires a primitive (mixing) model");
    mu_phi_ = std::make_shared<EquilibriumMeasure>(equilibrium(working_model(), *phi2_));
    p_phi_ = mu_phi_->pressure;
    m0_ = integral(mu_phi_->chain, *psi2_raw_);
    psi2_ = std::make_shared<LocallyConstantFn>(psi2_raw_->shifted(-m0_));
  }

  const SftModel& working_model() const { return recoding_->target; }
  const BlockRecoding& recoding() const { return *recoding_; }
  const LocallyConstantFn& phi2() const { return *phi2_; }
  const LocallyConstantFn& psi2_centered() const { return *psi2_; }
  const LocallyConstantFn& psi2_raw() const { return *psi2_raw_; }
  const EquilibriumMeasure& mu_phi() const { return *mu_phi_; }
  double pressure_phi() const { return p_phi_; }
  /// Centering constant: integral of the raw observable against mu_phi.
  double centering() const { return m0_; }

  struct Point {
    double E = 0.0;
    double Eprime = 0.0;
  };

  /// E and E' in centered coordinates.
  Point at(double t) const {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = cache_.find(t);
      if (it != cache_.end()) return it->second;
    }
    Point p = compute(t);
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.emplace(t, p).first->second;
  }

  /// E and E' of the raw (uncentered) observable.
  Point at_uncentered(double t) const {
    Point p = at(t);
    return Point{p.E + t * m0_, p.Eprime + m0_};
  }

  double asymptotic_variance() const {
    // Richardson-extrapolated central second difference of E at 0.
    const double h = 0.1;
    auto d2 = [&](double step) {
      return (at(step).E - 2.0 * at(0.0).E + at(-step).E) / (step * step);
    };
    return (4.0 * d2(h / 2) - d2(h)) / 3.0;
  }

 private:
  Point compute(double t) const {
    LocallyConstantFn tilted =
        LocallyConstantFn::lincomb(working_model(), *phi2_, 1.0, *psi2_, t);
    EquilibriumMeasure mu_t = equilibrium(working_model(), tilted);
    double E = mu_t.pressure - p_phi_;
    double Eprime = integral(mu_t.chain, *psi2_);
    return Point{E, Eprime};
  }

  std::shared_ptr<BlockRecoding> recoding_;
  std::shared_ptr<LocallyConstantFn> phi2_, psi2_raw_, psi2_;
  std::shared_ptr<EquilibriumMeasure> mu_phi_;
  double p_phi_ = 0.0;
  double m0_ = 0.0;
  mutable std::map<double, Point> cache_;
  mutable std::mutex mutex_;
};

/// Convenience wrapper matching the operation signature.
inline FreeEnergy::Point free_energy(const SftModel& model, const LocallyConstantFn& phi,
                                     const LocallyConstantFn& psi, double t,
                                     bool centered = true) {
  FreeEnergy fe(model, phi, psi);
  return centered ? fe.at(t) : fe.at_uncentered(t);
}

/// Evidence for or against the observable being cohomologous to a constant:
/// affine deviations of E at probe points plus the estimated E''(0).
struct DegeneracyReport {
  bool cohomologous = false;
  double sigma2 = 0.0;
  double max_affine_deviation = 0.0;
  std::vector<std::pair<double, double>> probes;  // (t, |E(t) - t E'(0)|)
};

inline DegeneracyReport detect_degeneracy(const FreeEnergy& fe) {
  DegeneracyReport rep;
  const double slope = fe.at(0.0).Eprime;  // ~0 after centering
  for (double t : {-10.0, -1.0, -0.01, 0.01, 1.0, 10.0}) {
    double dev = std::abs(fe.at(t).E - t * slope);
    rep.probes.emplace_back(t, dev);
    rep.max_affine_deviation = std::max(rep.max_affine_deviation, dev);
  }
  rep.sigma2 = fe.asymptotic_variance();
  rep.cohomologous =
      rep.max_affine_deviation < kDegeneracyTol && std::abs(rep.sigma2) < kDegeneracyTol;
  return rep;
}

inline DegeneracyReport detect_degeneracy(const SftModel& model, const LocallyConstantFn& phi,
                                          const LocallyConstantFn& psi) {
  FreeEnergy fe(model, phi, psi);
  return detect_degeneracy(fe);
}

/// Approximated domain of the Legendre transform: (E'(-T), E'(+T)). The true
/// interval of attainable averages may be slightly larger; endpoints are
/// approximations, never exact extremes.
inline std::pair<double, double> rate_domain(const FreeEnergy& fe,
                                             double T_max = kDefaultTmax,
                                             bool centered = true) {
  DegeneracyReport rep = detect_degeneracy(fe);
  if (rep.cohomologous)
    throw degeneracy_error("observable is cohomologous to a constant", rep.sigma2);
  double lo = centered ? fe.at(-T_max).Eprime : fe.at_uncentered(-T_max).Eprime;
  double hi = centered ? fe.at(T_max).Eprime : fe.at_uncentered(T_max).Eprime;
  return {lo, hi};
}

struct RatePoint {
  double I = 0.0;
  double t = 0.0;
};

/// Legendre transform I(s) = sup_t { s t - E(t) }, evaluated through the
/// first-order condition E'(t) = s by monotone bisection on [-T_max, T_max].
inline RatePoint legendre_point(const FreeEnergy& fe, double s, double T_max = kDefaultTmax,
                                bool centered = true) {
  DegeneracyReport rep = detect_degeneracy(fe);
  if (rep.cohomologous)
    throw degeneracy_error("rate function undefined: observable cohomologous to a constant",
                           rep.sigma2);
  const double sc = centered ? s : s - fe.centering();
  double lo = -T_max, hi = T_max;
  double elo = fe.at(lo).Eprime, ehi = fe.at(hi).Eprime;
  if (sc < elo || sc > ehi) {
    double off = centered ? 0.0 : fe.centering();
    throw domain_error("target average outside approximated rate domain", elo + off,
                       ehi + off);
  }
  double t = 0.0, et = fe.at(t).Eprime;
  for (int iter = 0; iter < 200 && std::abs(et - sc) > kLegendreTol; ++iter) {
    if (et < sc)
      lo = t;
    else
      hi = t;
    t = 0.5 * (lo + hi);
    et = fe.at(t).Eprime;
  }
  double I = sc * t - fe.at(t).E;
  if (I < 0.0 && I > -1e-12) I = 0.0;  // clip eigen-solver noise at the minimum
  return RatePoint{I, t};
}

inline RatePoint legendre(const SftModel& model, const LocallyConstantFn& phi,
                          const LocallyConstantFn& psi, double s,
                          double T_max = kDefaultTmax, bool centered = true) {
  FreeEnergy fe(model, phi, psi);
  return legendre_point(fe, s, T_max, centered);
}

/// Sampled, convexity-certified rate function over a grid of averages.
struct RateFunction {
  std::vector<double> s, I, t;
  double s_min = 0.0, s_max = 0.0;
  double T_max = kDefaultTmax;
  double centering = 0.0;
  bool nondegenerate = true;
  /// Most negative value of the slope increment scaled by the local spacing;
  /// equals the classical second difference on uniform grids.
  double convexity_violation = 0.0;

  bool convex_ok(double tol = 1e-9) const { return convexity_violation >= -tol; }
};

inline RateFunction build_rate_function(const FreeEnergy& fe, std::span<const double> grid,
                                        double T_max = kDefaultTmax, bool centered = true) {
  RateFunction rf;
  rf.T_max = T_max;
  rf.centering = fe.centering();
  auto [lo, hi] = rate_domain(fe, T_max, centered);
  rf.s_min = lo;
  rf.s_max = hi;
  for (double s : grid) {
    RatePoint p = legendre_point(fe, s, T_max, centered);
    rf.s.push_back(s);
    rf.I.push_back(p.I);
    rf.t.push_back(p.t);
  }
  for (std::size_t i = 1; i + 1 < rf.s.size(); ++i) {
    double dl = rf.s[i] - rf.s[i - 1], dr = rf.s[i + 1] - rf.s[i];
    if (dl <= 0.0 || dr <= 0.0) continue;
    double slope_l = (rf.I[i] - rf.I[i - 1]) / dl;
    double slope_r = (rf.I[i + 1] - rf.I[i]) / dr;
    double d2 = (slope_r - slope_l) * std::min(dl, dr);
    rf.convexity_violation = std::min(rf.convexity_violation, d2);
  }
  return rf;
}

/// Independent check of the rate function: maximises h + integral(phi) - P
/// over stationary Markov(1) chains with the average of psi pinned to s,
/// via 32 deterministic multi-starts. Returns the negated maximum.
inline double rate_by_variational_oracle(const SftModel& model, const LocallyConstantFn& phi,
                                         const LocallyConstantFn& psi, double s,
                                         int n_starts = 32, bool centered = true) {
  auto [rec, fns] = recode_to_depth2(model, {phi, psi});
  const SftModel& wm = rec.target;
  if (!wm.is_primitive())
    throw not_mixing_error("variational oracle requires a primitive model");
  const LocallyConstantFn& phi2 = fns[0];
  const LocallyConstantFn& psi2 = fns[1];
  EquilibriumMeasure mu = equilibrium(wm, phi2);
  const double p_top = mu.pressure;
  const double target = centered ? integral(mu.chain, psi2) + s : s;
  if (target < psi2.min_value() - 1e-12 || target > psi2.max_value() + 1e-12)
    throw domain_error("pinned average is unattainable", psi2.min_value(), psi2.max_value());

  MarkovFamily fam(wm);
  auto objective = [&](std::span<const double> th) {
    MarkovMeasure eta = fam.measure(th);
    return p_top - entropy_rate(eta) - integral(eta, phi2);
  };
  auto constraint = [&](std::span<const double> th) {
    return integral(fam.measure(th), psi2) - target;
  };
  ConstrainedOptions opt;
  opt.descent.max_iters = 250;
  MultiStartResult best = multistart(
      [&](std::vector<double> theta) {
        return minimize_equality(objective, constraint, std::move(theta), opt);
      },
      fam.param_count(), n_starts, 0x5eedull);
  if (best.feasible_starts == 0)
    throw domain_error("no stationary chain attains the pinned average",
                       psi2.min_value(), psi2.max_value());
  return best.value;
}

}  // namespace thermopress
