#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermopress/ratefn.hpp"

namespace thermopress {

inline constexpr double kBranchTieTol = 1e-9;
inline constexpr double kConcavityTol = 1e-8;

/// Pressure of the set of points whose averages deviate from the mean by at
/// least c infinitely often: P_top - min{I(-c), I(c)}, with the branch c*
/// chosen as +c only when I(c) is strictly smaller (ties resolve to -c).
/// c is in centered coordinates.
struct DeviationPressure {
  std::optional<double> value;
  double c_star = 0.0;
  bool tie = false;
  bool plus_in_domain = false;
  bool minus_in_domain = false;
  /// set when neither branch lies in the approximated rate domain; the
  /// deviation set may then be empty and no finite formula applies
  bool possibly_empty = false;

  double gap(double p_top) const { return value ? p_top - *value : 0.0; }
};

inline DeviationPressure deviation_pressure(const FreeEnergy& fe, double c,
                                            double T_max = kDefaultTmax) {
  if (c < 0.0) throw std::invalid_argument("deviation radius must be >= 0");
  DeviationPressure out;
  const double p_top = fe.pressure_phi();
  if (c == 0.0) {
    out.value = p_top;
    out.c_star = 0.0;
    out.plus_in_domain = out.minus_in_domain = true;
    return out;
  }
  auto [lo, hi] = rate_domain(fe, T_max, true);
  out.plus_in_domain = c >= lo && c <= hi;
  out.minus_in_domain = -c >= lo && -c <= hi;
  double ip = std::numeric_limits<double>::infinity();
  double im = std::numeric_limits<double>::infinity();
  if (out.plus_in_domain) ip = legendre_point(fe, c, T_max, true).I;
  if (out.minus_in_domain) im = legendre_point(fe, -c, T_max, true).I;
  if (!out.plus_in_domain && !out.minus_in_domain) {
    out.possibly_empty = true;
    return out;
  }
  if (std::abs(ip - im) <= kBranchTieTol) {
    out.tie = true;
    out.c_star = -c;
  } else {
    out.c_star = ip < im ? c : -c;
  }
  out.value = p_top - std::min(ip, im);
  return out;
}

inline DeviationPressure deviation_pressure(const SftModel& model,
                                            const LocallyConstantFn& phi,
                                            const LocallyConstantFn& psi, double c,
                                            double T_max = kDefaultTmax) {
  FreeEnergy fe(model, phi, psi);
  return deviation_pressure(fe, c, T_max);
}

/// Pressure of the level set with asymptotic average alpha (centered):
/// P_top - I(alpha).
inline double levelset_pressure(const FreeEnergy& fe, double alpha,
                                double T_max = kDefaultTmax) {
  return fe.pressure_phi() - legendre_point(fe, alpha, T_max, true).I;
}

inline double levelset_pressure(const SftModel& model, const LocallyConstantFn& phi,
                                const LocallyConstantFn& psi, double alpha,
                                double T_max = kDefaultTmax) {
  FreeEnergy fe(model, phi, psi);
  return levelset_pressure(fe, alpha, T_max);
}

/// Grid of deviation pressures with per-point branch data and the property
/// checks (concavity, strict decrease) run on the in-domain interior.
/// Violations are reported as diagnostics, never silently.
struct PressureSpectrum {
  std::vector<double> c;
  std::vector<double> P;          // NaN where no branch is in domain
  std::vector<double> c_star;
  std::vector<char> tie;
  std::vector<char> in_domain;    // both branches inside the rate domain
  double p_top = 0.0;
  std::vector<std::string> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

inline PressureSpectrum spectrum_scan(const FreeEnergy& fe, std::span<const double> grid,
                                      double T_max = kDefaultTmax) {
  if (grid.empty()) throw std::invalid_argument("empty spectrum grid");
  if (grid.front() < 0.0) throw std::invalid_argument("grid must start at c >= 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1])
      throw std::invalid_argument("grid must be strictly ascending");
  PressureSpectrum sp;
  sp.p_top = fe.pressure_phi();
  for (double c : grid) {
    DeviationPressure d = deviation_pressure(fe, c, T_max);
    sp.c.push_back(c);
    sp.P.push_back(d.value ? *d.value : std::numeric_limits<double>::quiet_NaN());
    sp.c_star.push_back(d.c_star);
    sp.tie.push_back(d.tie ? 1 : 0);
    sp.in_domain.push_back(d.plus_in_domain && d.minus_in_domain ? 1 : 0);
  }
  if (grid.front() == 0.0 && sp.P.front() != sp.p_top)
    sp.diagnostics.push_back("P(0) differs from the total pressure");
  // interior of the validity interval: consecutive points with both branches
  // in domain
  for (std::size_t i = 0; i + 1 < sp.c.size(); ++i) {
    if (!sp.in_domain[i] || !sp.in_domain[i + 1]) continue;
    if (!(sp.P[i + 1] < sp.P[i]) && sp.c[i] >= 0.0)
      sp.diagnostics.push_back("not strictly decreasing between c=" +
                               std::to_string(sp.c[i]) + " and c=" +
                               std::to_string(sp.c[i + 1]));
  }
  for (std::size_t i = 1; i + 1 < sp.c.size(); ++i) {
    if (!sp.in_domain[i - 1] || !sp.in_domain[i] || !sp.in_domain[i + 1]) continue;
    double d2 = sp.P[i - 1] - 2.0 * sp.P[i] + sp.P[i + 1];
    // concavity of P: second differences <= tolerance
    if (d2 > kConcavityTol)
      sp.diagnostics.push_back("concavity violated at c=" + std::to_string(sp.c[i]) +
                               " (second difference " + std::to_string(d2) + ")");
  }
  return sp;
}

inline PressureSpectrum spectrum_scan(const SftModel& model, const LocallyConstantFn& phi,
                                      const LocallyConstantFn& psi,
                                      std::span<const double> grid,
                                      double T_max = kDefaultTmax) {
  FreeEnergy fe(model, phi, psi);
  return spectrum_scan(fe, grid, T_max);
}

/// Effect on the deviation pressures of perturbing both tables by a fixed
/// random direction scaled to sup-norm eps (deterministic seed). Reports the
/// largest change over the grid; eps = 0 reproduces the base values exactly.
struct ContinuityProbe {
  double eps = 0.0;
  double max_change = 0.0;
};

inline ContinuityProbe continuity_probe(const SftModel& model, const LocallyConstantFn& phi,
                                        const LocallyConstantFn& psi, double eps,
                                        std::span<const double> c_grid,
                                        std::uint64_t seed = 2026,
                                        double T_max = kDefaultTmax) {
  if (eps < 0.0) throw std::invalid_argument("perturbation scale must be >= 0");
  auto perturb = [&](const LocallyConstantFn& f, SplitMix64& rng) {
    LocallyConstantFn out = f;
    enumerate_words(model, f.depth(), [&](std::span<const Symbol> w) {
      double u = rng.uniform(-1.0, 1.0);
      out.set(w, f.value(w) + eps * u);
    });
    return out;
  };
  SplitMix64 rng(seed);
  LocallyConstantFn phi_p = perturb(phi, rng);
  LocallyConstantFn psi_p = perturb(psi, rng);
  FreeEnergy base(model, phi, psi);
  FreeEnergy pert(model, phi_p, psi_p);
  ContinuityProbe probe;
  probe.eps = eps;
  for (double c : c_grid) {
    DeviationPressure a = deviation_pressure(base, c, T_max);
    DeviationPressure b = deviation_pressure(pert, c, T_max);
    if (a.value && b.value)
      probe.max_change = std::max(probe.max_change, std::abs(*a.value - *b.value));
  }
  return probe;
}

/// Three-point Cauchy probe: perturbations at eps, eps/2, eps/4 must decay
/// monotonically for the spectrum to be continuous in the data.
struct CauchyProbe {
  std::vector<ContinuityProbe> probes;
  bool monotone_decay = false;
};

inline CauchyProbe continuity_cauchy(const SftModel& model, const LocallyConstantFn& phi,
                                     const LocallyConstantFn& psi, double eps,
                                     std::span<const double> c_grid,
                                     std::uint64_t seed = 2026,
                                     double T_max = kDefaultTmax) {
  CauchyProbe out;
  for (double e : {eps, eps / 2, eps / 4})
    out.probes.push_back(continuity_probe(model, phi, psi, e, c_grid, seed, T_max));
  out.monotone_decay = out.probes[0].max_change > out.probes[1].max_change &&
                       out.probes[1].max_change > out.probes[2].max_change;
  return out;
}

/// Strict gap between the total pressure and the deviation-set pressure at
/// radius c > 0; the same value is the pressure of the irregular points that
/// stay c-far infinitely often (when that set is nonempty).
struct DeviationGap {
  double p_top = 0.0;
  double deviation_value = 0.0;
  double gap = 0.0;
};

inline DeviationGap deviation_gap(const FreeEnergy& fe, double c,
                                  double T_max = kDefaultTmax) {
  if (!(c > 0.0)) throw std::invalid_argument("gap requires c > 0");
  DeviationPressure d = deviation_pressure(fe, c, T_max);
  if (!d.value)
    throw domain_error("deviation radius outside the rate domain on both sides", 0.0, 0.0);
  return DeviationGap{fe.pressure_phi(), *d.value, fe.pressure_phi() - *d.value};
}

}  // namespace thermopress
