#pragma once

#include <charconv>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermopress/level2.hpp"
#include "thermopress/oracle.hpp"
#include "thermopress/ratefn.hpp"
#include "thermopress/spectrum.hpp"
#include "thermopress/transfer.hpp"
#include "thermopress/version.hpp"

namespace thermopress {

/// Shortest round-trip decimal form; identical across runs by construction.
inline std::string fmt(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

inline std::string csv_header(const std::string& model_hash, double centering) {
  return "# model=" + model_hash + " centering=" + fmt(centering) + " version=" + kVersion +
         "\n";
}

using ordered_json = nlohmann::ordered_json;

inline ordered_json report_meta(const std::string& model_hash) {
  ordered_json meta;
  meta["model_hash"] = model_hash;
  meta["version"] = kVersion;
  return meta;
}

inline ordered_json matrix_json(const Matrix& p) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < p.rows; ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < p.cols; ++j) row.push_back(p(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string pressure_report_json(const std::string& model_hash, double pressure,
                                        double eigenvalue, bool primitive,
                                        const EquilibriumMeasure* eq,
                                        const GibbsCertificate* cert) {
  ordered_json doc;
  doc["meta"] = report_meta(model_hash);
  doc["pressure"] = pressure;
  doc["eigenvalue"] = eigenvalue;
  doc["primitive"] = primitive;
  if (eq) {
    doc["pi"] = eq->pi();
    doc["p"] = matrix_json(eq->p());
  }
  if (cert) doc["gibbs_K"] = cert->K;
  return doc.dump(2) + "\n";
}

inline std::string gibbs_report_json(const std::string& model_hash, double pressure,
                                     const EquilibriumMeasure& eq,
                                     const GibbsCertificate& cert) {
  ordered_json doc;
  doc["meta"] = report_meta(model_hash);
  doc["pressure"] = pressure;
  doc["pi"] = eq.pi();
  doc["p"] = matrix_json(eq.p());
  doc["gibbs_K"] = cert.K;
  doc["n_max"] = cert.n_max;
  doc["analytic_K"] = cert.analytic_K;
  doc["worst_word"] = cert.worst_word;
  doc["per_n_K"] = cert.per_n_K;
  return doc.dump(2) + "\n";
}

inline std::string rate_csv(const std::string& model_hash, const RateFunction& rf) {
  std::string out = csv_header(model_hash, rf.centering);
  out += "s,I_s,t_s\n";
  for (std::size_t i = 0; i < rf.s.size(); ++i)
    out += fmt(rf.s[i]) + "," + fmt(rf.I[i]) + "," + fmt(rf.t[i]) + "\n";
  return out;
}

inline std::string free_energy_csv(const std::string& model_hash, const FreeEnergy& fe,
                                   std::span<const double> ts, bool centered) {
  std::string out = csv_header(model_hash, fe.centering());
  out += "t,E,E_prime\n";
  for (double t : ts) {
    FreeEnergy::Point p = centered ? fe.at(t) : fe.at_uncentered(t);
    out += fmt(t) + "," + fmt(p.E) + "," + fmt(p.Eprime) + "\n";
  }
  return out;
}

inline std::string spectrum_csv(const std::string& model_hash, double centering,
                                const PressureSpectrum& sp) {
  std::string out = csv_header(model_hash, centering);
  out += "c,P_of_c,c_star,branch_tie_flag,in_domain\n";
  for (std::size_t i = 0; i < sp.c.size(); ++i) {
    out += fmt(sp.c[i]) + "," + fmt(sp.P[i]) + "," + fmt(sp.c_star[i]) + "," +
           (sp.tie[i] ? "1" : "0") + "," + (sp.in_domain[i] ? "1" : "0") + "\n";
  }
  return out;
}

inline std::string ldp_csv(const std::string& model_hash, double centering,
                           const DeviationMassSeries& series, const std::string& verdict) {
  std::string out = csv_header(model_hash, centering);
  out += "n,mass,rate\n";
  for (std::size_t i = 0; i < series.ns.size(); ++i)
    out += std::to_string(series.ns[i]) + "," + fmt(series.mass[i]) + "," +
           fmt(series.rate[i]) + "\n";
  out += "# verdict=" + verdict + "\n";
  return out;
}

inline std::string level2_report_json(const std::string& model_hash, double p_top,
                                      const SphereInfimum& inf, double value) {
  ordered_json doc;
  doc["meta"] = report_meta(model_hash);
  doc["p_top"] = p_top;
  doc["radius"] = inf.c;
  doc["sphere_infimum"] = inf.value;
  doc["ball_infimum"] = inf.ball_value;
  doc["level2_pressure"] = value;
  doc["gap"] = p_top - value;
  doc["constraint_residual"] = inf.constraint_residual;
  doc["spread"] = inf.spread;
  doc["low_confidence"] = inf.low_confidence;
  doc["sphere_ball_agree"] = inf.sphere_ball_agree;
  doc["reachable_radius"] = inf.reachable_radius;
  doc["argmin_pi"] = inf.argmin.pi;
  doc["argmin_p"] = matrix_json(inf.argmin.p);
  return doc.dump(2) + "\n";
}

}  // namespace thermopress
