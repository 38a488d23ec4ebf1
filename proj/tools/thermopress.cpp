// Command-line front end: loads model documents, dispatches to the library,
// and emits deterministic CSV/JSON artifacts.
//
// Exit codes: 0 success, 2 input error, 3 model not mixing, 4 property
// violation, 5 degenerate observable, 6 resource limit exceeded.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thermopress/level2.hpp"
#include "thermopress/model_io.hpp"
#include "thermopress/oracle.hpp"
#include "thermopress/ratefn.hpp"
#include "thermopress/recode.hpp"
#include "thermopress/report.hpp"
#include "thermopress/spectrum.hpp"
#include "thermopress/transfer.hpp"
#include "thermopress/version.hpp"

namespace {

using namespace thermopress;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNotMixing = 3;
constexpr int kExitPropertyViolation = 4;
constexpr int kExitDegenerate = 5;
constexpr int kExitResource = 6;

std::vector<double> parse_grid(const std::string& text) {
  double start = 0, stop = 0;
  int count = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> start >> c1 >> stop >> c2 >> count) || c1 != ':' || c2 != ':' || !in.eof())
    throw std::invalid_argument("grid must be start:stop:count, got \"" + text + "\"");
  if (count < 1) throw std::invalid_argument("grid count must be >= 1");
  if (count == 1) return {start};
  std::vector<double> g;
  for (int k = 0; k < count; ++k)
    g.push_back(start + (stop - start) * k / static_cast<double>(count - 1));
  return g;
}

std::pair<double, double> parse_interval(const std::string& text) {
  double a = 0, b = 0;
  char c = 0;
  std::istringstream in(text);
  if (!(in >> a >> c >> b) || c != ':' || !in.eof())
    throw std::invalid_argument("interval must be a:b, got \"" + text + "\"");
  return {a, b};
}

std::pair<int, int> parse_nrange(const std::string& text) {
  int a = 0, b = 0;
  char c = 0;
  std::istringstream in(text);
  if (!(in >> a >> c >> b) || c != ':' || !in.eof() || a < 1 || b < a)
    throw std::invalid_argument("range must be lo:hi with 1 <= lo <= hi, got \"" + text +
                                "\"");
  return {a, b};
}

std::uint64_t env_budget() {
  if (const char* s = std::getenv("THERMOPRESS_BUDGET")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
    throw std::invalid_argument("THERMOPRESS_BUDGET must be a positive integer");
  }
  return kDefaultWordBudget;
}

void write_out(const std::string& path, const std::string& payload) {
  if (path.empty() || path == "-") {
    std::cout << payload;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << payload;
}

LocallyConstantFn potential_or_zero(const ModelFile& mf, const std::string& name) {
  if (name.empty()) return LocallyConstantFn::constant(mf.model, 0.0);
  return mf.fn(name);
}

struct CommonArgs {
  std::string model_path;
  std::string output = "-";
  std::string phi_name;
  std::string psi_name;
  int threads = 1;
  std::uint64_t seed = 2026;
  std::optional<std::uint64_t> budget;
  double tmax = kDefaultTmax;
  bool uncentered = false;

  std::uint64_t effective_budget() const { return budget ? *budget : env_budget(); }
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_psi) {
  cmd->add_option("--model", args.model_path, "model JSON document")->required();
  cmd->add_option("--output", args.output, "output path ('-' = stdout)");
  cmd->add_option("--phi", args.phi_name, "potential name (omit for zero potential)");
  auto* psi = cmd->add_option("--psi", args.psi_name, "observable name");
  if (needs_psi) psi->required();
  cmd->add_option("--threads", args.threads, "enumeration worker cap")
      ->check(CLI::Range(1, 512));
  cmd->add_option("--seed", args.seed, "seed for multi-start schedules");
  cmd->add_option("--budget", args.budget,
                  "word-enumeration budget (overrides THERMOPRESS_BUDGET)");
  cmd->add_option("--tmax", args.tmax, "tilt truncation for the rate-function domain");
  cmd->add_flag("--uncentered", args.uncentered,
                "report averages in raw (uncentered) coordinates");
}

int run(int argc, char** argv) {
  CLI::App app{"thermodynamic-formalism pressure computations on subshifts "
               "of finite type"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  CommonArgs args;

  auto* cmd_pressure = app.add_subcommand(
      "pressure", "topological pressure, equilibrium chain and Gibbs constant");
  int gibbs_nmax = 8;
  add_common(cmd_pressure, args, false);
  cmd_pressure->add_option("--nmax", gibbs_nmax, "cylinder depth for the Gibbs check");

  auto* cmd_gibbs = app.add_subcommand("gibbs-check", "Gibbs certificate over cylinders");
  int cert_nmax = 10;
  add_common(cmd_gibbs, args, false);
  cmd_gibbs->add_option("--nmax", cert_nmax, "largest cylinder length tested");

  auto* cmd_fe = app.add_subcommand("free-energy", "free energy E(t) and derivative");
  std::string tgrid = "-5:5:21";
  add_common(cmd_fe, args, true);
  cmd_fe->add_option("--tgrid", tgrid, "tilt grid start:stop:count");

  auto* cmd_rate = app.add_subcommand("rate", "rate function samples");
  std::string sgrid;
  add_common(cmd_rate, args, true);
  cmd_rate->add_option("--sgrid", sgrid,
                       "average grid start:stop:count (default spans the domain)");

  auto* cmd_spec = app.add_subcommand("spectrum", "deviation-set pressure spectrum");
  std::string cgrid = "0:0.45:46";
  add_common(cmd_spec, args, true);
  cmd_spec->add_option("--grid", cgrid, "radius grid start:stop:count (from c >= 0)");

  auto* cmd_ldp = app.add_subcommand("ldp-verify",
                                     "finite-length deviation masses vs the rate function");
  std::string interval, nrange = "4:20";
  double slack_C = 1.0, theorem_delta = 0.01;
  std::optional<double> theorem_c;
  add_common(cmd_ldp, args, true);
  cmd_ldp->add_option("--interval", interval, "closed interval a:b (raw units)")
      ->required();
  cmd_ldp->add_option("--nrange", nrange, "cylinder lengths lo:hi");
  cmd_ldp->add_option("--slack", slack_C, "sandwich slack constant C in C log(n)/n");
  cmd_ldp->add_option("--upper-bound-c", theorem_c,
                      "also check the deviation upper bound at this radius");
  cmd_ldp->add_option("--delta", theorem_delta, "neighbourhood radius for the bound check");

  auto* cmd_l2 = app.add_subcommand("level2", "empirical-measure deviation pressure");
  double radius = 0.05;
  int depth = 6, starts = 64;
  add_common(cmd_l2, args, false);
  cmd_l2->add_option("--radius", radius, "metric radius c")->required();
  cmd_l2->add_option("--depth", depth, "metric truncation depth");
  cmd_l2->add_option("--starts", starts, "multi-start count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help / --version
      app.exit(e);
      return kExitOk;
    }
    std::cerr << e.what() << "\n";
    return kExitInput;
  }

  try {
    ModelFile mf = load_model_file(args.model_path);
    LocallyConstantFn phi = potential_or_zero(mf, args.phi_name);

    // deeper-than-2 potentials are moved to the block presentation first
    auto [rec, recoded] = recode_to_depth2(mf.model, {phi});
    const SftModel& wm = rec.target;
    const LocallyConstantFn& phi2 = recoded[0];

    if (*cmd_pressure) {
      Matrix L = transfer_matrix(wm, phi2);
      PerronData d = detail::spectral_radius_data(L);
      std::optional<EquilibriumMeasure> eq;
      std::optional<GibbsCertificate> cert;
      if (wm.is_primitive()) {
        eq = equilibrium(wm, phi2);
        cert = gibbs_certify(wm, *eq, phi2, eq->pressure, gibbs_nmax,
                             args.effective_budget());
      }
      write_out(args.output,
                pressure_report_json(mf.content_hash, std::log(d.lambda), d.lambda,
                                     wm.is_primitive(), eq ? &*eq : nullptr,
                                     cert ? &*cert : nullptr));
      return kExitOk;
    }

    if (*cmd_gibbs) {
      if (!wm.is_primitive())
        throw not_mixing_error("gibbs-check requires a primitive transition matrix");
      EquilibriumMeasure eq = equilibrium(wm, phi2);
      GibbsCertificate cert =
          gibbs_certify(wm, eq, phi2, eq.pressure, cert_nmax, args.effective_budget());
      write_out(args.output, gibbs_report_json(mf.content_hash, eq.pressure, eq, cert));
      return kExitOk;
    }

    if (*cmd_fe) {
      FreeEnergy fe(mf.model, phi, mf.fn(args.psi_name));
      std::vector<double> ts = parse_grid(tgrid);
      write_out(args.output, free_energy_csv(mf.content_hash, fe, ts, !args.uncentered));
      return kExitOk;
    }

    if (*cmd_rate) {
      FreeEnergy fe(mf.model, phi, mf.fn(args.psi_name));
      std::vector<double> grid;
      if (!sgrid.empty()) {
        grid = parse_grid(sgrid);
      } else {
        auto [lo, hi] = rate_domain(fe, args.tmax, !args.uncentered);
        double pad = 0.05 * (hi - lo);
        for (int k = 0; k <= 40; ++k)
          grid.push_back(lo + pad + (hi - lo - 2 * pad) * k / 40.0);
      }
      RateFunction rf = build_rate_function(fe, grid, args.tmax, !args.uncentered);
      write_out(args.output, rate_csv(mf.content_hash, rf));
      return kExitOk;
    }

    if (*cmd_spec) {
      FreeEnergy fe(mf.model, phi, mf.fn(args.psi_name));
      std::vector<double> grid = parse_grid(cgrid);
      PressureSpectrum sp = spectrum_scan(fe, grid, args.tmax);
      write_out(args.output, spectrum_csv(mf.content_hash, fe.centering(), sp));
      if (!sp.ok()) {
        for (const auto& d : sp.diagnostics) std::cerr << "property violation: " << d << "\n";
        return kExitPropertyViolation;
      }
      return kExitOk;
    }

    if (*cmd_ldp) {
      FreeEnergy fe(mf.model, phi, mf.fn(args.psi_name));
      EquilibriumMeasure eq = equilibrium(fe.working_model(), fe.phi2());
      auto [a, b] = parse_interval(interval);
      if (a > b) throw std::invalid_argument("interval endpoints out of order");
      auto [nlo, nhi] = parse_nrange(nrange);
      std::vector<int> ns;
      for (int n = nlo; n <= nhi; ++n) ns.push_back(n);
      EnumerationOptions opts;
      opts.budget = args.effective_budget();
      opts.threads = args.threads;
      SandwichReport rep = ldp_sandwich_check(fe, fe.working_model(), eq.chain,
                                              fe.psi2_raw(), a, b, ns, slack_C, opts,
                                              args.tmax);
      bool ok = rep.pass;
      std::string note;
      if (theorem_c) {
        RealSet rays = RealSet::complement_ball(fe.centering(), *theorem_c);
        UpperBoundReport ub =
            deviation_upper_bound_check(fe, fe.working_model(), eq.chain, fe.psi2_raw(),
                                        rays, theorem_delta, ns, opts, args.tmax);
        ok = ok && ub.ordering_ok;
        note = " upper_bound=" + fmt(ub.upper_bound) +
               (ub.exact ? " exact=" + fmt(*ub.exact) : "");
      }
      std::string verdict = ok ? "PASS" : "FAIL";
      write_out(args.output,
                ldp_csv(mf.content_hash, fe.centering(), rep.series, verdict + note));
      std::cout << verdict << "\n";
      return ok ? kExitOk : kExitPropertyViolation;
    }

    if (*cmd_l2) {
      if (!wm.is_primitive())
        throw not_mixing_error("level2 requires a primitive transition matrix");
      SphereInfimum inf = infimum_on_sphere(wm, phi2, radius, depth, starts, args.seed);
      EquilibriumMeasure eq = equilibrium(wm, phi2);
      double value = eq.pressure - inf.value;
      write_out(args.output,
                level2_report_json(mf.content_hash, eq.pressure, inf, value));
      if (radius > 0.0 && !(value < eq.pressure - 1e-9)) {
        std::cerr << "property violation: no strict pressure gap at radius " << radius
                  << "\n";
        return kExitPropertyViolation;
      }
      if (!inf.sphere_ball_agree) {
        std::cerr << "property violation: sphere and ball infima disagree\n";
        return kExitPropertyViolation;
      }
      return kExitOk;
    }

    return kExitInput;
  } catch (const not_mixing_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotMixing;
  } catch (const degeneracy_error& e) {
    std::cerr << "error: " << e.what() << " (sigma^2 = " << e.sigma2 << ")\n";
    return kExitDegenerate;
  } catch (const resource_limit_error& e) {
    std::cerr << "error: " << e.what() << " (budget " << e.budget << ", required "
              << e.required << ")\n";
    return kExitResource;
  } catch (const domain_error& e) {
    std::cerr << "error: " << e.what() << " (domain [" << e.s_min << ", " << e.s_max
              << "])\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
