// Exercises the installed binary end to end: exit-code taxonomy, output
// formats, and byte-level determinism across runs and thread counts.
// Usage: cli_checks <path-to-thermopress-binary>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

int failures = 0;
std::string g_bin;
std::string g_dir;

void check(bool ok, const std::string& what) {
  if (ok) {
    std::cout << "ok: " << what << "\n";
  } else {
    ++failures;
    std::cout << "FAILED: " << what << "\n";
  }
}

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run(const std::string& args) {
  std::string out_file = g_dir + "/cmd_stdout.txt";
  std::string cmd = g_bin + " " + args + " > " + out_file + " 2> " + g_dir + "/err.txt";
  int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  std::ifstream in(out_file, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  r.stdout_text = buf.str();
  return r;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* kFullShiftDoc = R"({
  "alphabet": 2,
  "transition": [[1, 1], [1, 1]],
  "functions": {
    "zero": {"depth": 1, "table": {"0": 0.0, "1": 0.0}},
    "chi0": {"depth": 1, "table": {"0": 1.0, "1": 0.0}},
    "const": {"depth": 1, "table": {"0": 2.0, "1": 2.0}},
    "bumpy": {"depth": 2, "table": {"00": 0.31, "01": -0.12, "10": 0.44, "11": -0.05}}
  }
})";

const char* kBlockDoc = R"({
  "alphabet": 4,
  "transition": [[1,1,1,0],[1,1,1,0],[1,1,1,0],[0,0,0,1]]
})";

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_checks <thermopress-binary>\n";
    return 2;
  }
  g_bin = argv[1];
  g_dir = "cli_checks_tmp";
  std::system(("rm -rf " + g_dir + " && mkdir -p " + g_dir).c_str());

  std::string full = g_dir + "/full.json";
  std::string blk = g_dir + "/block.json";
  write_file(full, kFullShiftDoc);
  write_file(blk, kBlockDoc);

  // --- pressure -----------------------------------------------------------
  RunResult p = run("pressure --model " + full);
  check(p.exit_code == 0, "pressure exits 0 on the full shift");
  check(p.stdout_text.find("\"pressure\": 0.6931471805599453") != std::string::npos,
        "pressure prints log 2");
  check(p.stdout_text.find("\"gibbs_K\"") != std::string::npos,
        "pressure includes the Gibbs constant for mixing models");

  RunResult pb = run("pressure --model " + blk);
  check(pb.exit_code == 0, "pressure accepts the reducible block model");
  check(pb.stdout_text.find("\"primitive\": false") != std::string::npos,
        "reducible model flagged non-primitive");
  check(pb.stdout_text.find("1.0986122886681") != std::string::npos,
        "reducible model pressure is log 3");
  check(pb.stdout_text.find("\"pi\"") == std::string::npos,
        "no equilibrium data for non-mixing models");

  // --- exit taxonomy ------------------------------------------------------
  check(run("pressure --model " + g_dir + "/missing.json").exit_code == 2,
        "missing model file exits 2");
  write_file(g_dir + "/broken.json", "{\"alphabet\": 2,");
  check(run("pressure --model " + g_dir + "/broken.json").exit_code == 2,
        "malformed JSON exits 2");
  check(run("rate --model " + blk + " --psi nope").exit_code == 2,
        "unknown function name exits 2");
  check(run("free-energy --model " + blk + " --psi nope").exit_code == 2,
        "free-energy on missing observable exits 2");
  check(run("spectrum --model " + full + " --psi const").exit_code == 5,
        "degenerate observable exits 5");
  check(run("spectrum --model " + full + " --psi chi0 --grid -0.1:0.4:10").exit_code == 2,
        "negative grid start exits 2");
  check(run("gibbs-check --model " + blk).exit_code == 3,
        "gibbs-check on a non-mixing model exits 3");
  check(run("ldp-verify --model " + full + " --psi chi0 --interval 0.7:0.9 " +
            "--nrange 4:40 --budget 1000").exit_code == 6,
        "budget overflow exits 6");
  check(run("nonsense-subcommand").exit_code == 2, "unknown subcommand exits 2");

  // environment override of the enumeration budget
  {
    std::string saved = g_bin;
    g_bin = "THERMOPRESS_BUDGET=1000 " + g_bin;
    check(run("ldp-verify --model " + full + " --psi chi0 --interval 0.7:0.9 " +
              "--nrange 4:40").exit_code == 6,
          "THERMOPRESS_BUDGET env override exits 6");
    g_bin = "THERMOPRESS_BUDGET=bogus " + saved;
    check(run("pressure --model " + full + " --nmax 12").exit_code == 2,
          "malformed THERMOPRESS_BUDGET exits 2");
    g_bin = saved;
  }

  // --- spectrum CSV -------------------------------------------------------
  std::string spec_out = g_dir + "/spec.csv";
  RunResult s1 = run("spectrum --model " + full + " --psi chi0 --grid 0:0.45:46 --output " +
                     spec_out);
  check(s1.exit_code == 0, "spectrum exits 0");
  std::string spec_text = slurp(spec_out);
  check(spec_text.rfind("# model=", 0) == 0, "spectrum CSV starts with the hash comment");
  check(spec_text.find("c,P_of_c,c_star,branch_tie_flag,in_domain") != std::string::npos,
        "spectrum CSV header row");
  int rows = 0;
  for (char ch : spec_text)
    if (ch == '\n') ++rows;
  check(rows == 2 + 46, "spectrum CSV has 46 data rows");
  check(spec_text.find("0,0.6931471805599453,0,0,1") != std::string::npos,
        "first spectrum row is (0, log 2, 0)");

  // --- ldp-verify ---------------------------------------------------------
  std::string ldp_out = g_dir + "/ldp.csv";
  RunResult l1 = run("ldp-verify --model " + full + " --psi chi0 --interval 0.7:0.9 " +
                     "--nrange 4:20 --upper-bound-c 0.25 --delta 0.01 --output " + ldp_out);
  check(l1.exit_code == 0, "ldp-verify passes on the binomial band");
  check(l1.stdout_text.find("PASS") != std::string::npos, "ldp-verify prints PASS");
  check(slurp(ldp_out).find("# verdict=PASS") != std::string::npos,
        "ldp CSV records the verdict");

  RunResult l2 = run("ldp-verify --model " + full + " --psi chi0 --interval 0.45:0.55 " +
                     "--nrange 6:18");
  check(l2.exit_code == 0, "interval containing the mean passes with near-zero rate");

  // --- level2 -------------------------------------------------------------
  std::string l2_out = g_dir + "/level2.json";
  RunResult lv = run("level2 --model " + full + " --radius 0.05 --depth 5 --starts 24 "
                     "--output " + l2_out);
  check(lv.exit_code == 0, "level2 exits 0");
  std::string l2_text = slurp(l2_out);
  check(l2_text.find("\"sphere_ball_agree\": true") != std::string::npos,
        "sphere and ball infima agree");
  check(l2_text.find("\"low_confidence\": false") != std::string::npos,
        "level2 multi-starts agree");

  // --- rate + gibbs-check formats -----------------------------------------
  std::string rate_out = g_dir + "/rate.csv";
  check(run("rate --model " + full + " --psi chi0 --sgrid -0.4:0.4:17 --output " +
            rate_out).exit_code == 0,
        "rate exits 0");
  std::string rate_text = slurp(rate_out);
  check(rate_text.find("s,I_s,t_s") != std::string::npos, "rate CSV header row");
  check(rate_text.find("centering=0.5") != std::string::npos,
        "rate CSV names the centering constant");

  std::string fe_out = g_dir + "/fe.csv";
  RunResult fr = run("free-energy --model " + full + " --psi chi0 --tgrid -2:2:5 "
                     "--uncentered --output " + fe_out);
  check(fr.exit_code == 0, "free-energy exits 0");
  std::string fe_text = slurp(fe_out);
  check(fe_text.find("t,E,E_prime") != std::string::npos, "free-energy CSV header row");
  // E(0) = 0 in any coordinates
  check(fe_text.find("\n0,0,0.5") != std::string::npos,
        "free-energy row at t=0 is (0, 0, mean)");

  RunResult gc = run("gibbs-check --model " + full + " --phi bumpy --nmax 9");
  check(gc.exit_code == 0, "gibbs-check exits 0");
  check(gc.stdout_text.find("\"gibbs_K\"") != std::string::npos, "gibbs JSON has K");
  check(gc.stdout_text.find("\"analytic_K\"") != std::string::npos,
        "gibbs JSON has the prediction");

  // --- determinism: identical bytes across runs and thread counts ----------
  auto emit = [&](const std::string& tag, int threads) {
    std::string path = g_dir + "/det_" + tag + ".out";
    std::string cmd = "ldp-verify --model " + full + " --psi bumpy --interval 0.0:0.2 " +
                      "--nrange 18:21 --budget 8589934592 --threads " +
                      std::to_string(threads) + " --output " + path;
    RunResult r = run(cmd);
    check(r.exit_code == 0, "determinism artifact run (" + tag + ")");
    return slurp(path);
  };
  std::string d1 = emit("t1_a", 1);
  std::string d2 = emit("t1_b", 1);
  std::string d8 = emit("t8", 8);
  check(!d1.empty() && d1 == d2, "byte-identical across repeated runs");
  check(d1 == d8, "byte-identical across 1 vs 8 threads");

  std::string s2_out = g_dir + "/spec2.csv";
  run("spectrum --model " + full + " --psi chi0 --grid 0:0.45:46 --output " + s2_out);
  check(slurp(spec_out) == slurp(s2_out), "spectrum CSV byte-identical across runs");

  std::cout << (failures == 0 ? "ALL CLI CHECKS PASSED\n"
                              : std::to_string(failures) + " CLI CHECKS FAILED\n");
  return failures == 0 ? 0 : 1;
}
