// Command-line front end for the reconstruction simulator. Talks to the
// shared library strictly through the C API.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ccm/capi.h"

namespace {

struct RunArgs {
  int64_t na = 8, np = 2, nu = 1, codebook_m = 16, rounds = 40, trials = 1;
  int64_t n_paths = 20, b_hist_probes = 64;
  uint64_t seed = 1;
  double ceq_db = std::numeric_limits<double>::infinity();
  double lambda = 1e-3, epsilon_db = -20.0;
  double b_hist_perturbation = 0.1, audit_tol = 1e-7;
  std::string m_prime = "mixture", sigma = "equality", x = "designed";
  std::string b_mode = "trace";
  bool baseline = false;
  std::string out = "-";
  std::string aggregate_out;
  std::string trace_out;
  std::string import_ccm;
};

bool write_text(const std::string& path, const char* text) {
  if (path == "-") {
    std::cout << text;
    return static_cast<bool>(std::cout);
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  return static_cast<bool>(f);
}

int die(ccm_experiment* exp, const std::string& what) {
  std::cerr << "ccmsim: " << what;
  if (exp && ccm_last_error(exp)[0] != '\0') {
    std::cerr << ": " << ccm_last_error(exp);
  }
  std::cerr << "\n";
  ccm_experiment_free(exp);
  return 2;
}

int run_experiment(const RunArgs& a) {
  ccm_experiment* exp = ccm_experiment_new();
  if (!exp) {
    std::cerr << "ccmsim: out of memory\n";
    return 2;
  }
  struct KvInt {
    const char* key;
    int64_t value;
  } ints[] = {
      {"na", a.na},           {"np", a.np},
      {"nu", a.nu},           {"codebook_m", a.codebook_m},
      {"rounds", a.rounds},   {"trials", a.trials},
      {"n_paths", a.n_paths}, {"b_hist_probes", a.b_hist_probes},
  };
  for (const auto& kv : ints) {
    if (ccm_set_int(exp, kv.key, kv.value) != CCM_OK) {
      return die(exp, std::string("bad --") + kv.key);
    }
  }
  ccm_set_int(exp, "seed", static_cast<int64_t>(a.seed));
  ccm_set_int(exp, "baseline", a.baseline ? 1 : 0);
  ccm_set_int(exp, "solver_trace", a.trace_out.empty() ? 0 : 1);
  struct KvReal {
    const char* key;
    double value;
  } reals[] = {
      {"ceq_db", a.ceq_db},
      {"lambda", a.lambda},
      {"epsilon_db", a.epsilon_db},
      {"b_hist_perturbation", a.b_hist_perturbation},
      {"audit_tol", a.audit_tol},
  };
  for (const auto& kv : reals) {
    if (ccm_set_real(exp, kv.key, kv.value) != CCM_OK) {
      return die(exp, std::string("bad value for ") + kv.key);
    }
  }
  struct KvStr {
    const char* key;
    const std::string& value;
  } strs[] = {
      {"m_prime", a.m_prime},
      {"sigma", a.sigma},
      {"x", a.x},
      {"b_mode", a.b_mode},
  };
  for (const auto& kv : strs) {
    if (ccm_set_string(exp, kv.key, kv.value.c_str()) != CCM_OK) {
      return die(exp, std::string("bad value for ") + kv.key);
    }
  }
  if (!a.import_ccm.empty()) {
    std::ifstream f(a.import_ccm, std::ios::binary);
    if (!f) return die(exp, "cannot open " + a.import_ccm);
    std::ostringstream buf;
    buf << f.rdbuf();
    if (ccm_load_ccm_csv(exp, buf.str().c_str()) != CCM_OK) {
      return die(exp, "cannot parse " + a.import_ccm);
    }
  }
  if (ccm_run(exp) != CCM_OK) return die(exp, "run failed");

  const int failed = ccm_failed_trials(exp);
  if (failed > 0) {
    std::cerr << "ccmsim: " << failed
              << " trial(s) failed and were excluded\n";
  }
  char* traj = ccm_trajectory_csv(exp);
  if (!traj || !write_text(a.out, traj)) {
    ccm_string_free(traj);
    return die(exp, "cannot write " + a.out);
  }
  ccm_string_free(traj);
  if (!a.aggregate_out.empty()) {
    char* agg = ccm_aggregate_csv(exp);
    if (!agg || !write_text(a.aggregate_out, agg)) {
      ccm_string_free(agg);
      return die(exp, "cannot write " + a.aggregate_out);
    }
    ccm_string_free(agg);
  }
  if (!a.trace_out.empty()) {
    char* tr = ccm_solver_trace_csv(exp);
    if (!tr || !write_text(a.trace_out, tr)) {
      ccm_string_free(tr);
      return die(exp, "cannot write " + a.trace_out);
    }
    ccm_string_free(tr);
  }
  ccm_experiment_free(exp);
  return 0;
}

int export_codebook(int64_t np, int64_t oversampling,
                    const std::string& out) {
  char* csv = ccm_codebook_csv(static_cast<int>(np),
                               static_cast<int>(oversampling));
  if (!csv) {
    std::cerr << "ccmsim: invalid codebook sizes\n";
    return 2;
  }
  const bool ok = write_text(out, csv);
  ccm_string_free(csv);
  if (!ok) {
    std::cerr << "ccmsim: cannot write " << out << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariance reconstruction from limited codebook feedback"};
  app.set_version_flag("--version", std::string(ccm_version()));
  app.require_subcommand(1);

  RunArgs a;
  CLI::App* run = app.add_subcommand("run", "Run a Monte-Carlo experiment");
  run->add_option("--na", a.na, "Transmit antennas")->capture_default_str();
  run->add_option("--np", a.np, "Pilot ports")->capture_default_str();
  run->add_option("--nu", a.nu, "Receive antennas")->capture_default_str();
  run->add_option("--codebook-m", a.codebook_m,
                  "Codebook size (multiple of np)")
      ->capture_default_str();
  run->add_option("--rounds", a.rounds, "Feedback rounds per trial")
      ->capture_default_str();
  run->add_option("--trials", a.trials, "Monte-Carlo trials")
      ->capture_default_str();
  run->add_option("--seed", a.seed, "Base seed")->capture_default_str();
  run->add_option("--n-paths", a.n_paths, "Scatterers in synthetic channel")
      ->capture_default_str();
  run->add_option("--ceq-db", a.ceq_db,
                  "Channel estimation quality in dB (inf = error-free)");
  run->add_option("--lambda", a.lambda, "Trace regularizer weight")
      ->capture_default_str();
  run->add_option("--m-prime", a.m_prime, "random|reuse|mixture")
      ->capture_default_str();
  run->add_option("--epsilon-db", a.epsilon_db, "Mixture switch threshold")
      ->capture_default_str();
  run->add_option("--sigma", a.sigma, "equality|sampled")
      ->capture_default_str();
  run->add_option("--x", a.x, "designed|random")->capture_default_str();
  run->add_option("--b-mode", a.b_mode, "trace|frob|historical")
      ->capture_default_str();
  run->add_option("--b-hist-probes", a.b_hist_probes,
                  "Probes for the historical bound")
      ->capture_default_str();
  run->add_option("--b-hist-perturbation", a.b_hist_perturbation,
                  "Historical prior distortion")
      ->capture_default_str();
  run->add_option("--audit-tol", a.audit_tol, "Feasibility audit tolerance")
      ->capture_default_str();
  run->add_flag("--baseline", a.baseline,
                "Also run the codebook-cycling baseline");
  run->add_option("--out", a.out, "Trajectory CSV path ('-' = stdout)")
      ->capture_default_str();
  run->add_option("--aggregate-out", a.aggregate_out,
                  "Per-round aggregate CSV path");
  run->add_option("--solver-trace", a.trace_out,
                  "Write the trial-0 solver iteration log here");
  run->add_option("--import-ccm", a.import_ccm,
                  "Ground-truth CCM CSV (re,im rows) instead of synthesis");

  int64_t np = 2, oversampling = 8;
  std::string cb_out = "-";
  CLI::App* exp = app.add_subcommand("export-codebook",
                                     "Dump the DFT codebook as CSV");
  exp->add_option("--np", np, "Pilot ports")->capture_default_str();
  exp->add_option("--oversampling", oversampling, "Codewords per port")
      ->capture_default_str();
  exp->add_option("--out", cb_out, "Output path ('-' = stdout)")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return run_experiment(a);
  return export_codebook(np, oversampling, cb_out);
}
