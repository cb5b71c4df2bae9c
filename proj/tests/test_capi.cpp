#include "ccm/capi.h"

#include <cstring>
#include <string>

#include "doctest.h"

namespace {

struct Handle {
  ccm_experiment* p;
  Handle() : p(ccm_experiment_new()) {}
  ~Handle() { ccm_experiment_free(p); }
};

std::string take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  ccm_string_free(s);
  return out;
}

void configure_tiny(ccm_experiment* e, int64_t seed) {
  REQUIRE(ccm_set_int(e, "na", 4) == CCM_OK);
  REQUIRE(ccm_set_int(e, "np", 2) == CCM_OK);
  REQUIRE(ccm_set_int(e, "nu", 1) == CCM_OK);
  REQUIRE(ccm_set_int(e, "codebook_m", 8) == CCM_OK);
  REQUIRE(ccm_set_int(e, "rounds", 2) == CCM_OK);
  REQUIRE(ccm_set_int(e, "trials", 1) == CCM_OK);
  REQUIRE(ccm_set_int(e, "seed", seed) == CCM_OK);
}

}  // namespace

TEST_CASE("version string is present") {
  const char* v = ccm_version();
  REQUIRE(v != nullptr);
  CHECK(std::strlen(v) > 0);
}

TEST_CASE("null handles and null arguments are rejected") {
  CHECK(ccm_set_int(nullptr, "na", 4) == CCM_ERR_INVALID_ARG);
  CHECK(ccm_set_real(nullptr, "lambda", 1.0) == CCM_ERR_INVALID_ARG);
  CHECK(ccm_set_string(nullptr, "x", "designed") == CCM_ERR_INVALID_ARG);
  CHECK(ccm_run(nullptr) == CCM_ERR_INVALID_ARG);
  CHECK(ccm_trajectory_csv(nullptr) == nullptr);
  CHECK(ccm_aggregate_csv(nullptr) == nullptr);
  CHECK(ccm_failed_trials(nullptr) == -1);
  REQUIRE(ccm_last_error(nullptr) != nullptr);

  Handle h;
  REQUIRE(h.p != nullptr);
  CHECK(ccm_set_int(h.p, nullptr, 4) == CCM_ERR_INVALID_ARG);
  CHECK(ccm_set_string(h.p, "x", nullptr) == CCM_ERR_INVALID_ARG);
  CHECK(ccm_load_ccm_csv(h.p, nullptr) == CCM_ERR_INVALID_ARG);
}

TEST_CASE("unknown keys and out-of-range values get distinct statuses") {
  Handle h;
  CHECK(ccm_set_int(h.p, "bogus", 1) == CCM_ERR_BAD_KEY);
  CHECK(ccm_set_real(h.p, "bogus", 1.0) == CCM_ERR_BAD_KEY);
  CHECK(ccm_set_string(h.p, "bogus", "x") == CCM_ERR_BAD_KEY);

  CHECK(ccm_set_int(h.p, "na", 0) == CCM_ERR_BAD_VALUE);
  CHECK(ccm_set_int(h.p, "rounds", -3) == CCM_ERR_BAD_VALUE);
  CHECK(ccm_set_int(h.p, "trials", int64_t{1} << 40) == CCM_ERR_BAD_VALUE);
  CHECK(ccm_set_real(h.p, "lambda", -1.0) == CCM_ERR_BAD_VALUE);
  CHECK(ccm_set_real(h.p, "audit_tol", 0.0) == CCM_ERR_BAD_VALUE);
  CHECK(ccm_set_string(h.p, "m_prime", "nope") == CCM_ERR_BAD_VALUE);
  CHECK(ccm_set_string(h.p, "b_mode", "nope") == CCM_ERR_BAD_VALUE);
  CHECK(std::strlen(ccm_last_error(h.p)) > 0);
}

TEST_CASE("results are unavailable before a successful run") {
  Handle h;
  CHECK(ccm_trajectory_csv(h.p) == nullptr);
  CHECK(ccm_aggregate_csv(h.p) == nullptr);
  CHECK(ccm_solver_trace_csv(h.p) == nullptr);
  CHECK(ccm_failed_trials(h.p) == -1);
}

TEST_CASE("a tiny experiment runs and serves deterministic CSVs") {
  Handle a, b;
  configure_tiny(a.p, 7);
  configure_tiny(b.p, 7);
  REQUIRE(ccm_run(a.p) == CCM_OK);
  REQUIRE(ccm_run(b.p) == CCM_OK);
  CHECK(ccm_failed_trials(a.p) == 0);

  const std::string traj_a = take(ccm_trajectory_csv(a.p));
  const std::string traj_b = take(ccm_trajectory_csv(b.p));
  CHECK(traj_a.rfind("trial,round,", 0) == 0);
  CHECK(traj_a == traj_b);

  const std::string agg_a = take(ccm_aggregate_csv(a.p));
  const std::string agg_b = take(ccm_aggregate_csv(b.p));
  CHECK(agg_a.rfind("round,", 0) == 0);
  CHECK(agg_a == agg_b);

  Handle c;
  configure_tiny(c.p, 8);
  REQUIRE(ccm_run(c.p) == CCM_OK);
  CHECK(take(ccm_trajectory_csv(c.p)) != traj_a);
}

TEST_CASE("the solver trace is empty unless requested") {
  Handle h;
  configure_tiny(h.p, 7);
  REQUIRE(ccm_run(h.p) == CCM_OK);
  const std::string off = take(ccm_solver_trace_csv(h.p));
  CHECK(off ==
        "stage,iter,objective,mu,rho,eq_residual,grad_norm,min_slack\n");

  Handle v;
  configure_tiny(v.p, 7);
  REQUIRE(ccm_set_int(v.p, "solver_trace", 1) == CCM_OK);
  REQUIRE(ccm_run(v.p) == CCM_OK);
  const std::string on = take(ccm_solver_trace_csv(v.p));
  CHECK(on.size() > off.size());
  CHECK(on.rfind("stage,iter,", 0) == 0);
}

TEST_CASE("an imported covariance replaces the synthetic channel") {
  Handle h;
  REQUIRE(ccm_set_int(h.p, "na", 2) == CCM_OK);
  REQUIRE(ccm_set_int(h.p, "np", 2) == CCM_OK);
  REQUIRE(ccm_set_int(h.p, "codebook_m", 4) == CCM_OK);
  REQUIRE(ccm_set_int(h.p, "rounds", 2) == CCM_OK);
  const char* csv = "0.6,0\n0,0\n0,0\n0.4,0\n";
  REQUIRE(ccm_load_ccm_csv(h.p, csv) == CCM_OK);
  REQUIRE(ccm_run(h.p) == CCM_OK);
  CHECK(ccm_failed_trials(h.p) == 0);

  // Wrong dimension surfaces at run time, not load time.
  Handle m;
  configure_tiny(m.p, 7);
  REQUIRE(ccm_load_ccm_csv(m.p, csv) == CCM_OK);
  CHECK(ccm_run(m.p) == CCM_ERR_INVALID_ARG);
  CHECK(std::strlen(ccm_last_error(m.p)) > 0);

  Handle bad;
  CHECK(ccm_load_ccm_csv(bad.p, "not,a\nccm") == CCM_ERR_IO);
  CHECK(std::strlen(ccm_last_error(bad.p)) > 0);
}

TEST_CASE("standalone codebook dump") {
  char* cb = ccm_codebook_csv(2, 2);
  REQUIRE(cb != nullptr);
  const std::string s = take(cb);
  CHECK(s.rfind("m,", 0) == 0);
  CHECK(ccm_codebook_csv(0, 4) == nullptr);
  CHECK(ccm_codebook_csv(1, 1) == nullptr);
}
