#include "ccm/capi.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "ccm/harness.hpp"

using ccm::ErrorCode;

struct ccm_experiment {
  ccm::ExperimentConfig cfg;
  ccm::MonteCarloResult result;
  std::vector<ccm::SolverTraceRow> trace;
  bool ran = false;
  std::string last_error;
};

namespace {

char* heap_copy(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ccm_status status_from(const ccm::Error& e) {
  switch (e.code()) {
    case ErrorCode::kConfigError:
    case ErrorCode::kDimensionError:
      return CCM_ERR_INVALID_ARG;
    case ErrorCode::kIoError:
      return CCM_ERR_IO;
    case ErrorCode::kInfeasible:
      return CCM_ERR_INFEASIBLE;
    default:
      return CCM_ERR_NUMERIC;
  }
}

ccm_status guard(ccm_experiment* exp, const char* key, const char* value) {
  if (!exp || !key) return CCM_ERR_INVALID_ARG;
  if (!value) {
    exp->last_error = "null value";
    return CCM_ERR_INVALID_ARG;
  }
  return CCM_OK;
}

}  // namespace

extern "C" {

const char* ccm_version(void) { return "0.1.0"; }

ccm_experiment* ccm_experiment_new(void) {
  try {
    return new ccm_experiment();
  } catch (...) {
    return nullptr;
  }
}

void ccm_experiment_free(ccm_experiment* exp) { delete exp; }

ccm_status ccm_set_int(ccm_experiment* exp, const char* key, int64_t value) {
  if (!exp || !key) return CCM_ERR_INVALID_ARG;
  const std::string k(key);
  const int v = static_cast<int>(value);
  if (k == "seed") {
    exp->cfg.seed = static_cast<uint64_t>(value);
    return CCM_OK;
  }
  if (k == "baseline") {
    exp->cfg.run_baseline = value != 0;
    return CCM_OK;
  }
  if (k == "solver_trace") {
    exp->cfg.collect_solver_trace = value != 0;
    return CCM_OK;
  }
  int* target = nullptr;
  if (k == "na") target = &exp->cfg.n_a;
  else if (k == "np") target = &exp->cfg.n_p;
  else if (k == "nu") target = &exp->cfg.n_u;
  else if (k == "codebook_m") target = &exp->cfg.m_codewords;
  else if (k == "rounds") target = &exp->cfg.t_rounds;
  else if (k == "trials") target = &exp->cfg.trials;
  else if (k == "n_paths") target = &exp->cfg.n_paths;
  else if (k == "b_hist_probes") target = &exp->cfg.b_hist_probes;
  if (!target) {
    exp->last_error = "unknown integer key: " + k;
    return CCM_ERR_BAD_KEY;
  }
  if (value < 1 || value != v) {
    exp->last_error = "value out of range for " + k;
    return CCM_ERR_BAD_VALUE;
  }
  *target = v;
  return CCM_OK;
}

ccm_status ccm_set_real(ccm_experiment* exp, const char* key, double value) {
  if (!exp || !key) return CCM_ERR_INVALID_ARG;
  const std::string k(key);
  if (k == "ceq_db") {
    exp->cfg.ceq_db = value;  // +inf is the error-free setting
    return CCM_OK;
  }
  if (k == "lambda") {
    if (!(value >= 0)) {
      exp->last_error = "lambda must be >= 0";
      return CCM_ERR_BAD_VALUE;
    }
    exp->cfg.center_cfg.lambda = value;
    return CCM_OK;
  }
  if (k == "epsilon_db") {
    exp->cfg.strategies.epsilon_db = value;
    return CCM_OK;
  }
  if (k == "b_hist_perturbation") {
    if (!(value >= 0)) {
      exp->last_error = "perturbation must be >= 0";
      return CCM_ERR_BAD_VALUE;
    }
    exp->cfg.b_hist_perturbation = value;
    return CCM_OK;
  }
  if (k == "audit_tol") {
    if (!(value > 0)) {
      exp->last_error = "audit_tol must be > 0";
      return CCM_ERR_BAD_VALUE;
    }
    exp->cfg.audit_tol = value;
    return CCM_OK;
  }
  exp->last_error = "unknown real key: " + k;
  return CCM_ERR_BAD_KEY;
}

ccm_status ccm_set_string(ccm_experiment* exp, const char* key,
                          const char* value) {
  const ccm_status pre = guard(exp, key, value);
  if (pre != CCM_OK) return pre;
  const std::string k(key), v(value);
  if (k == "m_prime") {
    if (v == "random") exp->cfg.strategies.m_prime = ccm::MPrimeStrategy::kRandom;
    else if (v == "reuse") exp->cfg.strategies.m_prime = ccm::MPrimeStrategy::kReuse;
    else if (v == "mixture") exp->cfg.strategies.m_prime = ccm::MPrimeStrategy::kMixture;
    else {
      exp->last_error = "m_prime: random|reuse|mixture";
      return CCM_ERR_BAD_VALUE;
    }
    return CCM_OK;
  }
  if (k == "sigma") {
    if (v == "equality") exp->cfg.strategies.sigma = ccm::SigmaStrategy::kEquality;
    else if (v == "sampled") exp->cfg.strategies.sigma = ccm::SigmaStrategy::kSamplingSorting;
    else {
      exp->last_error = "sigma: equality|sampled";
      return CCM_ERR_BAD_VALUE;
    }
    return CCM_OK;
  }
  if (k == "x") {
    if (v == "designed") exp->cfg.strategies.x = ccm::XStrategy::kDesigned;
    else if (v == "random") exp->cfg.strategies.x = ccm::XStrategy::kRandom;
    else {
      exp->last_error = "x: designed|random";
      return CCM_ERR_BAD_VALUE;
    }
    return CCM_OK;
  }
  if (k == "b_mode") {
    if (v == "trace") exp->cfg.b_mode = ccm::BoundMode::kTrace;
    else if (v == "frob") exp->cfg.b_mode = ccm::BoundMode::kFrob;
    else if (v == "historical") exp->cfg.b_mode = ccm::BoundMode::kHistorical;
    else {
      exp->last_error = "b_mode: trace|frob|historical";
      return CCM_ERR_BAD_VALUE;
    }
    return CCM_OK;
  }
  exp->last_error = "unknown string key: " + k;
  return CCM_ERR_BAD_KEY;
}

ccm_status ccm_load_ccm_csv(ccm_experiment* exp, const char* csv_text) {
  if (!exp || !csv_text) return CCM_ERR_INVALID_ARG;
  try {
    std::istringstream in{std::string(csv_text)};
    exp->cfg.import_c = ccm::read_ccm_csv(in);
    return CCM_OK;
  } catch (const ccm::Error& e) {
    exp->last_error = e.what();
    return status_from(e);
  } catch (const std::exception& e) {
    exp->last_error = e.what();
    return CCM_ERR_INTERNAL;
  }
}

ccm_status ccm_run(ccm_experiment* exp) {
  if (!exp) return CCM_ERR_INVALID_ARG;
  exp->ran = false;
  exp->trace.clear();
  try {
    ccm::validate_config(exp->cfg);
    if (exp->cfg.collect_solver_trace) {
      // sequential path so trial 0 can be traced; same seeds, same bytes
      exp->result = ccm::MonteCarloResult{};
      for (int i = 0; i < exp->cfg.trials; ++i) {
        try {
          const ccm::GroundTruth gt =
              ccm::make_trial_ground_truth(exp->cfg, i);
          ccm::TrialCapture cap;
          const auto rows =
              ccm::run_algorithm1(exp->cfg, gt, i, i == 0 ? &cap : nullptr);
          if (i == 0) exp->trace = std::move(cap.trace);
          exp->result.rows.insert(exp->result.rows.end(), rows.begin(),
                                  rows.end());
        } catch (const std::exception&) {
          ++exp->result.failed_trials;
          exp->result.failed_trial_ids.push_back(i);
        }
      }
    } else {
      exp->result = ccm::run_monte_carlo(exp->cfg);
    }
    exp->ran = true;
    return CCM_OK;
  } catch (const ccm::Error& e) {
    exp->last_error = e.what();
    return status_from(e);
  } catch (const std::exception& e) {
    exp->last_error = e.what();
    return CCM_ERR_INTERNAL;
  }
}

char* ccm_trajectory_csv(const ccm_experiment* exp) {
  if (!exp || !exp->ran) return nullptr;
  return heap_copy(
      ccm::trajectory_csv(exp->result.rows, exp->cfg.run_baseline));
}

char* ccm_aggregate_csv(const ccm_experiment* exp) {
  if (!exp || !exp->ran) return nullptr;
  return heap_copy(
      ccm::aggregate_csv(exp->result.rows, exp->cfg.run_baseline));
}

char* ccm_solver_trace_csv(const ccm_experiment* exp) {
  if (!exp || !exp->ran) return nullptr;
  return heap_copy(ccm::solver_trace_csv(exp->trace));
}

int ccm_failed_trials(const ccm_experiment* exp) {
  if (!exp || !exp->ran) return -1;
  return exp->result.failed_trials;
}

const char* ccm_last_error(const ccm_experiment* exp) {
  if (!exp) return "null handle";
  return exp->last_error.c_str();
}

char* ccm_codebook_csv(int n_p, int oversampling) {
  try {
    const ccm::Codebook cb = ccm::build_codebook(n_p, oversampling);
    return heap_copy(ccm::codebook_csv(cb));
  } catch (...) {
    return nullptr;
  }
}

void ccm_string_free(char* s) { std::free(s); }

}  // extern "C"
