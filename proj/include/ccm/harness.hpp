#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ccm/center.hpp"
#include "ccm/codebook.hpp"
#include "ccm/feedback.hpp"
#include "ccm/metrics.hpp"
#include "ccm/scenario.hpp"
#include "ccm/wmd.hpp"

namespace ccm {

enum class BoundMode { kTrace, kFrob, kHistorical };

struct ExperimentConfig {
  int n_a = 8;
  int n_p = 2;
  int n_u = 1;
  int m_codewords = 16;  // codebook size (n_p * oversampling)
  int t_rounds = 40;
  int trials = 1;
  uint64_t seed = 1;
  int n_paths = 20;               // scatterers in the synthetic channel
  double ceq_db = kInfCeq;        // +inf = error-free feedback
  WmdStrategies strategies;
  CenterConfig center_cfg;
  bool run_baseline = false;
  BoundMode b_mode = BoundMode::kTrace;
  int b_hist_probes = 64;
  double b_hist_perturbation = 0.1;
  double audit_tol = 1e-7;  // post-solve feasibility audit
  bool collect_solver_trace = false;
  std::optional<HermitianPsd> import_c;  // overrides the synthetic channel

  static constexpr double kInfCeq = std::numeric_limits<double>::infinity();
};

void validate_config(const ExperimentConfig& cfg);

// One row per (trial, round). m_prime/full_rank describe the design step run
// after this round's center update (the q used in round t+1). Baseline
// columns are NaN when the baseline is disabled.
struct TrajectoryRow {
  int trial = 0;
  int round = 0;  // 1-based
  double rmse_db_proposed = 0.0;
  double rmse_db_baseline = 0.0;
  double beam_prec_proposed = 0.0;
  double beam_prec_baseline = 0.0;
  double a_bound = 0.0;  // raw trace lower bound, before the window clamp
  int m_prime = -1;
  bool full_rank = true;  // "full" / "deficient" in the CSV
  bool feasibility_pass = false;
  double s_t = 0.0;
};

// Everything the per-trial loop saw, for audits that outlive the run.
struct TrialCapture {
  GroundTruth gt;
  std::vector<FeedbackRecord> records;
  std::vector<HermitianPsd> centers;        // per round
  std::vector<CenterSolution> solutions;    // per round
  std::vector<double> a_bounds;             // raw, per round
  double b_bound = 1.0;
  std::vector<int> fallback_rounds;         // solver failed, previous center kept
  std::vector<SolverTraceRow> trace;
};

GroundTruth make_trial_ground_truth(const ExperimentConfig& cfg,
                                    int trial_index);

std::vector<TrajectoryRow> run_algorithm1(const ExperimentConfig& cfg,
                                          const GroundTruth& gt,
                                          int trial_index,
                                          TrialCapture* capture = nullptr);

struct MonteCarloResult {
  std::vector<TrajectoryRow> rows;  // sorted by (trial, round)
  int failed_trials = 0;
  std::vector<int> failed_trial_ids;
};

MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg);

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows,
                           bool with_baseline);
// Per-round mean/median/std of the RMSE and precision columns, failed trials
// excluded upstream.
std::string aggregate_csv(const std::vector<TrajectoryRow>& rows,
                          bool with_baseline);
std::string solver_trace_csv(const std::vector<SolverTraceRow>& rows);

}  // namespace ccm
