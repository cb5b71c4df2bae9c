#include "ccm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "ccm/baseline.hpp"
#include "ccm/csvio.hpp"

namespace ccm {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

uint64_t trial_seed(const ExperimentConfig& cfg, int trial_index) {
  return cfg.seed ^ static_cast<uint64_t>(trial_index);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  if (n == 0) return kNan;
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNan;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n_a < 1 || cfg.n_p < 1 || cfg.n_p > cfg.n_a) {
    fail(ErrorCode::kConfigError, "need 1 <= n_p <= n_a");
  }
  if (cfg.n_u < 1 || cfg.n_u > cfg.n_a) {
    fail(ErrorCode::kConfigError, "need 1 <= n_u <= n_a");
  }
  if (cfg.t_rounds < 1) fail(ErrorCode::kConfigError, "t_rounds >= 1");
  if (cfg.trials < 1) fail(ErrorCode::kConfigError, "trials >= 1");
  if (cfg.m_codewords < cfg.n_p || cfg.m_codewords % cfg.n_p != 0) {
    fail(ErrorCode::kConfigError,
         "m_codewords must be a positive multiple of n_p");
  }
  if (cfg.n_paths < cfg.n_u) fail(ErrorCode::kConfigError, "n_paths >= n_u");
  if (cfg.import_c && cfg.import_c->dim() != cfg.n_a) {
    fail(ErrorCode::kDimensionError, "imported CCM dimension != n_a");
  }
}

GroundTruth make_trial_ground_truth(const ExperimentConfig& cfg,
                                    int trial_index) {
  if (cfg.import_c) {
    return ground_truth_from_ccm(*cfg.import_c);
  }
  Rng rng(trial_seed(cfg, trial_index), 0x67747275ULL);
  return synth_channel(cfg.n_a, cfg.n_u, cfg.n_paths,
                       rng.derive(0x6368616eULL));
}

std::vector<TrajectoryRow> run_algorithm1(const ExperimentConfig& cfg,
                                          const GroundTruth& gt,
                                          int trial_index,
                                          TrialCapture* capture) {
  validate_config(cfg);
  const uint64_t seed = trial_seed(cfg, trial_index);
  const Codebook cb = build_codebook(cfg.n_p, cfg.m_codewords / cfg.n_p);
  Rng rng_init(seed, 0x71696e69ULL);   // q(1)
  Rng rng_wmd(seed, 0x776d6473ULL);    // strategy randomness
  Rng rng_noise(seed, 0x706e6f7aULL);  // proposed-path feedback noise
  Rng rng_bnoise(seed, 0x626e6f7aULL); // baseline feedback noise
  Rng rng_misc(seed, 0x6d697363ULL);   // historical prior, probe seeds

  // upper trace bound; the historical mode needs the first record and is
  // resolved inside the round loop
  double b_bound = 1.0;
  bool b_ready = true;
  HermitianPsd c_hist;
  switch (cfg.b_mode) {
    case BoundMode::kTrace:
      b_bound = upper_bound_b_trace();
      break;
    case BoundMode::kFrob:
      b_bound = upper_bound_b_frob(cfg.n_u);
      break;
    case BoundMode::kHistorical:
      c_hist = historical_ccm(gt, cfg.b_hist_perturbation,
                              rng_misc.derive(0x68697374ULL));
      b_ready = false;
      break;
  }

  WmdContext ctx;  // b_decay seeded with q(1) below
  Mat q = random_semi_unitary(cfg.n_a, cfg.n_p, rng_init);
  ctx.b_decay = q;

  BaselineConfig bl;
  std::vector<FeedbackRecord> bl_records;
  if (cfg.run_baseline) {
    bl = default_baseline(cfg.n_a, cfg.n_p, rng_misc.derive(0x626c6e65ULL));
  }

  std::vector<FeedbackRecord> records;
  std::vector<TrajectoryRow> rows;
  HermitianPsd center = HermitianPsd::trusted(
      0.5 * (cfg.center_cfg.a + b_bound) / cfg.n_a *
      Mat::Identity(cfg.n_a, cfg.n_a));
  bool have_center = false;

  if (capture) {
    capture->gt = gt;
    capture->b_bound = b_bound;
  }

  for (int t = 1; t <= cfg.t_rounds; ++t) {
    const FeedbackRecord rec = feedback_round(
        gt, q, cb, cfg.ceq_db, t, rng_noise.derive(0x66627221ULL + t));
    records.push_back(rec);

    const double a_raw = lower_bound_a(records, cb);
    if (!b_ready) {
      b_bound = upper_bound_b_historical(c_hist, cb, records.front(),
                                         cfg.n_u, cfg.b_hist_probes,
                                         rng_misc.derive(0x6270726fULL));
      b_ready = true;
      if (capture) capture->b_bound = b_bound;
    }
    CenterConfig ccfg = cfg.center_cfg;
    ccfg.b = b_bound;
    // Noisy CQI values can push the bound past b; keep the window nonempty
    // and let the feasibility audit report the conflict.
    ccfg.a = std::min(a_raw, 0.999 * b_bound);

    bool fell_back = false;
    CenterSolution sol;
    try {
      sol = analytic_center(records, cb, ccfg, have_center ? &center : nullptr,
                            cfg.collect_solver_trace && capture
                                ? &capture->trace
                                : nullptr);
      center = sol.c_hat;
      have_center = true;
    } catch (const Error&) {
      fell_back = true;  // keep the previous center; row flags the audit fail
      sol = CenterSolution{};
      sol.c_hat = center;
    }

    const FeasibilityReport audit =
        feasibility_check(center, records, cb, ccfg.a, ccfg.b, cfg.audit_tol);
    DiagnosticsRecord diag;
    try {
      diag = volume_measure(records, cb, center, {}, cfg.center_cfg.lambda);
    } catch (const Error&) {
      diag.s_t = kNan;  // center off the cut cone (fallback rounds)
    }

    TrajectoryRow row;
    row.trial = trial_index;
    row.round = t;
    row.rmse_db_proposed = rmse_db(gt.c_star, center);
    row.beam_prec_proposed = beam_precision(gt.c_star, center);
    row.rmse_db_baseline = kNan;
    row.beam_prec_baseline = kNan;
    row.a_bound = a_raw;
    row.feasibility_pass = !fell_back && audit.pass;
    row.s_t = diag.s_t;

    if (cfg.run_baseline) {
      const Mat qb = baseline_q(bl, t);
      bl_records.push_back(feedback_round(gt, qb, cb, cfg.ceq_db, t,
                                          rng_bnoise.derive(0x66627221ULL + t)));
      const HermitianPsd c_bl = baseline_reconstruct(bl_records, cb, t);
      row.rmse_db_baseline = rmse_db(gt.c_star, c_bl);
      row.beam_prec_baseline = beam_precision(gt.c_star, c_bl);
    }

    // design the next weighting from the fresh center
    ctx.c_hat = center;
    const QDesign design = design_q(ctx, cfg.strategies, cb, rng_wmd);
    q = design.q;
    row.m_prime = design.m_prime;
    row.full_rank = design.full_rank;
    rows.push_back(row);

    if (capture) {
      capture->records.push_back(rec);
      capture->centers.push_back(center);
      capture->solutions.push_back(sol);
      capture->a_bounds.push_back(a_raw);
      if (fell_back) capture->fallback_rounds.push_back(t);
    }
  }
  return rows;
}

MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg) {
  validate_config(cfg);
  struct Slot {
    std::vector<TrajectoryRow> rows;
    bool failed = false;
  };
  std::vector<Slot> slots(cfg.trials);

  // Trials are independent; workers pull indices and write only their own
  // slot, so the assembled output is deterministic regardless of scheduling.
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= cfg.trials) return;
      try {
        const GroundTruth gt = make_trial_ground_truth(cfg, i);
        slots[i].rows = run_algorithm1(cfg, gt, i);
      } catch (const std::exception&) {
        slots[i].failed = true;
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int n_workers = static_cast<int>(
      std::min<unsigned>(hw, static_cast<unsigned>(cfg.trials)));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  MonteCarloResult out;
  for (int i = 0; i < cfg.trials; ++i) {
    if (slots[i].failed) {
      ++out.failed_trials;
      out.failed_trial_ids.push_back(i);
      continue;
    }
    out.rows.insert(out.rows.end(), slots[i].rows.begin(),
                    slots[i].rows.end());
  }
  return out;
}

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows,
                           bool with_baseline) {
  std::string s = "trial,round,rmse_db_proposed";
  if (with_baseline) s += ",rmse_db_baseline";
  s += ",beam_prec_proposed";
  if (with_baseline) s += ",beam_prec_baseline";
  s += ",a_bound,m_prime,branch,feasibility_pass,s_t\n";
  for (const auto& r : rows) {
    s += std::to_string(r.trial);
    s += ',';
    s += std::to_string(r.round);
    s += ',';
    s += fmt_g12(r.rmse_db_proposed);
    if (with_baseline) {
      s += ',';
      s += fmt_g12(r.rmse_db_baseline);
    }
    s += ',';
    s += fmt_g12(r.beam_prec_proposed);
    if (with_baseline) {
      s += ',';
      s += fmt_g12(r.beam_prec_baseline);
    }
    s += ',';
    s += fmt_g12(r.a_bound);
    s += ',';
    s += std::to_string(r.m_prime);
    s += ',';
    s += r.full_rank ? "full" : "deficient";
    s += ',';
    s += r.feasibility_pass ? '1' : '0';
    s += ',';
    s += fmt_g12(r.s_t);
    s += '\n';
  }
  return s;
}

std::string aggregate_csv(const std::vector<TrajectoryRow>& rows,
                          bool with_baseline) {
  int t_max = 0;
  for (const auto& r : rows) t_max = std::max(t_max, r.round);
  std::string s = "round";
  const char* metrics[] = {"rmse_db_proposed", "beam_prec_proposed",
                           "rmse_db_baseline", "beam_prec_baseline"};
  const int n_metrics = with_baseline ? 4 : 2;
  for (int m = 0; m < n_metrics; ++m) {
    for (const char* stat : {"mean", "median", "std"}) {
      s += ',';
      s += metrics[m];
      s += '_';
      s += stat;
    }
  }
  s += '\n';
  for (int t = 1; t <= t_max; ++t) {
    std::vector<double> cols[4];
    for (const auto& r : rows) {
      if (r.round != t) continue;
      cols[0].push_back(r.rmse_db_proposed);
      cols[1].push_back(r.beam_prec_proposed);
      cols[2].push_back(r.rmse_db_baseline);
      cols[3].push_back(r.beam_prec_baseline);
    }
    s += std::to_string(t);
    for (int m = 0; m < n_metrics; ++m) {
      s += ',';
      s += fmt_g12(mean_of(cols[m]));
      s += ',';
      s += fmt_g12(median_of(cols[m]));
      s += ',';
      s += fmt_g12(std_of(cols[m]));
    }
    s += '\n';
  }
  return s;
}

std::string solver_trace_csv(const std::vector<SolverTraceRow>& rows) {
  std::string s = "stage,iter,objective,mu,rho,eq_residual,grad_norm,min_slack\n";
  for (const auto& r : rows) {
    s += std::to_string(r.stage);
    s += ',';
    s += std::to_string(r.iter);
    s += ',';
    s += fmt_g12(r.objective);
    s += ',';
    s += fmt_g12(r.mu);
    s += ',';
    s += fmt_g12(r.rho);
    s += ',';
    s += fmt_g12(r.eq_residual);
    s += ',';
    s += fmt_g12(r.grad_norm);
    s += ',';
    s += fmt_g12(r.min_slack);
    s += '\n';
  }
  return s;
}

}  // namespace ccm
