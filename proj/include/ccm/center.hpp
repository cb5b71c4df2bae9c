#pragma once

#include <memory>
#include <vector>

#include "ccm/codebook.hpp"
#include "ccm/feedback.hpp"
#include "ccm/types.hpp"

namespace ccm {

struct CenterConfig {
  double lambda = 1e-3;  // nuclear-norm weight (== trace weight on PSD cone)
  double a = 0.0;        // trace lower bound
  double b = 1.0;        // trace upper bound
  double eq_tol = 1e-6;  // CQI equality residual, relative to 1 + eta
  double barrier_mu0 = 1.0;
  double barrier_shrink = 0.2;
  int max_newton_iters = 60;  // per continuation stage
  double grad_tol = 1e-6;     // relative stationarity at termination
};

struct CenterSolution {
  HermitianPsd c_hat;
  double eq_residual = 0.0;  // worst relative equality residual
  double min_slack = 0.0;    // smallest kept normalized cut slack
  bool converged = false;
  double objective = 0.0;  // true objective (no barriers/penalties)
  double grad_norm = 0.0;  // relative, at termination
  int newton_iters = 0;
  int dropped_terms = 0;
};

struct SolverTraceRow {
  int stage = 0;
  int iter = 0;
  double objective = 0.0;
  double mu = 0.0;
  double rho = 0.0;
  double eq_residual = 0.0;
  double grad_norm = 0.0;
  double min_slack = 0.0;
};

// Trace lower bound implied by the CQI values: every feedback round gives
// tr(c) >= eta / ||q v_m0||^2 for the true covariance.
double lower_bound_a(const std::vector<FeedbackRecord>& records,
                     const Codebook& cb);

double upper_bound_b_trace();
double upper_bound_b_frob(int n_u);

// Probe-averaged alignment ratio against a historical covariance; see the
// implementation for the estimator. Throws HeuristicFailed on a degenerate
// ratio.
double upper_bound_b_historical(const HermitianPsd& c_hist,
                                const Codebook& cb,
                                const FeedbackRecord& record, int n_u,
                                int probes, uint64_t seed);

// Weighted analytic center of the feedback-consistent set:
//   maximize sum_i sum_{m != m0} (1/eta_i) log <g_{m,i}, c>
//            + log det c - lambda tr(c)
//   subject to <a_i, c> = eta_i,  a <= tr(c) <= b,  c psd.
// Interior-point continuation: log-det is the PSD barrier, the trace bounds
// get mu-scaled log barriers with mu shrunk geometrically, and the CQI
// equalities are handled by quadratic penalties with first-order multiplier
// updates. Newton steps use an exact Hessian assembled through the per-round
// p x p projections, with a gradient fallback via regularization.
CenterSolution analytic_center(const std::vector<FeedbackRecord>& records,
                               const Codebook& cb, const CenterConfig& cfg,
                               const HermitianPsd* warm_start = nullptr,
                               std::vector<SolverTraceRow>* trace = nullptr);

struct FeasibilityReport {
  double worst_c1_violation = 0.0;  // relative to 1 + eta
  double worst_c2_residual = 0.0;   // relative to 1 + eta
  double min_eigenvalue = 0.0;
  double trace = 0.0;
  bool trace_ok = false;
  bool pass = false;
};

FeasibilityReport feasibility_check(const HermitianPsd& c,
                                    const std::vector<FeedbackRecord>& records,
                                    const Codebook& cb, double a, double b,
                                    double tol);

namespace detail {
struct CenterProblem;
}

// Test hook: the exact stage objective/gradient pair the solver iterates on,
// for finite-difference validation and oracle comparisons.
class CenterEvaluator {
 public:
  CenterEvaluator(const std::vector<FeedbackRecord>& records,
                  const Codebook& cb, const CenterConfig& cfg);
  ~CenterEvaluator();

  void set_stage(double mu, double rho, const RealVec& nu);
  double value(const Mat& c) const;  // -inf outside the barrier domain
  double value_and_grad(const Mat& c, Mat* grad) const;
  double cmo_objective(const Mat& c) const;
  int kept_terms() const;
  int dropped_terms() const;

 private:
  std::unique_ptr<detail::CenterProblem> p_;
};

}  // namespace ccm
