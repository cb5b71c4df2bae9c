#include "ccm/center.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccm/hermlin.hpp"
#include "ccm/rng.hpp"

namespace ccm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMuFloor = 1e-8;
// Newton decrement below which a line-search stall counts as stationarity:
// the predicted improvement is beneath what double-precision objective
// comparisons can certify, which happens when the optimum is pinned against
// a barrier wall and the gradient norm is no longer a usable measure.
constexpr double kStallCertify = 1e-10;
// Relative CQI residual the restoration phase drives the iterate to before
// each centering pass; kept near roundoff so the tangent steps afterwards
// never see a meaningfully off-slice point.
constexpr double kEqRestore = 1e-13;
constexpr int kMaxStages = 28;

// Real coordinates for Hermitian matrices over the inner product
// <A,B> = Re tr(AB): the n diagonal entries, then (sqrt2*Re, sqrt2*Im) of
// the upper triangle column by column. The basis is orthonormal, so inner
// products and gradients carry over verbatim.
int pair_base(int n, int i, int j) {  // i < j
  return n + 2 * (j * (j - 1) / 2 + i);
}

void vech(const Mat& a, Eigen::VectorXd& out) {
  const int n = static_cast<int>(a.rows());
  out.resize(n * n);
  for (int i = 0; i < n; ++i) out(i) = a(i, i).real();
  for (int j = 1; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const int base = pair_base(n, i, j);
      out(base) = M_SQRT2 * a(i, j).real();
      out(base + 1) = M_SQRT2 * a(i, j).imag();
    }
  }
}

Mat math(const Eigen::VectorXd& x, int n) {
  Mat a(n, n);
  for (int i = 0; i < n; ++i) a(i, i) = x(i);
  for (int j = 1; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const int base = pair_base(n, i, j);
      const cxd v(x(base) * M_SQRT1_2, x(base + 1) * M_SQRT1_2);
      a(i, j) = v;
      a(j, i) = std::conj(v);
    }
  }
  return a;
}

struct RecordOps {
  Mat q;  // n x p
  double eta = 0.0;
  double c_norm = 1.0;  // 1 + eta
  bool use_cuts = true;
  Eigen::MatrixXd cuts;       // kept cuts x p^2
  std::vector<int> cut_m;     // codeword index per kept row
  Eigen::VectorXd cut_gain;   // <cut_m, a_row>: pusher slack gain per row
  Eigen::VectorXd a_row;      // vech_p(v_m0 v_m0^H)
  Eigen::MatrixXd jr;         // p^2 x n^2, vech_n(c) -> vech_p(q^H c q)
  Vec pusher;                 // u with q^H u = v_m0 (empty if unavailable)
};

struct StageEval {
  bool in_domain = false;
  double val = -kInf;  // stage objective (maximized)
  double cmo = -kInf;  // true objective
  double tr = 0.0;
  double logdet = 0.0;
  double eq_res = 0.0;        // max relative equality residual
  double min_slack = kInf;    // normalized
  double min_slack_raw = kInf;
  std::vector<Eigen::VectorXd> slacks;  // raw, per record
  Eigen::VectorXd r_rel;                // relative equality residuals
  Mat w;                                // c^{-1}, only when requested
};

}  // namespace

namespace detail {

struct CenterProblem {
  int n = 0, p = 0, n2 = 0, p2 = 0;
  CenterConfig cfg;
  std::vector<RecordOps> recs;
  int kept_terms = 0;
  int dropped_terms = 0;

  // stage parameters; rho/nu enter only through the evaluator surface, the
  // solver enforces the CQI equalities exactly via a_mat instead
  double mu = 0.0;
  double rho = 0.0;
  Eigen::VectorXd nu;
  Eigen::MatrixXd a_mat;  // records x n^2: rows of the relative CQI residual

  void build(const std::vector<FeedbackRecord>& records, const Codebook& cb,
             const CenterConfig& config);
  bool eval(const Mat& c, StageEval* out, bool need_w) const;
  void add_gradient(const Mat& c, const StageEval& ev, Mat* grad) const;
  void hessian_neg(const Mat& c, const StageEval& ev,
                   Eigen::MatrixXd* h) const;
};

void CenterProblem::build(const std::vector<FeedbackRecord>& records,
                          const Codebook& cb, const CenterConfig& config) {
  cfg = config;
  if (!(cfg.a >= 0.0 && cfg.a < cfg.b)) {
    fail(ErrorCode::kConfigError, "need 0 <= a < b");
  }
  p = cb.n_p;
  p2 = p * p;
  if (!records.empty()) {
    n = static_cast<int>(records.front().q.rows());
  }
  // vech_p of all codeword outer products, reused across records
  Eigen::MatrixXd wvec(cb.size(), p2);
  for (int m = 0; m < cb.size(); ++m) {
    const Vec v = cb.word(m);
    Eigen::VectorXd row;
    vech(Mat(v * v.adjoint()), row);
    wvec.row(m) = row;
  }
  for (const auto& rec : records) {
    if (rec.q.rows() != n || rec.q.cols() != p) {
      fail(ErrorCode::kDimensionError, "records disagree on q shape");
    }
    if (rec.m0 < 0 || rec.m0 >= cb.size()) {
      fail(ErrorCode::kConfigError, "record PMI out of range");
    }
    RecordOps ops;
    ops.q = rec.q;
    ops.eta = rec.eta;
    ops.c_norm = 1.0 + rec.eta;
    ops.a_row = wvec.row(rec.m0);
    ops.use_cuts = rec.eta > 1e-300;  // 1/eta weight undefined otherwise
    if (!ops.use_cuts) dropped_terms += cb.size() - 1;

    std::vector<int> keep;
    if (ops.use_cuts) {
      // The cut matrix is g = (q v_m0)(q v_m0)^H - (q v_m)(q v_m)^H. When q
      // maps both words to the same ray, g vanishes identically and the log
      // term would be -inf for every C; such ties are dropped and counted.
      const Mat qw = rec.q * cb.words;  // n x M
      const double a2 = qw.col(rec.m0).squaredNorm();
      for (int m = 0; m < cb.size(); ++m) {
        if (m == rec.m0) continue;  // cut identically zero by construction
        const double b2 = qw.col(m).squaredNorm();
        const double cross = std::norm(qw.col(rec.m0).dot(qw.col(m)));
        const double g2 = a2 * a2 + b2 * b2 - 2.0 * cross;
        if (g2 <= 1e-24 * (a2 * a2 + b2 * b2 + 1e-300)) {
          ++dropped_terms;  // vacuous: q maps both words identically
          continue;
        }
        keep.push_back(m);
      }
    }
    ops.cuts.resize(static_cast<int>(keep.size()), p2);
    ops.cut_gain.resize(static_cast<int>(keep.size()));
    for (size_t r = 0; r < keep.size(); ++r) {
      ops.cuts.row(static_cast<int>(r)) = wvec.row(rec.m0) - wvec.row(keep[r]);
      ops.cut_gain(static_cast<int>(r)) =
          ops.cuts.row(static_cast<int>(r)).dot(ops.a_row);
      ops.cut_m.push_back(keep[r]);
    }
    kept_terms += static_cast<int>(keep.size());

    // projection map in coordinates
    ops.jr.resize(p2, n * n);
    const Mat qh = rec.q.adjoint();  // p x n; column i is q-row i conjugated
    Eigen::VectorXd col;
    for (int i = 0; i < n; ++i) {
      vech(Mat(qh.col(i) * qh.col(i).adjoint()), col);
      ops.jr.col(i) = col;
    }
    for (int j = 1; j < n; ++j) {
      for (int i = 0; i < j; ++i) {
        const Mat outer = qh.col(i) * qh.col(j).adjoint();
        const int base = pair_base(n, i, j);
        vech(Mat(M_SQRT1_2 * (outer + outer.adjoint())), col);
        ops.jr.col(base) = col;
        vech(Mat(cxd(0, 1) * M_SQRT1_2 * (outer - outer.adjoint())), col);
        ops.jr.col(base + 1) = col;
      }
    }

    // interior pusher: u = q (q^H q)^{-1} v_m0 has q^H u = v_m0, so adding
    // beta u u^H lifts this round's cut slacks by beta * cut_gain exactly.
    Eigen::LDLT<Mat> ldlt(rec.q.adjoint() * rec.q);
    if (ldlt.info() == Eigen::Success) {
      const Vec z = ldlt.solve(cb.word(rec.m0));
      if ((rec.q.adjoint() * rec.q * z - cb.word(rec.m0)).norm() < 1e-6) {
        ops.pusher = rec.q * z;
      }
    }
    recs.push_back(std::move(ops));
  }
  n2 = n * n;
  // r_rel is linear in vech(c): r_rel(i) = a_mat.row(i) * x - eta_i / c_norm_i
  a_mat.resize(static_cast<int>(recs.size()), n2);
  for (size_t i = 0; i < recs.size(); ++i) {
    a_mat.row(static_cast<int>(i)) =
        recs[i].a_row.transpose() * recs[i].jr / recs[i].c_norm;
  }
}

bool CenterProblem::eval(const Mat& c, StageEval* out, bool need_w) const {
  out->in_domain = false;
  out->val = -kInf;
  out->tr = c.trace().real();
  if (!(out->tr > cfg.a && out->tr < cfg.b)) return false;
  Eigen::LLT<Mat> llt(c);
  if (llt.info() != Eigen::Success) return false;
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) {
    logdet += std::log(llt.matrixL()(i, i).real());
  }
  logdet *= 2.0;
  out->logdet = logdet;

  double barrier_sum = 0.0;
  out->slacks.assign(recs.size(), Eigen::VectorXd());
  out->r_rel.resize(static_cast<int>(recs.size()));
  out->min_slack = kInf;
  out->min_slack_raw = kInf;
  Eigen::VectorXd rho_p(p2);
  for (size_t i = 0; i < recs.size(); ++i) {
    const auto& ops = recs[i];
    const Mat r_proj = ops.q.adjoint() * c * ops.q;
    vech(r_proj, rho_p);
    out->r_rel(static_cast<int>(i)) =
        (ops.a_row.dot(rho_p) - ops.eta) / ops.c_norm;
    if (ops.cuts.rows() > 0) {
      Eigen::VectorXd s = ops.cuts * rho_p;
      const double mn = s.minCoeff();
      out->min_slack_raw = std::min(out->min_slack_raw, mn);
      out->min_slack = std::min(out->min_slack, mn / ops.c_norm);
      if (mn <= 0.0) return false;
      barrier_sum += s.array().log().sum() / ops.eta;
      out->slacks[i] = std::move(s);
    }
  }
  out->eq_res = recs.empty() ? 0.0 : out->r_rel.cwiseAbs().maxCoeff();

  out->cmo = barrier_sum + logdet - cfg.lambda * out->tr;
  double val = out->cmo;
  val += mu * (std::log(cfg.b - out->tr) + std::log(out->tr - cfg.a));
  for (int i = 0; i < out->r_rel.size(); ++i) {
    val -= nu(i) * out->r_rel(i) + 0.5 * rho * out->r_rel(i) * out->r_rel(i);
  }
  out->val = val;
  out->in_domain = true;
  if (need_w) {
    out->w = llt.solve(Mat::Identity(n, n));
    out->w = 0.5 * (out->w + out->w.adjoint());
  }
  return true;
}

void CenterProblem::add_gradient(const Mat& /*c*/, const StageEval& ev,
                                 Mat* grad) const {
  const double tr_coef = -cfg.lambda +
                         mu * (1.0 / (ev.tr - cfg.a) - 1.0 / (cfg.b - ev.tr));
  *grad = ev.w + tr_coef * Mat::Identity(n, n);
  Eigen::VectorXd gamma(p2);
  for (size_t i = 0; i < recs.size(); ++i) {
    const auto& ops = recs[i];
    gamma.setZero();
    if (ops.cuts.rows() > 0) {
      gamma = ops.cuts.transpose() *
              (ev.slacks[i].cwiseInverse() / ops.eta).eval();
    }
    const double eq_coef =
        -(nu(static_cast<int>(i)) + rho * ev.r_rel(static_cast<int>(i))) /
        ops.c_norm;
    gamma += eq_coef * ops.a_row;
    const Mat lift = ops.q * math(gamma, p) * ops.q.adjoint();
    *grad += lift;
  }
  *grad = 0.5 * (*grad + grad->adjoint());
}

void CenterProblem::hessian_neg(const Mat& /*c*/, const StageEval& ev,
                                Eigen::MatrixXd* h) const {
  h->setZero(n2, n2);
  // log det block: H[k,l] = Re tr(w e_k w e_l), column by column
  {
    Eigen::VectorXd col;
    for (int i = 0; i < n; ++i) {
      vech(Mat(ev.w.col(i) * ev.w.col(i).adjoint()), col);
      h->col(i) = col;
    }
    for (int j = 1; j < n; ++j) {
      for (int i = 0; i < j; ++i) {
        const Mat outer = ev.w.col(i) * ev.w.col(j).adjoint();
        const int base = pair_base(n, i, j);
        vech(Mat(M_SQRT1_2 * (outer + outer.adjoint())), col);
        h->col(base) = col;
        vech(Mat(cxd(0, 1) * M_SQRT1_2 * (outer - outer.adjoint())), col);
        h->col(base + 1) = col;
      }
    }
    *h = 0.5 * (*h + h->transpose()).eval();
  }
  // trace barrier block
  const double beta = mu / ((cfg.b - ev.tr) * (cfg.b - ev.tr)) +
                      mu / ((ev.tr - cfg.a) * (ev.tr - cfg.a));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      (*h)(i, j) += beta;
    }
  }
  // cut and equality blocks, factored through the p x p projections
  Eigen::MatrixXd b_i(p2, p2);
  for (size_t i = 0; i < recs.size(); ++i) {
    const auto& ops = recs[i];
    b_i.setZero();
    if (ops.cuts.rows() > 0) {
      const Eigen::VectorXd d =
          (ev.slacks[i].cwiseInverse().array().square() / ops.eta)
              .matrix()
              .cwiseSqrt();
      const Eigen::MatrixXd scaled = d.asDiagonal() * ops.cuts;
      b_i.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
    }
    b_i.selfadjointView<Eigen::Lower>().rankUpdate(
        ops.a_row, rho / (ops.c_norm * ops.c_norm));
    b_i = b_i.selfadjointView<Eigen::Lower>();
    // symmetric factor so the accumulation below is one rank update
    const double jitter = 1e-13 * (b_i.trace() / p2 + 1.0);
    b_i.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(b_i);
    if (llt.info() == Eigen::Success) {
      const Eigen::MatrixXd kt =
          ops.jr.transpose() * Eigen::MatrixXd(llt.matrixL());
      h->selfadjointView<Eigen::Lower>().rankUpdate(kt);
    } else {                                   // fall back to a plain product
      const Eigen::MatrixXd bj = b_i * ops.jr;  // p2 x n2
      h->noalias() += ops.jr.transpose() * bj;
    }
  }
  *h = h->selfadjointView<Eigen::Lower>();
}

}  // namespace detail

namespace {

using detail::CenterProblem;

// Push the iterate strictly inside the cut cone and the trace window.
// Scaling is always safe (slacks are linear in c), and each record's pusher
// raises that record's own slacks by an exactly known amount.
Mat find_interior(const CenterProblem& prob, Mat c) {
  const double mid = 0.5 * (prob.cfg.a + prob.cfg.b);
  const int n = prob.n;
  c = 0.5 * (c + c.adjoint()).eval();
  double ridge = 1e-12 * (std::abs(c.trace().real()) / n + 1.0);
  for (int tries = 0; tries < 60; ++tries) {
    Eigen::LLT<Mat> llt(c);
    if (llt.info() == Eigen::Success &&
        llt.matrixL()(n - 1, n - 1).real() > 0) {
      break;
    }
    c += ridge * Mat::Identity(n, n);
    ridge *= 4.0;
  }
  {
    // A collapsed warm start (eigenvalues at roundoff scale) passes the LLT
    // probe yet strands Newton against the log-det wall; lift its spectrum
    // to a floor that is negligible for healthy inputs.
    Eigen::SelfAdjointEigenSolver<Mat> es(c);
    const double floor = 1e-9 * mid / n;
    if (es.info() == Eigen::Success && es.eigenvalues()(0) < floor) {
      RealVec lifted = es.eigenvalues().cwiseMax(floor);
      c = es.eigenvectors() * lifted.asDiagonal() *
          es.eigenvectors().adjoint();
      c = 0.5 * (c + c.adjoint()).eval();
    }
  }
  const double kTarget = 1e-5;  // normalized slack to aim for
  const double window = prob.cfg.b - prob.cfg.a;
  // Rescaling is a slice-breaking move: a warm start arrives nearly on the
  // CQI slice, usually glued to the trace wall the vanishing window barrier
  // left it on, and a recentering jolt would manufacture a large residual
  // out of nothing. Nudge the trace the minimal amount instead.
  const double tr_margin = 1e-4 * window;
  auto nudge_trace = [&](Mat& m) {
    const double tr = m.trace().real();
    if (tr >= prob.cfg.b - tr_margin) {
      m *= (prob.cfg.b - tr_margin) / tr;
    } else if (tr <= prob.cfg.a + tr_margin) {
      m *= (prob.cfg.a + tr_margin) / tr;
    }
  };
  for (int pass = 0; pass < 80; ++pass) {
    nudge_trace(c);
    bool modified = false;
    Eigen::VectorXd rho_p;
    for (const auto& ops : prob.recs) {
      if (ops.cuts.rows() == 0) continue;
      vech(Mat(ops.q.adjoint() * c * ops.q), rho_p);
      const Eigen::VectorXd s = ops.cuts * rho_p;
      double beta = 0.0;
      for (int r = 0; r < s.size(); ++r) {
        const double shortfall = kTarget * ops.c_norm - s(r);
        if (shortfall > 0.0) {
          if (ops.cut_gain(r) <= 1e-12 || ops.pusher.size() == 0) {
            if (s(r) <= 0.0) {
              fail(ErrorCode::kDegenerateCut,
                   "cut cannot be made strictly feasible");
            }
            continue;  // already positive, just thin; leave it alone
          }
          beta = std::max(beta, shortfall / ops.cut_gain(r));
        }
      }
      if (beta > 0.0) {
        // cap the added mass so one record cannot blow the trace window
        const double unorm2 = ops.pusher.squaredNorm();
        if (unorm2 > 0) beta = std::min(beta, 0.25 * window / unorm2);
        c += beta * (ops.pusher * ops.pusher.adjoint());
        modified = true;
      }
    }
    if (!modified) {
      const double t2 = c.trace().real();
      if (t2 > prob.cfg.a && t2 < prob.cfg.b) return c;
    }
  }
  // A clean pass never happened; settle for any strictly interior point.
  nudge_trace(c);
  StageEval ev;
  if (!prob.eval(c, &ev, false)) {
    fail(ErrorCode::kInfeasible, "no strictly interior point found");
  }
  return c;
}

}  // namespace

double lower_bound_a(const std::vector<FeedbackRecord>& records,
                     const Codebook& cb) {
  double a = 0.0;
  for (const auto& rec : records) {
    const double denom = (rec.q * cb.word(rec.m0)).squaredNorm();
    if (denom > 1e-300) {
      a = std::max(a, rec.eta / denom);
    }
  }
  return a;
}

double upper_bound_b_trace() { return 1.0; }

double upper_bound_b_frob(int n_u) {
  if (n_u < 1) fail(ErrorCode::kConfigError, "n_u must be positive");
  return static_cast<double>(n_u);
}

double upper_bound_b_historical(const HermitianPsd& c_hist,
                                const Codebook& cb,
                                const FeedbackRecord& record, int n_u,
                                int probes, uint64_t seed) {
  if (probes < 1) fail(ErrorCode::kConfigError, "probes must be positive");
  const double d_h = herm_evd(c_hist).eigvals(0);
  if (d_h <= 0) fail(ErrorCode::kHeuristicFailed, "flat historical CCM");
  const int n_a = c_hist.dim();
  Rng rng(seed, 0x68626e64ULL);
  double alpha = 0.0;
  for (int l = 0; l < probes; ++l) {
    const Mat q = random_semi_unitary(n_a, cb.n_p, rng);
    const Mat r = q.adjoint() * c_hist.mat() * q;
    int best = 0;
    double best_val = -kInf;
    for (int m = 0; m < cb.size(); ++m) {
      const double val =
          (cb.words.col(m).adjoint() * r * cb.words.col(m))(0).real();
      if (val > best_val) {
        best_val = val;
        best = m;
      }
    }
    const double denom = d_h * (q * cb.word(best)).squaredNorm();
    if (denom <= 1e-300) fail(ErrorCode::kHeuristicFailed, "degenerate probe");
    alpha += best_val / denom;
  }
  alpha /= probes;
  if (alpha <= 1e-12) fail(ErrorCode::kHeuristicFailed, "non-positive ratio");
  const double denom = alpha * (record.q * cb.word(record.m0)).squaredNorm();
  if (denom <= 1e-300) fail(ErrorCode::kHeuristicFailed, "degenerate record");
  const double b = n_u * record.eta / denom;
  if (!std::isfinite(b) || b <= 0) {
    fail(ErrorCode::kHeuristicFailed, "bound came out non-positive");
  }
  return b;
}

CenterSolution analytic_center(const std::vector<FeedbackRecord>& records,
                               const Codebook& cb, const CenterConfig& cfg,
                               const HermitianPsd* warm_start,
                               std::vector<SolverTraceRow>* trace) {
  CenterProblem prob;
  if (!records.empty()) {
    prob.build(records, cb, cfg);
  } else {
    prob.cfg = cfg;
    if (!(cfg.a >= 0.0 && cfg.a < cfg.b)) {
      fail(ErrorCode::kConfigError, "need 0 <= a < b");
    }
    prob.n = cb.n_p;  // harmless placeholder; callers pass records normally
    prob.p = cb.n_p;
    prob.p2 = prob.p * prob.p;
    prob.n2 = prob.n * prob.n;
  }
  const int n = warm_start ? warm_start->dim() : prob.n;
  if (warm_start && !records.empty() && warm_start->dim() != prob.n) {
    fail(ErrorCode::kDimensionError, "warm start dimension mismatch");
  }
  prob.n = n;
  prob.n2 = n * n;

  const double mid = 0.5 * (cfg.a + cfg.b);
  Mat c = warm_start ? warm_start->mat()
                     : Mat(mid / n * Mat::Identity(n, n));
  // A warm start is only a starting point, not a license to skip the
  // continuation: the newest round's cuts pass through the previous center
  // by design, so the new stage objective is nothing like the old one and
  // the path has to be rewalked from a heavy barrier.
  prob.mu = cfg.barrier_mu0;
  prob.rho = 0.0;
  prob.nu = Eigen::VectorXd::Zero(static_cast<int>(records.size()));
  c = find_interior(prob, c);

  CenterSolution sol;
  StageEval ev;
  if (!prob.eval(c, &ev, true)) {
    fail(ErrorCode::kInfeasible, "interior construction failed");
  }

  const int tcnt = static_cast<int>(prob.recs.size());
  Eigen::MatrixXd h(prob.n2, prob.n2);
  Eigen::VectorXd g(prob.n2);
  Mat grad(n, n);
  Mat best_c = c;
  bool inner_converged = false;
  bool certified = false;
  const int total_cap = std::max(cfg.max_newton_iters, 8) * kMaxStages;
  // The CQI residual is restored gradually, one shrink factor per stage. A
  // fresh warm start sits on the newest round's cut boundaries, and only the
  // early heavy barrier can pull it off them; forcing the equalities first
  // would grind the iterate into that corner instead.
  double eq_target = std::max(ev.eq_res, kEqRestore);

  // Factor the negated Hessian, escalating a diagonal shift until the
  // factorization holds; the shift only dampens the step, the Schur solve
  // below keeps the equality rows exact regardless.
  Eigen::LLT<Eigen::MatrixXd> hf;
  auto factor_h = [&]() -> bool {
    double tau = 0.0;
    for (int reg = 0; reg < 12; ++reg) {
      Eigen::MatrixXd hr = h;
      if (tau > 0) hr.diagonal().array() += tau;
      hf.compute(hr);
      if (hf.info() == Eigen::Success) return true;
      tau = (tau == 0) ? 1e-10 * (1.0 + h.diagonal().maxCoeff()) : tau * 100;
    }
    return false;
  };

  // Fraction-to-the-boundary cap: cuts and trace are linear in c, so the
  // largest step keeping 1% of every slack (and of the trace gaps) is exact.
  // Without it a single frozen-Hessian step can land on a wall, where the
  // next factorization is garbage; with it the iterate slides along walls
  // while the re-evaluated curvature bends later steps away.
  Eigen::VectorXd rho_step(prob.p2);
  auto alpha_wall = [&](const Mat& step) -> double {
    double amax = 1.0;
    const double dtr = step.trace().real();
    if (dtr > 0) amax = std::min(amax, 0.99 * (cfg.b - ev.tr) / dtr);
    if (dtr < 0) amax = std::min(amax, 0.99 * (ev.tr - cfg.a) / (-dtr));
    for (size_t i = 0; i < prob.recs.size(); ++i) {
      const auto& ops = prob.recs[i];
      if (ops.cuts.rows() == 0) continue;
      vech(Mat(ops.q.adjoint() * step * ops.q), rho_step);
      const Eigen::VectorXd ds = ops.cuts * rho_step;
      for (int r = 0; r < ds.size(); ++r) {
        if (ds(r) < 0) {
          amax = std::min(amax, 0.99 * ev.slacks[i](r) / (-ds(r)));
        }
      }
    }
    return amax;
  };

  // KKT step through the Schur complement of the equality rows. The CQI
  // residual is linear in c, so the step satisfies a_mat * d = -r_rel in
  // exact arithmetic: a full line-search step lands on the equality slice
  // and tangent steps never leave it. with_objective=false drops the
  // gradient term, leaving the Hessian-weighted least-norm restoration.
  Eigen::VectorXd d, rg;
  auto kkt_step = [&](bool with_objective) -> bool {
    Eigen::VectorXd yg = Eigen::VectorXd::Zero(prob.n2);
    if (with_objective) yg = hf.solve(g);
    if (tcnt == 0) {
      d = yg;
      rg = g;
      return d.allFinite();
    }
    const Eigen::MatrixXd ya = hf.solve(prob.a_mat.transpose());
    Eigen::MatrixXd s = prob.a_mat * ya;
    s = 0.5 * (s + s.transpose()).eval();
    Eigen::VectorXd rhs = ev.r_rel;
    if (with_objective) {
      // Centering steps are tangent: they hold the residual at the level the
      // stage has restored to, pulling in only the excess over its target.
      // Chasing the whole residual here lets feasibility progress outvote the
      // barrier and grinds the iterate into the newest cuts' corner.
      const double relax =
          (ev.eq_res > eq_target) ? 1.0 - eq_target / ev.eq_res : 0.0;
      rhs *= relax;
      rhs += prob.a_mat * yg;
    }
    Eigen::LDLT<Eigen::MatrixXd> sf(s);
    Eigen::VectorXd w = sf.solve(rhs);
    if (sf.info() != Eigen::Success || !w.allFinite()) {
      // near-duplicate records make the Schur complement singular; a ridge
      // trades exactness for a solvable system and the next iteration mops
      // up the leftover residual
      s.diagonal().array() += 1e-12 * (s.trace() / tcnt + 1.0);
      sf.compute(s);
      w = sf.solve(rhs);
      if (!w.allFinite()) return false;
    }
    d = yg - ya * w;
    rg = g - prob.a_mat.transpose() * w;
    return d.allFinite();
  };

  for (int stage = 0; stage < kMaxStages; ++stage) {
    const double dec_tol = (prob.mu <= kMuFloor * 1.01) ? 1e-13 : 1e-9;
    inner_converged = false;
    certified = false;
    eq_target = std::max(eq_target * cfg.barrier_shrink, kEqRestore);

    // Restoration: pull toward the CQI slice as far as this stage asks.
    // Linearity makes full steps exact, and the Hessian weighting bends the
    // correction away from the barrier walls.
    for (int it = 0; tcnt > 0 && ev.eq_res > eq_target && it < 40; ++it) {
      if (sol.newton_iters >= total_cap) break;
      ++sol.newton_iters;
      prob.hessian_neg(c, ev, &h);
      if (!factor_h() || !kkt_step(false)) break;
      if (trace) {
        trace->push_back({stage, -1 - it, ev.val, prob.mu, 1.0, ev.eq_res,
                          sol.grad_norm, ev.min_slack});
      }
      const Mat step = math(d, n);
      double alpha = alpha_wall(step);
      if (alpha < 1e-12) break;  // pinned against a wall
      StageEval trial;
      bool moved = false;
      for (int bt = 0; bt < 60; ++bt) {
        if (prob.eval(c + alpha * step, &trial, true) &&
            trial.eq_res <= ev.eq_res * (1.0 - 0.5 * alpha) + 1e-15) {
          c += alpha * step;
          c = 0.5 * (c + c.adjoint()).eval();
          ev = trial;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) break;
    }

    for (int it = 0; it < cfg.max_newton_iters; ++it) {
      if (sol.newton_iters >= total_cap) break;
      ++sol.newton_iters;
      prob.add_gradient(c, ev, &grad);
      vech(grad, g);
      prob.hessian_neg(c, ev, &h);
      if (!factor_h() || !kkt_step(true)) break;
      const double scale = 1.0 + std::abs(ev.val);
      // reduced gradient: the raw one never vanishes on a constrained slice
      sol.grad_norm = rg.norm() / scale;
      const double dec = d.dot(h.selfadjointView<Eigen::Lower>() * d);
      if (!std::isfinite(dec) || dec < 0) break;

      if (trace) {
        trace->push_back({stage, it, ev.val, prob.mu, 0.0, ev.eq_res,
                          sol.grad_norm, ev.min_slack});
      }
      if (0.5 * dec <= dec_tol * scale) {
        inner_converged = true;
        certified = true;
        break;
      }

      const Mat step = math(d, n);
      double alpha = alpha_wall(step);
      StageEval trial;
      bool moved = false;
      for (int bt = 0; bt < 60 && alpha >= 1e-14; ++bt) {
        // Strict improvement required: once the sufficient-decrease margin
        // underflows against |val|, accepting an equal value would spin the
        // iteration in place for the rest of the stage budget.
        if (prob.eval(c + alpha * step, &trial, true) &&
            trial.val >= ev.val + 1e-4 * alpha * dec && trial.val > ev.val) {
          c += alpha * step;
          c = 0.5 * (c + c.adjoint()).eval();
          ev = trial;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) {
        inner_converged = true;  // cannot improve at this stage's scale
        certified = 0.5 * dec <= kStallCertify * scale;
        break;
      }
    }

    best_c = c;
    const bool mu_done = prob.mu <= kMuFloor * 1.01;
    const bool eq_done = ev.eq_res <= cfg.eq_tol;
    if (mu_done && eq_done && inner_converged &&
        (sol.grad_norm <= cfg.grad_tol || certified)) {
      sol.converged = true;
      break;
    }
    if (sol.newton_iters >= total_cap) break;
    prob.mu = std::max(prob.mu * cfg.barrier_shrink, kMuFloor);
    prob.eval(c, &ev, true);  // stage objective changed
  }

  StageEval fin;
  prob.eval(best_c, &fin, false);
  if (!sol.converged && !records.empty() &&
      fin.eq_res > std::max(1e3 * cfg.eq_tol, 1e-3)) {
    // Restoration never reached the CQI slice from any stage's iterate: the
    // constraint set is (numerically) empty.
    fail(ErrorCode::kInfeasible, "CQI equalities unmet after continuation");
  }
  sol.c_hat = HermitianPsd::trusted(0.5 * (best_c + best_c.adjoint()));
  sol.eq_residual = fin.eq_res;
  sol.min_slack = fin.in_domain ? fin.min_slack : 0.0;
  sol.objective = fin.cmo;
  sol.dropped_terms = prob.dropped_terms;
  return sol;
}

FeasibilityReport feasibility_check(const HermitianPsd& c,
                                    const std::vector<FeedbackRecord>& records,
                                    const Codebook& cb, double a, double b,
                                    double tol) {
  FeasibilityReport rep;
  rep.worst_c1_violation = -kInf;
  rep.worst_c2_residual = 0.0;
  for (const auto& rec : records) {
    const Mat r_proj = rec.q.adjoint() * c.mat() * rec.q;
    const double d0 =
        (cb.words.col(rec.m0).adjoint() * r_proj * cb.words.col(rec.m0))(0)
            .real();
    const double c_norm = 1.0 + rec.eta;
    rep.worst_c2_residual =
        std::max(rep.worst_c2_residual, std::abs(d0 - rec.eta) / c_norm);
    for (int m = 0; m < cb.size(); ++m) {
      if (m == rec.m0) continue;
      const double dm =
          (cb.words.col(m).adjoint() * r_proj * cb.words.col(m))(0).real();
      rep.worst_c1_violation =
          std::max(rep.worst_c1_violation, (dm - d0) / c_norm);
    }
  }
  if (records.empty()) rep.worst_c1_violation = 0.0;
  const HermEvd evd = herm_evd(c);
  rep.min_eigenvalue = evd.eigvals.minCoeff();
  rep.trace = c.trace();
  const double tr_slop = tol * (1.0 + b);
  rep.trace_ok = rep.trace >= a - tr_slop && rep.trace <= b + tr_slop;
  const double eig_slop = tol * (1.0 + std::max(evd.eigvals(0), 0.0));
  rep.pass = rep.worst_c1_violation <= tol && rep.worst_c2_residual <= tol &&
             rep.min_eigenvalue >= -eig_slop && rep.trace_ok;
  return rep;
}

CenterEvaluator::CenterEvaluator(const std::vector<FeedbackRecord>& records,
                                 const Codebook& cb, const CenterConfig& cfg)
    : p_(std::make_unique<detail::CenterProblem>()) {
  p_->build(records, cb, cfg);
  p_->mu = cfg.barrier_mu0;
  p_->rho = 0.0;
  p_->nu = Eigen::VectorXd::Zero(static_cast<int>(records.size()));
}

CenterEvaluator::~CenterEvaluator() = default;

void CenterEvaluator::set_stage(double mu, double rho, const RealVec& nu) {
  p_->mu = mu;
  p_->rho = rho;
  if (nu.size() != p_->nu.size()) {
    fail(ErrorCode::kDimensionError, "multiplier vector size mismatch");
  }
  p_->nu = nu;
}

double CenterEvaluator::value(const Mat& c) const {
  StageEval ev;
  return p_->eval(c, &ev, false) ? ev.val : -kInf;
}

double CenterEvaluator::value_and_grad(const Mat& c, Mat* grad) const {
  StageEval ev;
  if (!p_->eval(c, &ev, true)) return -kInf;
  p_->add_gradient(c, ev, grad);
  return ev.val;
}

double CenterEvaluator::cmo_objective(const Mat& c) const {
  StageEval ev;
  return p_->eval(c, &ev, false) ? ev.cmo : -kInf;
}

int CenterEvaluator::kept_terms() const { return p_->kept_terms; }
int CenterEvaluator::dropped_terms() const { return p_->dropped_terms; }

}  // namespace ccm
