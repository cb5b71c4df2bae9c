#include "ccm/wmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccm/hermlin.hpp"

namespace ccm {
namespace {

// Tall rectangular sqrt-spectrum factor: diag(sqrt(sigmas)) on top, zeros
// below, shaped rows x cols with cols = sigmas.size().
Mat sigma_factor(int rows, const RealVec& sigmas) {
  const int cols = static_cast<int>(sigmas.size());
  Mat s = Mat::Zero(rows, cols);
  for (int i = 0; i < std::min(rows, cols); ++i) {
    s(i, i) = std::sqrt(std::max(sigmas(i), 0.0));
  }
  return s;
}

int argmax_quadratic(const Mat& w, const Codebook& cb) {
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < cb.size(); ++m) {
    const double val =
        (cb.words.col(m).adjoint() * w * cb.words.col(m))(0).real();
    if (val > best_val) {
      best_val = val;
      best = m;
    }
  }
  return best;
}

double u11_min_singular(const Mat& u11) {
  Eigen::JacobiSVD<Mat> svd(u11);
  return svd.singularValues().minCoeff();
}

}  // namespace

int select_m_prime(const WmdStrategies& strat, const WmdContext& ctx,
                   const Codebook& cb, Rng& rng) {
  switch (strat.m_prime) {
    case MPrimeStrategy::kRandom:
      return rng.index(cb.size());
    case MPrimeStrategy::kReuse: {
      if (!ctx.q_prev.has_value()) {
        fail(ErrorCode::kMissingHistory, "reuse strategy needs a previous q");
      }
      const Mat w = ctx.q_prev->adjoint() * ctx.c_hat.mat() * *ctx.q_prev;
      return argmax_quadratic(w, cb);
    }
    case MPrimeStrategy::kMixture: {
      if (!ctx.c_hat_prev.has_value() || !ctx.q_prev.has_value()) {
        return rng.index(cb.size());  // no drift measurement yet
      }
      const int n = ctx.c_hat.dim();
      const double gamma =
          (ctx.c_hat_prev->mat() - ctx.c_hat.mat()).norm() / n;
      const double gamma_db =
          gamma > 0 ? 10.0 * std::log10(gamma)
                    : -std::numeric_limits<double>::infinity();
      if (gamma_db >= strat.epsilon_db) {
        return rng.index(cb.size());
      }
      const Mat w = ctx.q_prev->adjoint() * ctx.c_hat.mat() * *ctx.q_prev;
      return argmax_quadratic(w, cb);
    }
  }
  fail(ErrorCode::kConfigError, "unknown m' strategy");
}

RealVec build_sigmas(SigmaStrategy strat, int n_p, int k_nonzero, Rng& rng) {
  if (k_nonzero < 1 || k_nonzero > n_p) {
    fail(ErrorCode::kConfigError, "k_nonzero out of range");
  }
  RealVec sigmas = RealVec::Zero(n_p);
  if (strat == SigmaStrategy::kEquality) {
    sigmas.head(k_nonzero).setOnes();
    return sigmas;
  }
  RealVec draws(n_p);
  for (int i = 0; i < n_p; ++i) draws(i) = rng.uniform_pos();
  std::sort(draws.data(), draws.data() + n_p, std::greater<double>());
  sigmas.head(k_nonzero) = draws.head(k_nonzero);
  return sigmas;
}

HermitianPsd build_r_aux(const Vec& v_mprime, const RealVec& sigmas,
                         const Mat& u_basis) {
  const int p = static_cast<int>(v_mprime.size());
  if (u_basis.rows() != p || u_basis.cols() != p - 1 || sigmas.size() != p) {
    fail(ErrorCode::kDimensionError, "r_aux pieces have inconsistent sizes");
  }
  Mat y(p, p);
  y.col(0) = v_mprime;
  y.rightCols(p - 1) = u_basis;
  if ((y.adjoint() * y - Mat::Identity(p, p)).norm() > 1e-8) {
    fail(ErrorCode::kBasisError, "[v | u_basis] is not orthonormal");
  }
  for (int i = 0; i + 1 < p; ++i) {
    if (sigmas(i) < sigmas(i + 1) || sigmas(i + 1) < 0) {
      fail(ErrorCode::kConfigError, "sigmas must be descending and >= 0");
    }
  }
  Mat r = y * sigmas.asDiagonal() * y.adjoint();
  return HermitianPsd::trusted(0.5 * (r + r.adjoint()));
}

Mat design_x(XStrategy strat, const WmdContext& ctx, const XDesignInputs& in,
             const Mat& y_eig, const RealVec& sigmas, Rng& rng) {
  const int n = ctx.c_hat.dim();
  if (in.full_rank) {
    if (strat == XStrategy::kRandom) {
      return random_unitary(n, rng);
    }
    // Minimize Re tr(q^H b_decay + b_decay^H q) over the free unitary factor:
    // with q = c^{-1/2} x s y^H the trace is linear in x and the optimum is
    // the Procrustes alignment to d below. Zero history keeps the identity.
    const Mat s = sigma_factor(n, sigmas);
    const Mat d = -(in.c_inv_sqrt * ctx.b_decay * y_eig * s.adjoint());
    return procrustes_max(d);
  }
  const int k = static_cast<int>(in.u1.cols());
  Mat x = Mat::Zero(n, n);
  if (strat == XStrategy::kRandom) {
    x.leftCols(k) = in.u1 * random_unitary(k, rng);
    return x;
  }
  if (u11_min_singular(in.u11) < 1e-10) {
    fail(ErrorCode::kSingularBlock, "leading eigenvector block is singular");
  }
  const Mat s = sigma_factor(n, sigmas);
  const Mat bys = ctx.b_decay * y_eig * s.adjoint();  // n x n
  Mat d_tilde = in.u11.partialPivLu().solve(bys.topLeftCorner(k, k));
  for (int i = 0; i < k; ++i) d_tilde.row(i) /= in.s(i);
  d_tilde = -d_tilde;
  x.leftCols(k) = in.u1 * procrustes_max(d_tilde);
  return x;
}

Mat design_q_full_rank(const HermitianPsd& c_hat, const Mat& x,
                       const RealVec& sigmas, const Mat& y_eig,
                       double eig_floor) {
  const int n = c_hat.dim();
  const int p = static_cast<int>(y_eig.rows());
  if (x.rows() != n || x.cols() != n || sigmas.size() != p) {
    fail(ErrorCode::kDimensionError, "inconsistent shapes in q design");
  }
  if (numerical_rank(c_hat, eig_floor) < n) {
    fail(ErrorCode::kWrongBranch, "center is rank deficient");
  }
  const Mat s = sigma_factor(n, sigmas);
  return psd_inv_sqrt(c_hat, eig_floor).mat() * x * s * y_eig.adjoint();
}

Mat design_q_rank_deficient(const HermitianPsd& c_hat, const Mat& x,
                            const RealVec& sigmas, const Mat& y_eig, int k,
                            const Mat* o_extra) {
  const int n = c_hat.dim();
  const int p = static_cast<int>(y_eig.rows());
  if (k < 1 || k >= n) {
    fail(ErrorCode::kWrongBranch, "rank-deficient branch needs 1 <= k < n_a");
  }
  if (k < p) {
    for (int i = k; i < p; ++i) {
      if (sigmas(i) != 0.0) {
        fail(ErrorCode::kConfigError,
             "sigmas beyond the center rank must be zero");
      }
    }
  } else {
    for (int i = 0; i < p; ++i) {
      if (sigmas(i) <= 0.0) {
        fail(ErrorCode::kConfigError,
             "all sigmas must be positive when rank >= n_p");
      }
    }
  }
  const HermEvd evd = herm_evd(c_hat);
  const Mat u1 = evd.eigvecs.leftCols(k);
  const Mat u11 = u1.topRows(k);
  if (u11_min_singular(u11) < 1e-10) {
    fail(ErrorCode::kSingularBlock, "leading eigenvector block is singular");
  }
  RealVec s_vals = evd.eigvals.head(k).cwiseMax(0.0).cwiseSqrt();
  const Mat s = sigma_factor(n, sigmas);
  const Mat f = x * s * y_eig.adjoint();  // n x p
  Mat q1 = u1.adjoint() * f;              // k x p
  for (int i = 0; i < k; ++i) q1.row(i) /= s_vals(i);
  q1 = u11.adjoint().partialPivLu().solve(q1);
  Mat q = Mat::Zero(n, p);
  q.topRows(k) = q1;
  if (o_extra != nullptr) {
    if (o_extra->rows() != n || o_extra->cols() != p) {
      fail(ErrorCode::kDimensionError, "o_extra must be n_a x n_p");
    }
    if ((u1.adjoint() * *o_extra).norm() > 1e-8 * (1.0 + o_extra->norm())) {
      fail(ErrorCode::kBasisError, "o_extra not in null(u1^H)");
    }
    q += *o_extra;
  }
  return q;
}

QDesign design_q(WmdContext& ctx, const WmdStrategies& strat,
                 const Codebook& cb, Rng& rng) {
  const int n = ctx.c_hat.dim();
  const int p = cb.n_p;
  if (p > n) {
    fail(ErrorCode::kDimensionError, "n_p must not exceed n_a");
  }
  if (ctx.b_decay.size() == 0) {
    ctx.b_decay = Mat::Zero(n, p);
  }
  const int rank = numerical_rank(ctx.c_hat, strat.rank_rel_tol);
  if (rank < 1) {
    fail(ErrorCode::kSingular, "center has numerical rank zero");
  }

  QDesign out;
  out.rank = rank;
  out.full_rank = (rank == n);
  out.m_prime = select_m_prime(strat, ctx, cb, rng);
  const Vec v = cb.word(out.m_prime);
  out.sigmas = build_sigmas(strat.sigma, p, std::min(rank, p), rng);
  const Mat u_basis = orthonormal_complete(v, p - 1, rng.derive(0x79626173));
  out.r_aux = build_r_aux(v, out.sigmas, u_basis);
  Mat y_eig(p, p);
  y_eig.col(0) = v;
  y_eig.rightCols(p - 1) = u_basis;

  XDesignInputs in;
  in.full_rank = out.full_rank;
  if (out.full_rank) {
    in.c_inv_sqrt = psd_inv_sqrt(ctx.c_hat).mat();
  } else {
    const HermEvd evd = herm_evd(ctx.c_hat);
    in.u1 = evd.eigvecs.leftCols(rank);
    in.u11 = in.u1.topRows(rank);
    in.s = evd.eigvals.head(rank).cwiseMax(0.0).cwiseSqrt();
  }
  const Mat x = design_x(strat.x, ctx, in, y_eig, out.sigmas, rng);
  out.q = out.full_rank
              ? design_q_full_rank(ctx.c_hat, x, out.sigmas, y_eig)
              : design_q_rank_deficient(ctx.c_hat, x, out.sigmas, y_eig, rank);

  ctx.b_decay = std::exp(-10.0) * ctx.b_decay + out.q;
  ctx.q_prev = out.q;
  ctx.c_hat_prev = ctx.c_hat;
  return out;
}

}  // namespace ccm
