#pragma once

#include <optional>
#include <string>

#include "ccm/codebook.hpp"
#include "ccm/rng.hpp"
#include "ccm/types.hpp"

namespace ccm {

enum class MPrimeStrategy { kRandom, kReuse, kMixture };
enum class SigmaStrategy { kEquality, kSamplingSorting };
enum class XStrategy { kDesigned, kRandom };

struct WmdStrategies {
  MPrimeStrategy m_prime = MPrimeStrategy::kMixture;
  double epsilon_db = -20.0;  // mixture switch threshold on the center drift
  SigmaStrategy sigma = SigmaStrategy::kEquality;
  XStrategy x = XStrategy::kDesigned;
  double rank_rel_tol = 1e-8;
};

// Rolling state the designer needs between rounds. b_decay is the
// exponentially discounted sum of past weighting matrices,
// B(t) = sum_i q(i) exp(10 (i - t)), seeded with q(1) at initialization.
struct WmdContext {
  HermitianPsd c_hat;
  std::optional<HermitianPsd> c_hat_prev;
  std::optional<Mat> q_prev;
  Mat b_decay;
};

int select_m_prime(const WmdStrategies& strat, const WmdContext& ctx,
                   const Codebook& cb, Rng& rng);

// Target spectrum for the next effective CCM; first k_nonzero entries
// positive (descending), the rest exactly zero.
RealVec build_sigmas(SigmaStrategy strat, int n_p, int k_nonzero, Rng& rng);

// r_aux = y diag(sigmas) y^H with y = [v_mprime | u_basis] orthonormal.
HermitianPsd build_r_aux(const Vec& v_mprime, const RealVec& sigmas,
                         const Mat& u_basis);

// Spectral data of c_hat consumed by the X step.
struct XDesignInputs {
  bool full_rank = true;
  Mat c_inv_sqrt;  // full-rank branch only
  Mat u1;          // n_a x k eigenvectors of the positive eigenvalues
  Mat u11;         // top k x k block of u1
  RealVec s;       // singular values of c_hat^{1/2}, descending
};

// Either random (isotropic, or isotropic within range(u1) when rank
// deficient) or the trace-minimizing choice against the discounted history
// b_decay, solved by a Procrustes alignment.
Mat design_x(XStrategy strat, const WmdContext& ctx,
             const XDesignInputs& in, const Mat& y_eig,
             const RealVec& sigmas, Rng& rng);

// Solves q for the defining equation q^H c_hat q = y diag(sigmas) y^H.
Mat design_q_full_rank(const HermitianPsd& c_hat, const Mat& x,
                       const RealVec& sigmas, const Mat& y_eig,
                       double eig_floor = 1e-10);

// Rank-k branch; o_extra, if given, must have columns in null(u1^H) and is
// added verbatim (the defining equation is insensitive to it).
Mat design_q_rank_deficient(const HermitianPsd& c_hat, const Mat& x,
                            const RealVec& sigmas, const Mat& y_eig, int k,
                            const Mat* o_extra = nullptr);

struct QDesign {
  Mat q;
  int m_prime = -1;
  int rank = 0;
  bool full_rank = true;
  RealVec sigmas;
  HermitianPsd r_aux;
};

// Full design step: picks m', sigmas and X per the strategies, builds q for
// the next round, and advances ctx (b_decay recurrence, previous q/center).
QDesign design_q(WmdContext& ctx, const WmdStrategies& strat,
                 const Codebook& cb, Rng& rng);

}  // namespace ccm
