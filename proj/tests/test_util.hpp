#pragma once

#include <cmath>

#include "ccm/hermlin.hpp"
#include "ccm/rng.hpp"
#include "ccm/types.hpp"

namespace tu {

inline ccm::Mat random_hermitian(int n, ccm::Rng& rng) {
  ccm::Mat a = ccm::random_gaussian(n, n, rng);
  return ccm::Mat(0.5 * (a + a.adjoint()));
}

// Well-conditioned positive definite matrix with trace ~ n.
inline ccm::HermitianPsd random_pd(int n, ccm::Rng& rng, double ridge = 0.1) {
  ccm::Mat a = ccm::random_gaussian(n, n, rng);
  ccm::Mat c = a * a.adjoint() / static_cast<double>(n) +
               ridge * ccm::Mat::Identity(n, n);
  return ccm::HermitianPsd::trusted(0.5 * (c + c.adjoint()));
}

// Exact rank-k PSD matrix, trace normalized to 1.
inline ccm::HermitianPsd random_psd_rank(int n, int k, ccm::Rng& rng) {
  ccm::Mat u = ccm::random_semi_unitary(n, k, rng);
  ccm::RealVec lam(k);
  for (int i = 0; i < k; ++i) lam[i] = 0.25 + rng.uniform();
  lam /= lam.sum();
  ccm::Mat c = u * lam.asDiagonal() * u.adjoint();
  return ccm::HermitianPsd::trusted(0.5 * (c + c.adjoint()));
}

inline double rel_diff(const ccm::Mat& a, const ccm::Mat& b) {
  return (a - b).norm() / (1.0 + b.norm());
}

inline bool is_semi_unitary(const ccm::Mat& x, double tol = 1e-9) {
  ccm::Mat g = x.adjoint() * x;
  return (g - ccm::Mat::Identity(x.cols(), x.cols())).norm() <= tol;
}

}  // namespace tu
