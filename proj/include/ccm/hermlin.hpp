#pragma once

#include "ccm/types.hpp"

namespace ccm {

// Eigenvalues descending; each eigenvector's first nonzero component is made
// real-positive so repeated factorizations of the same matrix agree exactly.
struct HermEvd {
  RealVec eigvals;
  Mat eigvecs;  // columns
};

HermEvd herm_evd(const HermitianPsd& a);

HermitianPsd psd_sqrt(const HermitianPsd& a);

// Eigenvalues below eig_floor * lambda_max are clamped to the floor before
// inversion. All-zero input is Singular.
HermitianPsd psd_inv_sqrt(const HermitianPsd& a, double eig_floor = 1e-10);

// Columns orthonormal, all orthogonal to v; deterministic in seed.
Mat orthonormal_complete(const Vec& v, int k, uint64_t seed);

// Orthonormal basis of the null space of a (possibly non-square) matrix.
Mat null_basis(const Mat& a);

// argmax over semi-unitary X (X^H X = I_k) of Re tr(X^H d); d is n x k with
// n >= k. A zero d returns the identity completion.
Mat procrustes_max(const Mat& d);

int numerical_rank(const HermitianPsd& a, double rel_tol = 1e-8);

// Sum of absolute eigenvalues; equals the trace on the PSD cone.
double nuclear_norm(const HermitianPsd& a);

}  // namespace ccm
