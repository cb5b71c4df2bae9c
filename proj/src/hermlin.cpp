#include "ccm/hermlin.hpp"

#include <cmath>

#include "ccm/rng.hpp"

namespace ccm {
namespace {

void fix_phases(Mat& vecs) {
  for (int j = 0; j < vecs.cols(); ++j) {
    const double big = vecs.col(j).cwiseAbs().maxCoeff();
    if (big <= 0) continue;
    for (int i = 0; i < vecs.rows(); ++i) {
      const double a = std::abs(vecs(i, j));
      if (a > 1e-9 * big) {
        vecs.col(j) *= std::conj(vecs(i, j)) / a;
        break;
      }
    }
  }
}

}  // namespace

HermEvd herm_evd(const HermitianPsd& a) {
  if (a.dim() == 0) {
    fail(ErrorCode::kInvalidMatrix, "empty matrix");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(a.mat());
  if (es.info() != Eigen::Success) {
    fail(ErrorCode::kInvalidMatrix, "eigendecomposition failed");
  }
  const int n = a.dim();
  HermEvd out;
  out.eigvals = RealVec(n);
  out.eigvecs = Mat(n, n);
  for (int i = 0; i < n; ++i) {  // ascending -> descending
    out.eigvals(i) = es.eigenvalues()(n - 1 - i);
    out.eigvecs.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  fix_phases(out.eigvecs);
  return out;
}

HermitianPsd psd_sqrt(const HermitianPsd& a) {
  const HermEvd evd = herm_evd(a);
  const double lmax = evd.eigvals.size() ? evd.eigvals(0) : 0.0;
  if (evd.eigvals.minCoeff() < -1e-9 * (std::max(lmax, 0.0) + 1.0)) {
    fail(ErrorCode::kNotPsd, "negative eigenvalue in psd_sqrt");
  }
  RealVec s = evd.eigvals.cwiseMax(0.0).cwiseSqrt();
  Mat m = evd.eigvecs * s.asDiagonal() * evd.eigvecs.adjoint();
  return HermitianPsd::trusted(0.5 * (m + m.adjoint()));
}

HermitianPsd psd_inv_sqrt(const HermitianPsd& a, double eig_floor) {
  const HermEvd evd = herm_evd(a);
  const double lmax = evd.eigvals(0);
  if (lmax <= 0) {
    fail(ErrorCode::kSingular, "psd_inv_sqrt of a zero matrix");
  }
  if (evd.eigvals.minCoeff() < -1e-9 * (lmax + 1.0)) {
    fail(ErrorCode::kNotPsd, "negative eigenvalue in psd_inv_sqrt");
  }
  const double floor = eig_floor * lmax;
  RealVec s(evd.eigvals.size());
  for (int i = 0; i < s.size(); ++i) {
    s(i) = 1.0 / std::sqrt(std::max(evd.eigvals(i), floor));
  }
  Mat m = evd.eigvecs * s.asDiagonal() * evd.eigvecs.adjoint();
  return HermitianPsd::trusted(0.5 * (m + m.adjoint()));
}

Mat orthonormal_complete(const Vec& v, int k, uint64_t seed) {
  const int n = static_cast<int>(v.size());
  if (k < 0 || k > n - 1) {
    fail(ErrorCode::kDimensionError, "cannot complete " + std::to_string(k) +
                                         " columns in dimension " +
                                         std::to_string(n));
  }
  const double vn = v.norm();
  if (vn <= 0) {
    fail(ErrorCode::kBasisError, "zero anchor vector");
  }
  Mat basis(n, k + 1);
  basis.col(0) = v / vn;
  Rng rng(seed, 0x6f72746821ULL);
  for (int j = 1; j <= k; ++j) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 64) {
        fail(ErrorCode::kBasisError, "orthonormal completion stalled");
      }
      Vec cand(n);
      for (int i = 0; i < n; ++i) cand(i) = rng.cnormal();
      // two Gram-Schmidt passes for orthogonality near machine precision
      for (int pass = 0; pass < 2; ++pass) {
        for (int c = 0; c < j; ++c) {
          cand -= basis.col(c).dot(cand) * basis.col(c);
        }
      }
      const double nn = cand.norm();
      if (nn > 0.1) {
        basis.col(j) = cand / nn;
        break;
      }
    }
  }
  return basis.rightCols(k);
}

Mat null_basis(const Mat& a) {
  const int n = static_cast<int>(a.cols());
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double tol = std::max(a.rows(), a.cols()) * 1e-14 * smax;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol && sv(i) > 0) ++rank;
  }
  return svd.matrixV().rightCols(n - rank);
}

Mat procrustes_max(const Mat& d) {
  const int n = static_cast<int>(d.rows());
  const int k = static_cast<int>(d.cols());
  if (k > n) {
    fail(ErrorCode::kDimensionError, "procrustes needs rows >= cols");
  }
  if (d.norm() == 0.0) {
    return Mat::Identity(n, k);
  }
  Eigen::JacobiSVD<Mat> svd(d, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

int numerical_rank(const HermitianPsd& a, double rel_tol) {
  const HermEvd evd = herm_evd(a);
  const double lmax = evd.eigvals(0);
  if (lmax <= 0) return 0;
  int rank = 0;
  for (int i = 0; i < evd.eigvals.size(); ++i) {
    if (evd.eigvals(i) > rel_tol * lmax) ++rank;
  }
  return rank;
}

double nuclear_norm(const HermitianPsd& a) {
  return herm_evd(a).eigvals.cwiseAbs().sum();
}

}  // namespace ccm
