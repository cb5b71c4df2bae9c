#include "ccm/types.hpp"

namespace ccm {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidMatrix: return "InvalidMatrix";
    case ErrorCode::kNotPsd: return "NotPsd";
    case ErrorCode::kSingular: return "Singular";
    case ErrorCode::kDimensionError: return "DimensionError";
    case ErrorCode::kBasisError: return "BasisError";
    case ErrorCode::kWrongBranch: return "WrongBranch";
    case ErrorCode::kSingularBlock: return "SingularBlock";
    case ErrorCode::kMissingHistory: return "MissingHistory";
    case ErrorCode::kTooFewCodewords: return "TooFewCodewords";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kDegenerateCut: return "DegenerateCut";
    case ErrorCode::kHeuristicFailed: return "HeuristicFailed";
    case ErrorCode::kDegenerateDiagnostics: return "DegenerateDiagnostics";
    case ErrorCode::kIoError: return "IoError";
  }
  return "UnknownError";
}

bool is_finite(const Mat& a) {
  return a.allFinite();
}

double herm_deviation(const Mat& a) {
  return (a - a.adjoint()).norm();
}

HermitianPsd::HermitianPsd(const Mat& a) {
  if (a.rows() != a.cols()) {
    fail(ErrorCode::kInvalidMatrix, "matrix is not square");
  }
  if (!a.allFinite()) {
    fail(ErrorCode::kInvalidMatrix, "matrix has non-finite entries");
  }
  const double dev = herm_deviation(a);
  if (dev > 1e-10 * (1.0 + a.norm())) {
    fail(ErrorCode::kInvalidMatrix, "matrix is not Hermitian");
  }
  m_ = 0.5 * (a + a.adjoint());
}

HermitianPsd HermitianPsd::trusted(Mat a) {
  HermitianPsd out;
  out.m_ = std::move(a);
  return out;
}

void validate_psd(const HermitianPsd& a, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a.mat(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    fail(ErrorCode::kInvalidMatrix, "eigenvalue computation failed");
  }
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin < -tol * (std::max(lmax, 0.0) + 1.0)) {
    fail(ErrorCode::kNotPsd, "smallest eigenvalue " + std::to_string(lmin));
  }
}

}  // namespace ccm
