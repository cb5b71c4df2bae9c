#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace ccm {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;

enum class ErrorCode {
  kInvalidMatrix,
  kNotPsd,
  kSingular,
  kDimensionError,
  kBasisError,
  kWrongBranch,
  kSingularBlock,
  kMissingHistory,
  kTooFewCodewords,
  kConfigError,
  kInfeasible,
  kDegenerateCut,
  kHeuristicFailed,
  kDegenerateDiagnostics,
  kIoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg),
        code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

bool is_finite(const Mat& a);
double herm_deviation(const Mat& a);  // ||a - a^H||_F

// Hermitian matrix wrapper. Construction checks shape, finiteness and
// hermiticity (tol 1e-10 * (1 + ||a||_F)) and stores the symmetrized part.
// PSD-ness is validated where a spectrum is computed anyway (herm_evd,
// validate_psd) instead of paying an EVD on every construction.
class HermitianPsd {
 public:
  HermitianPsd() = default;
  explicit HermitianPsd(const Mat& a);

  // Skips validation; for internal paths that construct Hermitian results.
  static HermitianPsd trusted(Mat a);

  const Mat& mat() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  double trace() const { return m_.trace().real(); }

 private:
  Mat m_;
};

// Throws NotPsd if the smallest eigenvalue is below -tol * (lambda_max + 1).
void validate_psd(const HermitianPsd& a, double tol = 1e-9);

}  // namespace ccm
