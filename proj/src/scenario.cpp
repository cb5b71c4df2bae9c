#include "ccm/scenario.hpp"

#include <cmath>

#include "ccm/csvio.hpp"
#include "ccm/hermlin.hpp"
#include "ccm/rng.hpp"

namespace ccm {

GroundTruth synth_channel(int n_a, int n_u, int n_paths, uint64_t seed) {
  if (n_a < 1 || n_u < 1 || n_u > n_a) {
    fail(ErrorCode::kDimensionError, "need 1 <= n_u <= n_a");
  }
  if (n_paths < n_u) {
    fail(ErrorCode::kDimensionError, "need n_paths >= n_u for full rank");
  }
  Rng rng(seed, 0x736e7468ULL);
  Mat h = Mat::Zero(n_u, n_a);
  for (int l = 0; l < n_paths; ++l) {
    const double sin_theta = 2.0 * rng.uniform() - 1.0;
    Vec a(n_a);
    for (int k = 0; k < n_a; ++k) {
      const double phase = M_PI * k * sin_theta;
      a(k) = cxd(std::cos(phase), std::sin(phase));
    }
    Vec b(n_u);
    for (int i = 0; i < n_u; ++i) b(i) = rng.cnormal();
    b.normalize();
    const cxd g = rng.cnormal();
    h += g * b * a.adjoint();
  }
  const double power = h.squaredNorm();  // tr(h^H h)
  if (power <= 0) {
    fail(ErrorCode::kInvalidMatrix, "degenerate channel draw");
  }
  h /= std::sqrt(power);

  GroundTruth gt;
  gt.chan.h = h;
  Mat c = h.adjoint() * h;
  gt.c_star = HermitianPsd::trusted(0.5 * (c + c.adjoint()));
  gt.d = herm_evd(gt.c_star).eigvals(0);
  return gt;
}

HermitianPsd historical_ccm(const GroundTruth& gt, double perturbation,
                            uint64_t seed) {
  if (perturbation < 0) {
    fail(ErrorCode::kConfigError, "perturbation must be >= 0");
  }
  Rng rng(seed, 0x68697374ULL);
  const int n_a = gt.c_star.dim();
  const int n_u = static_cast<int>(gt.chan.h.rows());
  const Mat w = random_gaussian(n_a, n_u, rng);
  Mat c = gt.c_star.mat() + perturbation * (w * w.adjoint());
  return normalize_trace(HermitianPsd::trusted(0.5 * (c + c.adjoint())));
}

HermitianPsd normalize_trace(const HermitianPsd& c) {
  const double tr = c.trace();
  if (tr <= 0) {
    fail(ErrorCode::kInvalidMatrix, "non-positive trace");
  }
  return HermitianPsd::trusted(c.mat() / tr);
}

std::string ccm_csv(const HermitianPsd& c) {
  std::string out;
  const int n = c.dim();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out += fmt_g12(c.mat()(i, j).real());
      out += ",";
      out += fmt_g12(c.mat()(i, j).imag());
      out += "\n";
    }
  }
  return out;
}

HermitianPsd read_ccm_csv(std::istream& in) {
  const auto rows = read_numeric_csv(in);
  const int n = static_cast<int>(std::lround(std::sqrt(double(rows.size()))));
  if (rows.empty() || static_cast<size_t>(n) * n != rows.size()) {
    fail(ErrorCode::kIoError, "CCM CSV must have n^2 re,im rows");
  }
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto& r = rows[static_cast<size_t>(i) * n + j];
      if (r.size() != 2) {
        fail(ErrorCode::kIoError, "CCM CSV rows must be re,im pairs");
      }
      m(i, j) = cxd(r[0], r[1]);
    }
  }
  HermitianPsd c(m);  // validates hermiticity
  validate_psd(c, 1e-9);
  return c;
}

GroundTruth ground_truth_from_ccm(const HermitianPsd& c_star) {
  GroundTruth gt;
  gt.c_star = normalize_trace(c_star);
  const HermEvd evd = herm_evd(gt.c_star);
  const int r = numerical_rank(gt.c_star, 1e-8);
  if (r < 1) {
    fail(ErrorCode::kInvalidMatrix, "zero covariance");
  }
  Mat h(r, gt.c_star.dim());
  for (int i = 0; i < r; ++i) {
    h.row(i) = std::sqrt(evd.eigvals(i)) * evd.eigvecs.col(i).adjoint();
  }
  gt.chan.h = h;
  gt.d = evd.eigvals(0);
  return gt;
}

}  // namespace ccm
