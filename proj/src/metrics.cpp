#include "ccm/metrics.hpp"

#include <cmath>
#include <limits>

#include "ccm/hermlin.hpp"

namespace ccm {

double rmse_db(const HermitianPsd& c_star, const HermitianPsd& c_hat) {
  if (c_star.dim() != c_hat.dim()) {
    fail(ErrorCode::kDimensionError, "dimension mismatch in rmse");
  }
  const double n = c_star.dim();
  const double rmse = (c_star.mat() - c_hat.mat()).norm() / n;
  if (rmse <= 0) return -300.0;
  return std::max(10.0 * std::log10(rmse), -300.0);
}

double beam_precision(const HermitianPsd& c_star, const HermitianPsd& c_hat) {
  if (c_star.dim() != c_hat.dim()) {
    fail(ErrorCode::kDimensionError, "dimension mismatch in beam precision");
  }
  const HermEvd star = herm_evd(c_star);
  if (star.eigvals(0) <= 0) {
    fail(ErrorCode::kInvalidMatrix, "zero reference covariance");
  }
  const HermEvd hat = herm_evd(c_hat);
  const Vec w = hat.eigvecs.col(0);
  const double num = (w.adjoint() * c_star.mat() * w)(0).real();
  return num / star.eigvals(0);
}

double ceq_db(const Mat& h, const Mat& q, double sigma_e) {
  if (sigma_e < 0 || h.cols() != q.rows()) {
    fail(ErrorCode::kDimensionError, "bad ceq inputs");
  }
  const double signal = (h * q).squaredNorm();
  if (sigma_e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / sigma_e);
}

DiagnosticsRecord volume_measure(
    const std::vector<FeedbackRecord>& records, const Codebook& cb,
    const HermitianPsd& c_tilde,
    const std::vector<std::pair<std::string, HermitianPsd>>& c_tests,
    double lambda) {
  DiagnosticsRecord out;
  const int p = cb.n_p;
  std::vector<double> sums(c_tests.size(), 0.0);

  for (const auto& rec : records) {
    if (rec.eta <= 0) {
      ++out.dropped_terms;  // vacuous round, all its slacks are zero scale
      continue;
    }
    // Work in the p-dim projected space: <g_{m,i}, c> = d(m0) - d(m) for
    // d = diag(v^H (q^H c q) v).
    const Mat r_tilde = rec.q.adjoint() * c_tilde.mat() * rec.q;
    RealVec d_tilde(cb.size());
    for (int m = 0; m < cb.size(); ++m) {
      d_tilde(m) =
          (cb.words.col(m).adjoint() * r_tilde * cb.words.col(m))(0).real();
    }
    std::vector<RealVec> d_tests;
    d_tests.reserve(c_tests.size());
    for (const auto& [label, c] : c_tests) {
      (void)label;
      const Mat rc = rec.q.adjoint() * c.mat() * rec.q;
      RealVec d(cb.size());
      for (int m = 0; m < cb.size(); ++m) {
        d(m) = (cb.words.col(m).adjoint() * rc * cb.words.col(m))(0).real();
      }
      d_tests.push_back(std::move(d));
    }
    for (int m = 0; m < cb.size(); ++m) {
      if (m == rec.m0) continue;  // identically zero cut
      const double slack = d_tilde(rec.m0) - d_tilde(m);
      if (slack <= 0) {
        ++out.dropped_terms;
        continue;
      }
      const double w = 1.0 / (rec.eta * slack);
      out.s_t += w;
      for (size_t c = 0; c < c_tests.size(); ++c) {
        sums[c] += w * (d_tests[c](rec.m0) - d_tests[c](m));
      }
    }
  }
  if (out.s_t <= 0) {
    fail(ErrorCode::kDegenerateDiagnostics, "no usable cut terms");
  }
  for (size_t c = 0; c < c_tests.size(); ++c) {
    out.mu_at[c_tests[c].first] = sums[c] / out.s_t;
    out.lemma1_bound_at[c_tests[c].first] =
        lambda * c_tests[c].second.trace() / out.s_t;
  }
  return out;
}

}  // namespace ccm
