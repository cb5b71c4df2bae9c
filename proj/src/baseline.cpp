#include "ccm/baseline.hpp"

#include <cmath>

#include "ccm/csvio.hpp"
#include "ccm/rng.hpp"

namespace ccm {
namespace {

void validate_config(const BaselineConfig& cfg) {
  const int n_a = static_cast<int>(cfg.q1.rows());
  const int n_p = static_cast<int>(cfg.q1.cols());
  if (n_a < 1 || n_p < 1 || n_p > n_a) {
    fail(ErrorCode::kConfigError, "baseline q1 must be n_a x n_p");
  }
  if ((cfg.q1.adjoint() * cfg.q1 - Mat::Identity(n_p, n_p)).norm() > 1e-8) {
    fail(ErrorCode::kConfigError, "baseline q1 must be semi-unitary");
  }
  if (cfg.family.empty()) {
    fail(ErrorCode::kConfigError, "baseline family is empty");
  }
  for (const auto& m : cfg.family) {
    if (m.rows() != n_p || m.cols() != n_p ||
        (m.adjoint() * m - Mat::Identity(n_p, n_p)).norm() > 1e-8) {
      fail(ErrorCode::kConfigError, "baseline family members must be unitary");
    }
  }
}

}  // namespace

BaselineConfig default_baseline(int n_a, int n_p, uint64_t seed) {
  Rng rng(seed, 0x62617365ULL);
  BaselineConfig cfg;
  cfg.q1 = random_semi_unitary(n_a, n_p, rng);
  for (int k = 0; k < n_p; ++k) {
    Mat f = Mat::Zero(n_p, n_p);
    for (int l = 0; l < n_p; ++l) {
      const double phase = 2.0 * M_PI * l * k / static_cast<double>(n_p);
      f(l, l) = cxd(std::cos(phase), std::sin(phase));
    }
    cfg.family.push_back(std::move(f));
  }
  validate_config(cfg);
  return cfg;
}

BaselineConfig baseline_from_csv(std::istream& q1_csv, std::istream& fam_csv,
                                 int n_a, int n_p) {
  const auto q1_rows = read_numeric_csv(q1_csv);
  if (q1_rows.size() != static_cast<size_t>(n_a) * n_p) {
    fail(ErrorCode::kIoError, "baseline q1 CSV must have n_a*n_p rows");
  }
  BaselineConfig cfg;
  cfg.q1 = Mat(n_a, n_p);
  for (int i = 0; i < n_a; ++i) {
    for (int j = 0; j < n_p; ++j) {
      const auto& r = q1_rows[static_cast<size_t>(i) * n_p + j];
      if (r.size() != 2) fail(ErrorCode::kIoError, "expected re,im rows");
      cfg.q1(i, j) = cxd(r[0], r[1]);
    }
  }
  const auto fam_rows = read_numeric_csv(fam_csv);
  const size_t per = static_cast<size_t>(n_p) * n_p;
  if (fam_rows.empty() || fam_rows.size() % per != 0) {
    fail(ErrorCode::kIoError, "family CSV must hold blocks of n_p*n_p rows");
  }
  for (size_t b = 0; b < fam_rows.size() / per; ++b) {
    Mat m(n_p, n_p);
    for (int i = 0; i < n_p; ++i) {
      for (int j = 0; j < n_p; ++j) {
        const auto& r = fam_rows[b * per + static_cast<size_t>(i) * n_p + j];
        if (r.size() != 2) fail(ErrorCode::kIoError, "expected re,im rows");
        m(i, j) = cxd(r[0], r[1]);
      }
    }
    cfg.family.push_back(std::move(m));
  }
  validate_config(cfg);
  return cfg;
}

Mat baseline_q(const BaselineConfig& cfg, int t) {
  if (t < 1) {
    fail(ErrorCode::kConfigError, "round index is 1-based");
  }
  const size_t idx = static_cast<size_t>(t - 1) % cfg.family.size();
  return cfg.q1 * cfg.family[idx];
}

HermitianPsd baseline_reconstruct(const std::vector<FeedbackRecord>& records,
                                  const Codebook& cb, int t_count) {
  if (records.empty() || t_count < 1) {
    fail(ErrorCode::kConfigError, "baseline needs at least one record");
  }
  const int n_a = static_cast<int>(records.front().q.rows());
  Mat c = Mat::Zero(n_a, n_a);
  for (const auto& rec : records) {
    if (rec.m0 < 0 || rec.m0 >= cb.size() || rec.q.rows() != n_a) {
      fail(ErrorCode::kConfigError, "malformed feedback record");
    }
    const Vec qv = rec.q * cb.word(rec.m0);
    c += rec.eta * (qv * qv.adjoint());
  }
  c /= static_cast<double>(t_count);
  return HermitianPsd::trusted(0.5 * (c + c.adjoint()));
}

}  // namespace ccm
