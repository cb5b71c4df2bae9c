#include "ccm/feedback.hpp"

#include <cmath>
#include <limits>

#include "ccm/csvio.hpp"
#include "ccm/rng.hpp"

namespace ccm {

EffectiveCcm effective_ccm_detail(const GroundTruth& gt, const Mat& q,
                                  double ceq_db, uint64_t seed) {
  if (q.rows() != gt.c_star.dim() || q.cols() < 1 || q.cols() > q.rows()) {
    fail(ErrorCode::kDimensionError, "q must be n_a x n_p with n_p <= n_a");
  }
  EffectiveCcm out;
  out.h_e = gt.chan.h * q;
  out.sigma_e = 0.0;
  if (std::isfinite(ceq_db)) {
    const double signal = out.h_e.squaredNorm();
    out.sigma_e = signal / std::pow(10.0, ceq_db / 10.0);
    const double s = std::sqrt(out.sigma_e);
    Rng rng(seed, 0x63657131ULL);
    for (int j = 0; j < out.h_e.cols(); ++j) {
      for (int i = 0; i < out.h_e.rows(); ++i) {
        out.h_e(i, j) += s * rng.cnormal();
      }
    }
  }
  Mat r = out.h_e.adjoint() * out.h_e;
  out.r = HermitianPsd::trusted(0.5 * (r + r.adjoint()));
  return out;
}

HermitianPsd effective_ccm(const GroundTruth& gt, const Mat& q, double ceq_db,
                           uint64_t seed) {
  return effective_ccm_detail(gt, q, ceq_db, seed).r;
}

int compute_pmi(const HermitianPsd& r, const Codebook& cb) {
  if (cb.n_p != r.dim()) {
    fail(ErrorCode::kDimensionError, "codebook/effective CCM size mismatch");
  }
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < cb.size(); ++m) {
    const double val =
        (cb.words.col(m).adjoint() * r.mat() * cb.words.col(m))(0).real();
    if (val > best_val) {
      best_val = val;
      best = m;
    }
  }
  return best;
}

double compute_cqi(const HermitianPsd& r, const Vec& v) {
  const double val = (v.adjoint() * r.mat() * v)(0).real();
  return std::max(val, 0.0);
}

FeedbackRecord feedback_round(const GroundTruth& gt, const Mat& q,
                              const Codebook& cb, double ceq_db, int t,
                              uint64_t seed) {
  const HermitianPsd r = effective_ccm(gt, q, ceq_db, seed);
  FeedbackRecord rec;
  rec.t = t;
  rec.q = q;
  rec.m0 = compute_pmi(r, cb);
  rec.eta = compute_cqi(r, cb.words.col(rec.m0));
  return rec;
}

std::string records_csv(const std::vector<FeedbackRecord>& records) {
  std::string out = "t,m0,eta,q_re_im...\n";
  for (const auto& rec : records) {
    out += std::to_string(rec.t) + "," + std::to_string(rec.m0) + "," +
           fmt_g12(rec.eta);
    for (int i = 0; i < rec.q.rows(); ++i) {
      for (int j = 0; j < rec.q.cols(); ++j) {
        out += "," + fmt_g12(rec.q(i, j).real());
        out += "," + fmt_g12(rec.q(i, j).imag());
      }
    }
    out += "\n";
  }
  return out;
}

std::vector<FeedbackRecord> records_from_csv(std::istream& in, int n_a,
                                             int n_p) {
  std::vector<FeedbackRecord> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (first) {  // header
      first = false;
      continue;
    }
    const auto fields = split_csv_line(line);
    const size_t expect = 3 + 2 * static_cast<size_t>(n_a) * n_p;
    if (fields.size() != expect) {
      fail(ErrorCode::kIoError, "record row has " +
                                    std::to_string(fields.size()) +
                                    " fields, expected " +
                                    std::to_string(expect));
    }
    FeedbackRecord rec;
    rec.t = static_cast<int>(parse_double(fields[0]));
    rec.m0 = static_cast<int>(parse_double(fields[1]));
    rec.eta = parse_double(fields[2]);
    rec.q = Mat(n_a, n_p);
    size_t f = 3;
    for (int i = 0; i < n_a; ++i) {
      for (int j = 0; j < n_p; ++j) {
        const double re = parse_double(fields[f++]);
        const double im = parse_double(fields[f++]);
        rec.q(i, j) = cxd(re, im);
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace ccm
