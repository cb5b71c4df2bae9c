#pragma once

#include <istream>
#include <string>
#include <vector>

#include "ccm/codebook.hpp"
#include "ccm/scenario.hpp"
#include "ccm/types.hpp"

namespace ccm {

struct FeedbackRecord {
  int t = 0;
  Mat q;        // n_a x n_p pilot weighting used in round t
  int m0 = -1;  // PMI
  double eta = 0.0;  // CQI
};

struct EffectiveCcm {
  HermitianPsd r;  // n_p x n_p
  double sigma_e = 0.0;
  Mat h_e;
};

// UE-side effective covariance (h q + e)^H (h q + e). The estimation error e
// has i.i.d. CN(0, sigma_e) entries with sigma_e solved from the channel
// estimation quality target ceq_db = 10 log10(||h q||_F^2 / sigma_e);
// ceq_db = +inf means error-free.
EffectiveCcm effective_ccm_detail(const GroundTruth& gt, const Mat& q,
                                  double ceq_db, uint64_t seed);
HermitianPsd effective_ccm(const GroundTruth& gt, const Mat& q, double ceq_db,
                           uint64_t seed);

// argmax_m v_m^H r v_m, ties broken toward the lowest index.
int compute_pmi(const HermitianPsd& r, const Codebook& cb);

// v^H r v clamped to >= 0 against roundoff.
double compute_cqi(const HermitianPsd& r, const Vec& v);

FeedbackRecord feedback_round(const GroundTruth& gt, const Mat& q,
                              const Codebook& cb, double ceq_db, int t,
                              uint64_t seed);

// Replayable serialization: t, m0, eta, then re/im of q in row-major order.
std::string records_csv(const std::vector<FeedbackRecord>& records);
std::vector<FeedbackRecord> records_from_csv(std::istream& in, int n_a,
                                             int n_p);

}  // namespace ccm
