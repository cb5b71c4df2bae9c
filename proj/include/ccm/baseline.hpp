#pragma once

#include <istream>
#include <vector>

#include "ccm/feedback.hpp"
#include "ccm/types.hpp"

namespace ccm {

// Codebook-cycling reference scheme: round t uses q(t) = q1 * family[(t-1)
// mod family.size()] and the covariance estimate is the CQI-weighted average
// of the fed-back beam outer products.
struct BaselineConfig {
  Mat q1;                   // n_a x n_p semi-unitary
  std::vector<Mat> family;  // n_p x n_p unitaries
};

// q1 seeded random semi-unitary; family = DFT-phase diagonal unitaries
// diag(exp(j 2 pi l k / n_p)), k = 0..n_p-1.
BaselineConfig default_baseline(int n_a, int n_p, uint64_t seed);

// q1 as n_a*n_p re,im rows; family as n_family blocks of n_p*n_p re,im rows.
BaselineConfig baseline_from_csv(std::istream& q1_csv, std::istream& fam_csv,
                                 int n_a, int n_p);

Mat baseline_q(const BaselineConfig& cfg, int t);  // t is 1-based

HermitianPsd baseline_reconstruct(const std::vector<FeedbackRecord>& records,
                                  const Codebook& cb, int t_count);

}  // namespace ccm
