#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ccm/codebook.hpp"
#include "ccm/feedback.hpp"
#include "ccm/types.hpp"

namespace ccm {

// 10 log10( sqrt(||c_star - c_hat||_F^2 / n^2) ), floored at -300 dB.
double rmse_db(const HermitianPsd& c_star, const HermitianPsd& c_hat);

// w^H c_star w / lambda_max(c_star) for w the principal eigenvector of
// c_hat; in [0, 1] up to roundoff.
double beam_precision(const HermitianPsd& c_star, const HermitianPsd& c_hat);

// 10 log10(||h q||_F^2 / sigma_e); +inf when sigma_e = 0.
double ceq_db(const Mat& h, const Mat& q, double sigma_e);

// Cut-geometry diagnostics at an interior point c_tilde. For every record i
// and codeword m != m0(i), the cut matrix is
//   g_{m,i} = q_i (v_m0 v_m0^H - v_m v_m^H) q_i^H
// with weight w_{m,i} = 1 / (eta_i <g_{m,i}, c_tilde>). s_t sums the
// weights; mu(c) is the weighted mean of <g_{m,i}, c>. Terms whose slack at
// c_tilde is not positive are dropped and counted.
struct DiagnosticsRecord {
  double s_t = 0.0;
  std::map<std::string, double> mu_at;
  std::map<std::string, double> lemma1_bound_at;  // lambda * tr(c) / s_t
  int dropped_terms = 0;
};

DiagnosticsRecord volume_measure(
    const std::vector<FeedbackRecord>& records, const Codebook& cb,
    const HermitianPsd& c_tilde,
    const std::vector<std::pair<std::string, HermitianPsd>>& c_tests,
    double lambda);

}  // namespace ccm
