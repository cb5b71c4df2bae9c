#pragma once

#include <istream>
#include <string>

#include "ccm/types.hpp"

namespace ccm {

struct ChannelRealization {
  Mat h;                // n_u x n_a
  double sigma_e = 0.0; // per-entry estimation-error variance, set when used
};

struct GroundTruth {
  HermitianPsd c_star;  // h^H h, trace-normalized to 1
  ChannelRealization chan;
  double d = 0.0;       // largest eigenvalue of c_star
};

// Multipath ULA channel: h = sum_l g_l b_l a_l^H with half-wavelength
// steering vectors a_l, random unit receive vectors b_l and CN(0,1) gains.
// h is rescaled so that tr(h^H h) = 1 exactly, making c_star = h^H h.
GroundTruth synth_channel(int n_a, int n_u, int n_paths, uint64_t seed);

// Imperfect prior: trace-normalized c_star + perturbation * W W^H.
HermitianPsd historical_ccm(const GroundTruth& gt, double perturbation,
                            uint64_t seed);

HermitianPsd normalize_trace(const HermitianPsd& c);

// CSV round trip: n^2 rows of "re,im" in row-major order.
std::string ccm_csv(const HermitianPsd& c);
HermitianPsd read_ccm_csv(std::istream& in);

// Rebuild a rank-revealing h from an externally supplied covariance so the
// feedback path (which needs h for noise injection) works on imports too.
GroundTruth ground_truth_from_ccm(const HermitianPsd& c_star);

}  // namespace ccm
