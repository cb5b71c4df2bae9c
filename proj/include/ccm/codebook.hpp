#pragma once

#include <string>

#include "ccm/types.hpp"

namespace ccm {

// Oversampled-DFT beam codebook: word m has entries
// exp(j 2 pi k m / (n_p * oversampling)) / sqrt(n_p), k = 0..n_p-1.
// Orthonormal DFT at oversampling = 1.
struct Codebook {
  int n_p = 0;
  Mat words;  // n_p x M, columns are unit-norm codewords

  int size() const { return static_cast<int>(words.cols()); }
  Vec word(int m) const { return words.col(m); }
};

// seed is accepted for interface stability with stochastic codebook
// constructions; the DFT grid itself is deterministic.
Codebook build_codebook(int n_p, int oversampling, uint64_t seed = 0);

// One row per codeword: m, then re/im for each entry.
std::string codebook_csv(const Codebook& cb);

}  // namespace ccm
