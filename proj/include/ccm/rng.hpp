#pragma once

#include <cstdint>

#include "ccm/types.hpp"

namespace ccm {

// Deterministic counter-style RNG (SplitMix64 core). All randomness in the
// library flows through this so that runs are reproducible across platforms;
// the standard <random> distributions are implementation-defined and are
// deliberately not used.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0);

  uint64_t next();
  double uniform();      // [0, 1)
  double uniform_pos();  // (0, 1]
  double normal();       // N(0, 1), Box-Muller
  cxd cnormal();         // CN(0, 1): unit total variance
  int index(int n);      // uniform in [0, n)

  // Deterministic child seed for ops that take a bare seed argument.
  uint64_t derive(uint64_t tag);

 private:
  uint64_t s_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

Mat random_gaussian(int rows, int cols, Rng& rng);
// QR-based with phases pinned by the R diagonal; columns orthonormal.
Mat random_semi_unitary(int rows, int cols, Rng& rng);
Mat random_unitary(int n, Rng& rng);

}  // namespace ccm
