#include "ccm/codebook.hpp"

#include <cmath>

#include "ccm/csvio.hpp"

namespace ccm {

Codebook build_codebook(int n_p, int oversampling, uint64_t /*seed*/) {
  if (n_p < 1 || oversampling < 1) {
    fail(ErrorCode::kConfigError, "n_p and oversampling must be positive");
  }
  const int m_total = n_p * oversampling;
  if (m_total < 2) {
    fail(ErrorCode::kTooFewCodewords, "need at least 2 codewords");
  }
  Codebook cb;
  cb.n_p = n_p;
  cb.words = Mat(n_p, m_total);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_p));
  for (int m = 0; m < m_total; ++m) {
    for (int k = 0; k < n_p; ++k) {
      const double phase = 2.0 * M_PI * k * m / static_cast<double>(m_total);
      cb.words(k, m) = scale * cxd(std::cos(phase), std::sin(phase));
    }
  }
  return cb;
}

std::string codebook_csv(const Codebook& cb) {
  std::string out = "m";
  for (int k = 0; k < cb.n_p; ++k) {
    out += ",re" + std::to_string(k) + ",im" + std::to_string(k);
  }
  out += "\n";
  for (int m = 0; m < cb.size(); ++m) {
    out += std::to_string(m);
    for (int k = 0; k < cb.n_p; ++k) {
      out += "," + fmt_g12(cb.words(k, m).real());
      out += "," + fmt_g12(cb.words(k, m).imag());
    }
    out += "\n";
  }
  return out;
}

}  // namespace ccm
