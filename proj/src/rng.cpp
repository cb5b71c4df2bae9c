#include "ccm/rng.hpp"

#include <cmath>

namespace ccm {
namespace {

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

Rng::Rng(uint64_t seed, uint64_t stream) {
  s_ = mix64(seed + kGolden) ^ mix64(stream * kGolden + 0x6a09e667f3bcc909ULL);
}

uint64_t Rng::next() {
  s_ += kGolden;
  return mix64(s_);
}

double Rng::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
  return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * M_PI * u2;
  spare_ = r * std::sin(th);
  have_spare_ = true;
  return r * std::cos(th);
}

cxd Rng::cnormal() {
  const double re = normal();
  const double im = normal();
  return cxd(re * M_SQRT1_2, im * M_SQRT1_2);
}

int Rng::index(int n) {
  // Lemire reduction; bias < n / 2^64 which is irrelevant here.
  const unsigned __int128 wide =
      static_cast<unsigned __int128>(next()) * static_cast<uint64_t>(n);
  return static_cast<int>(wide >> 64);
}

uint64_t Rng::derive(uint64_t tag) {
  return mix64(next() ^ mix64(tag * kGolden));
}

Mat random_gaussian(int rows, int cols, Rng& rng) {
  Mat out(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      out(i, j) = rng.cnormal();
    }
  }
  return out;
}

Mat random_semi_unitary(int rows, int cols, Rng& rng) {
  if (cols > rows) {
    fail(ErrorCode::kDimensionError, "semi-unitary needs rows >= cols");
  }
  const Mat g = random_gaussian(rows, cols, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(rows, cols);
  const Mat r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (int j = 0; j < cols; ++j) {
    const cxd d = r(j, j);
    const double ad = std::abs(d);
    if (ad > 0) q.col(j) *= d / ad;
  }
  return q;
}

Mat random_unitary(int n, Rng& rng) {
  return random_semi_unitary(n, n, rng);
}

}  // namespace ccm
