#include "ccm/scenario.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

#include "ccm/hermlin.hpp"
#include "ccm/types.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ccm;

TEST_CASE("single-path single-antenna-ue channel is rank one") {
  GroundTruth gt = synth_channel(4, 1, 1, 3);
  CHECK(numerical_rank(gt.c_star) == 1);
  CHECK(gt.c_star.trace() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("covariance rank equals the ue antenna count") {
  GroundTruth gt = synth_channel(32, 2, 20, 5);
  CHECK(numerical_rank(gt.c_star) == 2);
  CHECK(gt.d == doctest::Approx(herm_evd(gt.c_star).eigvals[0]));
}

TEST_CASE("synthetic covariance invariants over many seeds") {
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    GroundTruth gt = synth_channel(8, 2, 20, seed);
    CHECK(gt.c_star.trace() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(herm_deviation(gt.c_star.mat()) <= 1e-10);
    validate_psd(gt.c_star);  // throws on failure
    HermEvd e = herm_evd(gt.c_star);
    int big = 0;
    for (int i = 0; i < 8; ++i)
      if (e.eigvals[i] > 1e-8 * e.eigvals[0]) ++big;
    CHECK(big == 2);
    // c_star really is h^H h: the channel was rescaled at synthesis.
    CHECK((gt.chan.h.adjoint() * gt.chan.h - gt.c_star.mat()).norm() <= 1e-10);
  }
}

TEST_CASE("synth_channel is deterministic and validates shapes") {
  GroundTruth a = synth_channel(6, 2, 10, 42);
  GroundTruth b = synth_channel(6, 2, 10, 42);
  CHECK((a.chan.h - b.chan.h).norm() == 0.0);
  CHECK_THROWS_AS(synth_channel(4, 5, 8, 1), Error);   // n_u > n_a
  CHECK_THROWS_AS(synth_channel(8, 2, 1, 1), Error);   // too few paths
  CHECK_THROWS_AS(synth_channel(0, 1, 4, 1), Error);
}

TEST_CASE("historical ccm interpolates from the truth") {
  GroundTruth gt = synth_channel(8, 1, 20, 9);
  HermitianPsd exact = historical_ccm(gt, 0.0, 17);
  CHECK((exact.mat() - gt.c_star.mat()).norm() <= 1e-12);

  HermitianPsd rough = historical_ccm(gt, 0.1, 17);
  CHECK((rough.mat() - gt.c_star.mat()).norm() > 1e-4);
  CHECK(rough.trace() == doctest::Approx(1.0).epsilon(1e-9));
  validate_psd(rough);
}

TEST_CASE("historical distortion grows with the perturbation") {
  const double levels[] = {0.0, 0.05, 0.1, 0.2, 0.5};
  std::vector<double> med;
  for (double p : levels) {
    std::vector<double> dists;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
      GroundTruth gt = synth_channel(8, 1, 20, seed);
      dists.push_back((historical_ccm(gt, p, seed + 100).mat() -
                       gt.c_star.mat()).norm());
    }
    std::sort(dists.begin(), dists.end());
    med.push_back(dists[dists.size() / 2]);
  }
  for (size_t i = 1; i < med.size(); ++i) CHECK(med[i] >= med[i - 1]);
}

TEST_CASE("normalize_trace is idempotent") {
  Rng rng(21);
  HermitianPsd c = tu::random_pd(5, rng);
  HermitianPsd once = normalize_trace(c);
  HermitianPsd twice = normalize_trace(once);
  CHECK(once.trace() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((twice.mat() - once.mat()).norm() <= 1e-14 * once.mat().norm());
  CHECK_THROWS_AS(normalize_trace(HermitianPsd(Mat(Mat::Zero(3, 3)))), Error);
}

TEST_CASE("ccm csv round trip") {
  Rng rng(33);
  HermitianPsd c = tu::random_pd(4, rng);
  std::istringstream in(ccm_csv(c));
  HermitianPsd back = read_ccm_csv(in);
  CHECK((back.mat() - c.mat()).norm() <= 1e-9 * (1.0 + c.mat().norm()));
}

TEST_CASE("ccm csv rejects malformed input") {
  std::istringstream junk("not,a\nnumber,really\n");
  CHECK_THROWS_AS(read_ccm_csv(junk), Error);
  std::istringstream short3("1,0\n0,0\n1,0\n");  // 3 rows, not a square count
  bool threw = false;
  try {
    read_ccm_csv(short3);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == ErrorCode::kIoError);
  }
  CHECK(threw);
}

TEST_CASE("ground truth rebuilt from an imported covariance") {
  Rng rng(55);
  HermitianPsd c = tu::random_psd_rank(6, 2, rng);
  GroundTruth gt = ground_truth_from_ccm(c);
  CHECK(gt.c_star.trace() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((gt.chan.h.adjoint() * gt.chan.h - gt.c_star.mat()).norm() <= 1e-10);
  CHECK(gt.chan.h.rows() == 2);  // one synthetic ue antenna per active mode
  CHECK(gt.d == doctest::Approx(herm_evd(gt.c_star).eigvals[0]).epsilon(1e-10));
}
