#include "ccm/baseline.hpp"

#include <sstream>

#include "ccm/csvio.hpp"
#include "ccm/feedback.hpp"
#include "ccm/hermlin.hpp"
#include "ccm/scenario.hpp"
#include "ccm/types.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ccm;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string mat_rows_csv(const Mat& m) {
  std::string out;
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      out += fmt_g12(m(i, j).real()) + "," + fmt_g12(m(i, j).imag()) + "\n";
    }
  }
  return out;
}
}  // namespace

TEST_CASE("first baseline round uses q1 unchanged") {
  BaselineConfig cfg = default_baseline(6, 3, 5);
  CHECK((cfg.family[0] - Mat::Identity(3, 3)).norm() <= 1e-12);
  CHECK((baseline_q(cfg, 1) - cfg.q1).norm() <= 1e-12);
}

TEST_CASE("baseline schedule is cyclic") {
  BaselineConfig cfg = default_baseline(8, 4, 9);
  for (int t = 1; t <= 4; ++t) {
    CHECK((baseline_q(cfg, t) - baseline_q(cfg, t + 4)).norm() == 0.0);
  }
  CHECK_THROWS_AS(baseline_q(cfg, 0), Error);
}

TEST_CASE("phase cycling preserves column norms") {
  BaselineConfig cfg = default_baseline(8, 4, 11);
  RealVec ref(4);
  for (int j = 0; j < 4; ++j) ref[j] = cfg.q1.col(j).norm();
  for (int t = 1; t <= 8; ++t) {
    Mat q = baseline_q(cfg, t);
    for (int j = 0; j < 4; ++j)
      CHECK(q.col(j).norm() == doctest::Approx(ref[j]).epsilon(1e-12));
    CHECK(tu::is_semi_unitary(q, 1e-9));
  }
}

TEST_CASE("construction rejects non-unitary pieces") {
  BaselineConfig good = default_baseline(6, 2, 3);
  Mat q_bad = 2.0 * good.q1;  // right shape, wrong scale
  std::string fam;
  for (const auto& f : good.family) fam += mat_rows_csv(f);
  std::istringstream q1_in(mat_rows_csv(q_bad));
  std::istringstream fam_in(fam);
  bool threw = false;
  try {
    baseline_from_csv(q1_in, fam_in, 6, 2);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == ErrorCode::kConfigError);
  }
  CHECK(threw);
}

TEST_CASE("single-record reconstruction is a scaled beam") {
  Codebook cb = build_codebook(2, 1);
  FeedbackRecord rec;
  rec.t = 1;
  rec.q = Mat::Identity(4, 2);
  rec.m0 = 0;
  rec.eta = 1.0;
  HermitianPsd c = baseline_reconstruct({rec}, cb, 1);
  CHECK(numerical_rank(c) == 1);
  CHECK(c.trace() == doctest::Approx(1.0).epsilon(1e-12));

  // Two identical rounds averaged over two rounds give the same estimate.
  HermitianPsd c2 = baseline_reconstruct({rec, rec}, cb, 2);
  CHECK((c2.mat() - c.mat()).norm() <= 1e-12);
}

TEST_CASE("reconstruction matches a direct resummation") {
  Codebook cb = build_codebook(2, 4);
  GroundTruth gt = synth_channel(6, 1, 12, 3);
  BaselineConfig cfg = default_baseline(6, 2, 7);
  std::vector<FeedbackRecord> recs;
  for (int t = 1; t <= 9; ++t) {
    recs.push_back(feedback_round(gt, baseline_q(cfg, t), cb, kInf, t, t));
  }
  HermitianPsd c = baseline_reconstruct(recs, cb, 9);
  Mat direct = Mat::Zero(6, 6);
  for (const auto& r : recs) {
    Vec qv = r.q * cb.word(r.m0);
    direct += r.eta * qv * qv.adjoint();
  }
  direct /= 9.0;
  CHECK((c.mat() - direct).norm() <= 1e-12);
  validate_psd(c);
  CHECK(numerical_rank(c) <= std::min(9, 6));
}

TEST_CASE("reconstruction rank is capped by the round count") {
  Codebook cb = build_codebook(2, 4);
  GroundTruth gt = synth_channel(8, 2, 16, 13);
  BaselineConfig cfg = default_baseline(8, 2, 17);
  std::vector<FeedbackRecord> recs;
  for (int t = 1; t <= 3; ++t) {
    recs.push_back(feedback_round(gt, baseline_q(cfg, t), cb, kInf, t, t));
  }
  HermitianPsd c = baseline_reconstruct(recs, cb, 3);
  CHECK(numerical_rank(c) <= 3);
  CHECK_THROWS_AS(baseline_reconstruct({}, cb, 1), Error);
}

TEST_CASE("baseline csv round trip") {
  BaselineConfig cfg = default_baseline(5, 2, 23);
  std::string fam;
  for (const auto& f : cfg.family) fam += mat_rows_csv(f);
  std::istringstream q1_in(mat_rows_csv(cfg.q1));
  std::istringstream fam_in(fam);
  BaselineConfig back = baseline_from_csv(q1_in, fam_in, 5, 2);
  CHECK((back.q1 - cfg.q1).norm() <= 1e-9);
  REQUIRE(back.family.size() == cfg.family.size());
  for (size_t i = 0; i < cfg.family.size(); ++i) {
    CHECK((back.family[i] - cfg.family[i]).norm() <= 1e-9);
  }

  std::istringstream bad_q1("1,0\n");
  std::istringstream bad_fam("");
  CHECK_THROWS_AS(baseline_from_csv(bad_q1, bad_fam, 5, 2), Error);
}
