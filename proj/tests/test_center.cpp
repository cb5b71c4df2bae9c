#include "ccm/center.hpp"

#include <cmath>
#include <vector>

#include "ccm/codebook.hpp"
#include "ccm/feedback.hpp"
#include "ccm/hermlin.hpp"
#include "ccm/scenario.hpp"
#include "ccm/types.hpp"
#include "ccm/wmd.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ccm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<FeedbackRecord> make_records(const GroundTruth& gt,
                                         const Codebook& cb, int rounds,
                                         uint64_t seed, bool square_q = false) {
  Rng rng(seed, 0x74657374ULL);
  std::vector<FeedbackRecord> recs;
  const int n_a = gt.c_star.dim();
  for (int t = 1; t <= rounds; ++t) {
    Mat q = square_q ? random_unitary(n_a, rng)
                     : random_semi_unitary(n_a, cb.n_p, rng);
    recs.push_back(feedback_round(gt, q, cb, kInf, t, seed * 131 + t));
  }
  return recs;
}

double inner(const Mat& a, const Mat& b) {
  return (a.adjoint() * b).trace().real();
}

}  // namespace

TEST_CASE("stage gradient matches central finite differences") {
  GroundTruth gt = synth_channel(3, 1, 5, 9);
  Codebook cb = build_codebook(2, 2);
  auto recs = make_records(gt, cb, 2, 4);

  CenterConfig cfg;
  cfg.a = 0.05;
  cfg.b = 1.5;
  CenterEvaluator ev(recs, cb, cfg);
  RealVec nu(2);
  nu << 0.1, -0.2;
  ev.set_stage(0.3, 7.0, nu);

  Mat c0 = 0.6 * gt.c_star.mat() + 0.15 * Mat::Identity(3, 3);
  REQUIRE(ev.value(c0) > -kInf);

  Rng rng(17);
  const double h = 1e-5;
  int checked = 0;
  for (int attempt = 0; attempt < 400 && checked < 50; ++attempt) {
    Mat c = c0 + 0.005 * tu::random_hermitian(3, rng);
    if (ev.value(c) == -kInf) continue;
    Mat grad;
    ev.value_and_grad(c, &grad);
    for (int dir = 0; dir < 4; ++dir) {
      Mat e = tu::random_hermitian(3, rng);
      e /= e.norm();
      const double fp = ev.value(c + h * e);
      const double fm = ev.value(c - h * e);
      if (fp == -kInf || fm == -kInf) continue;
      const double num = (fp - fm) / (2.0 * h);
      const double ana = inner(grad, e);
      CHECK(std::abs(num - ana) <= 1e-5 * (1.0 + std::abs(ana)));
    }
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("evaluator rejects out-of-domain points") {
  GroundTruth gt = synth_channel(3, 1, 5, 10);
  Codebook cb = build_codebook(2, 2);
  auto recs = make_records(gt, cb, 1, 6);
  CenterConfig cfg;
  CenterEvaluator ev(recs, cb, cfg);
  ev.set_stage(0.1, 1.0, RealVec::Zero(1));
  CHECK(ev.value(Mat(2.0 * Mat::Identity(3, 3))) == -kInf);  // trace > b
  Mat indef = Mat::Identity(3, 3);
  indef(0, 0) = -1.0;
  CHECK(ev.value(indef) == -kInf);
  CHECK_THROWS_AS(ev.set_stage(0.1, 1.0, RealVec::Zero(3)), Error);
}

TEST_CASE("plain objective is concave along segments") {
  GroundTruth gt = synth_channel(3, 1, 5, 11);
  Codebook cb = build_codebook(2, 2);
  auto recs = make_records(gt, cb, 2, 5);
  CenterConfig cfg;
  cfg.b = 2.0;
  CenterEvaluator ev(recs, cb, cfg);
  ev.set_stage(1e-8, 0.0, RealVec::Zero(2));

  Mat base = 0.6 * gt.c_star.mat() + 0.15 * Mat::Identity(3, 3);
  Rng rng(23);
  int done = 0;
  for (int attempt = 0; attempt < 400 && done < 50; ++attempt) {
    Mat c1 = base + 0.01 * tu::random_hermitian(3, rng);
    Mat c2 = base + 0.01 * tu::random_hermitian(3, rng);
    const double f1 = ev.cmo_objective(c1);
    const double f2 = ev.cmo_objective(c2);
    if (f1 == -kInf || f2 == -kInf) continue;
    const double theta = 0.2 + 0.6 * rng.uniform();
    const double fm = ev.cmo_objective(theta * c1 + (1.0 - theta) * c2);
    CHECK(fm >= theta * f1 + (1.0 - theta) * f2 - 1e-9);
    ++done;
  }
  CHECK(done == 50);
}

TEST_CASE("no feedback yields the scaled identity") {
  Codebook cb = build_codebook(2, 1);
  CenterConfig cfg;
  cfg.lambda = 0.0;
  cfg.a = 0.0;
  cfg.b = 1.0;
  HermitianPsd warm(Mat(0.2 * Mat::Identity(4, 4)));
  CenterSolution sol = analytic_center({}, cb, cfg, &warm);
  CHECK(sol.converged);
  CHECK((sol.c_hat.mat() - 0.25 * Mat::Identity(4, 4)).cwiseAbs().maxCoeff() <=
        1e-6);
  CHECK(sol.eq_residual == 0.0);
}

TEST_CASE("square unitary round with aligned rank-one truth") {
  // The feasible set collapses to the single matrix (q v)(q v)^H here: the
  // CQI equality pins the full trace budget onto one beam.
  Codebook cb = build_codebook(2, 1);
  Rng rng(29);
  Mat q = random_unitary(2, rng);
  Vec beam = q * cb.word(1);
  GroundTruth gt = ground_truth_from_ccm(HermitianPsd::trusted(
      Mat(beam * beam.adjoint())));
  FeedbackRecord rec = feedback_round(gt, q, cb, kInf, 1, 7);
  REQUIRE(rec.m0 == 1);
  REQUIRE(rec.eta == doctest::Approx(1.0).epsilon(1e-12));

  CenterConfig cfg;
  const double a_raw = lower_bound_a({rec}, cb);
  CHECK(a_raw == doctest::Approx(1.0).epsilon(1e-10));
  cfg.a = std::min(a_raw, 0.999 * cfg.b);
  CenterSolution sol = analytic_center({rec}, cb, cfg);
  // The optimum is on the psd boundary, so the barrier floor limits how
  // tightly the equality can be met; 1e-6 leaves a 5x margin over measured.
  CHECK(sol.eq_residual <= 1e-6);
  CHECK((sol.c_hat.mat() - beam * beam.adjoint()).norm() <= 1e-3);
  FeasibilityReport rep =
      feasibility_check(sol.c_hat, {rec}, cb, cfg.a, cfg.b, 1e-5);
  CHECK(rep.pass);
}

TEST_CASE("solver output passes its own audit") {
  GroundTruth gt = synth_channel(4, 1, 10, 31);
  Codebook cb = build_codebook(2, 4);
  auto recs = make_records(gt, cb, 5, 8);
  CenterConfig cfg;
  cfg.a = std::min(lower_bound_a(recs, cb), 0.999 * cfg.b);

  std::vector<FeedbackRecord> prefix;
  HermitianPsd warm;
  CenterSolution sol;
  for (int t = 0; t < 5; ++t) {
    prefix.push_back(recs[t]);
    CenterConfig step = cfg;
    step.a = std::min(lower_bound_a(prefix, cb), 0.999 * cfg.b);
    sol = analytic_center(prefix, cb, step, t == 0 ? nullptr : &warm);
    CHECK(sol.converged);
    CHECK(sol.eq_residual <= step.eq_tol);
    CHECK(sol.min_slack > 0.0);
    FeasibilityReport rep =
        feasibility_check(sol.c_hat, prefix, cb, step.a, step.b, 1e-7);
    CHECK(rep.pass);
    warm = sol.c_hat;
  }

  // Passing the audit against all rounds implies passing against any prefix.
  for (size_t k = 1; k <= prefix.size(); ++k) {
    std::vector<FeedbackRecord> head(prefix.begin(), prefix.begin() + k);
    CenterConfig step = cfg;
    step.a = std::min(lower_bound_a(head, cb), 0.999 * cfg.b);
    CHECK(feasibility_check(sol.c_hat, head, cb, step.a, step.b, 1e-7).pass);
  }

  // Nuclear norm of a psd solution is its trace.
  CHECK(nuclear_norm(sol.c_hat) ==
        doctest::Approx(sol.c_hat.trace()).epsilon(1e-9));
}

TEST_CASE("solver is deterministic") {
  GroundTruth gt = synth_channel(4, 1, 10, 37);
  Codebook cb = build_codebook(2, 4);
  auto recs = make_records(gt, cb, 3, 12);
  CenterConfig cfg;
  cfg.a = std::min(lower_bound_a(recs, cb), 0.999 * cfg.b);
  CenterSolution s1 = analytic_center(recs, cb, cfg);
  CenterSolution s2 = analytic_center(recs, cb, cfg);
  CHECK((s1.c_hat.mat() - s2.c_hat.mat()).norm() == 0.0);
}

TEST_CASE("designed rounds with flat spectra start on the cut boundary") {
  // With an equality sigma profile the next round's cuts all have zero slack
  // at the previous center, so the warm start needs interior repair.
  GroundTruth gt = synth_channel(4, 1, 10, 41);
  Codebook cb = build_codebook(2, 4);
  CenterConfig cfg;
  Rng rng(43);

  std::vector<FeedbackRecord> recs;
  Mat q = random_semi_unitary(4, 2, rng);
  HermitianPsd warm;
  for (int t = 1; t <= 4; ++t) {
    recs.push_back(feedback_round(gt, q, cb, kInf, t, 900 + t));
    CenterConfig step = cfg;
    step.a = std::min(lower_bound_a(recs, cb), 0.999 * cfg.b);
    CenterSolution sol =
        analytic_center(recs, cb, step, t == 1 ? nullptr : &warm);
    CHECK(feasibility_check(sol.c_hat, recs, cb, step.a, step.b, 1e-7).pass);
    warm = sol.c_hat;

    WmdContext ctx;
    ctx.c_hat = sol.c_hat;
    WmdStrategies strat;
    strat.sigma = SigmaStrategy::kEquality;
    strat.m_prime = MPrimeStrategy::kRandom;
    QDesign d = design_q(ctx, strat, cb, rng);
    q = d.q;
  }
}

TEST_CASE("contradictory equalities are reported infeasible") {
  GroundTruth gt = synth_channel(3, 1, 6, 47);
  Codebook cb = build_codebook(2, 2);
  auto recs = make_records(gt, cb, 1, 3);
  FeedbackRecord clone = recs[0];
  clone.t = 2;
  clone.eta = recs[0].eta + 0.5;  // same beam, incompatible power
  recs.push_back(clone);
  CenterConfig cfg;
  bool threw = false;
  try {
    analytic_center(recs, cb, cfg);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == ErrorCode::kInfeasible);
  }
  CHECK(threw);
}

TEST_CASE("vacuous cuts are dropped and counted") {
  GroundTruth gt = synth_channel(4, 1, 10, 53);
  Codebook cb = build_codebook(2, 2);  // M = 4
  Rng rng(59);
  auto recs = make_records(gt, cb, 1, 15);

  // A weighting with a dead second column maps every codeword to the same
  // ray: all of this record's cuts are identically zero.
  Mat q2 = Mat::Zero(4, 2);
  q2.col(0) = random_gaussian(4, 1, rng).col(0).normalized();
  HermitianPsd r2(Mat(q2.adjoint() * gt.c_star.mat() * q2));
  FeedbackRecord tie;
  tie.t = 2;
  tie.q = q2;
  tie.m0 = compute_pmi(r2, cb);
  tie.eta = compute_cqi(r2, cb.word(tie.m0));
  CHECK(tie.m0 == 0);  // exact tie resolves to the lowest index
  recs.push_back(tie);

  CenterConfig cfg;
  CenterEvaluator ev(recs, cb, cfg);
  CHECK(ev.kept_terms() == 3);
  CHECK(ev.dropped_terms() == 3);

  cfg.a = std::min(lower_bound_a(recs, cb), 0.999 * cfg.b);
  CenterSolution sol = analytic_center(recs, cb, cfg);
  CHECK(sol.dropped_terms == 3);
  CHECK(sol.eq_residual <= cfg.eq_tol);
}

TEST_CASE("zero-cqi records keep equalities but lose their cuts") {
  Codebook cb = build_codebook(2, 2);
  GroundTruth gt = synth_channel(4, 1, 10, 61);
  auto recs = make_records(gt, cb, 1, 19);
  FeedbackRecord dead = recs[0];
  dead.t = 2;
  dead.eta = 0.0;  // 1/eta weights are undefined; cuts must be dropped
  recs.push_back(dead);
  CenterConfig cfg;
  CenterEvaluator ev(recs, cb, cfg);
  CHECK(ev.kept_terms() == 3);
  CHECK(ev.dropped_terms() == 3);
}

TEST_CASE("trace lower bound from the feedback") {
  Codebook cb = build_codebook(2, 1);
  FeedbackRecord rec;
  rec.t = 1;
  rec.q = Mat::Identity(4, 2);
  rec.m0 = 1;
  rec.eta = 0.4;
  CHECK(lower_bound_a({rec}, cb) == doctest::Approx(0.4).epsilon(1e-12));

  FeedbackRecord zero = rec;
  zero.q = Mat::Zero(4, 2);
  zero.eta = 0.0;
  CHECK(lower_bound_a({zero}, cb) == 0.0);  // degenerate rounds are skipped
}

TEST_CASE("trace lower bound is sound and monotone") {
  Codebook cb = build_codebook(2, 4);
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    GroundTruth gt = synth_channel(6, 1 + (seed % 2), 20, seed);
    auto recs = make_records(gt, cb, 3, seed);
    double prev = 0.0;
    for (size_t k = 1; k <= recs.size(); ++k) {
      std::vector<FeedbackRecord> head(recs.begin(), recs.begin() + k);
      const double a = lower_bound_a(head, cb);
      CHECK(a >= prev);
      CHECK(a <= 1.0 + 1e-9);  // the generator has unit trace
      prev = a;
    }
  }
}

TEST_CASE("trace upper bounds by mode") {
  CHECK(upper_bound_b_trace() == 1.0);
  CHECK(upper_bound_b_frob(2) == 2.0);
  CHECK_THROWS_AS(upper_bound_b_frob(0), Error);

  Codebook cb = build_codebook(4, 4);
  int inside = 0;
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    GroundTruth gt = synth_channel(8, 2, 20, seed);
    auto recs = make_records(gt, cb, 1, seed);
    const double b =
        upper_bound_b_historical(gt.c_star, cb, recs[0], 2, 64, seed);
    CHECK(b > 0.0);
    const double target = 2.0 * gt.d;
    if (b >= 0.3 * target && b <= 4.0 * target) ++inside;
  }
  CHECK(inside == 50);
}

TEST_CASE("feasibility check accepts the generator and rejects zero") {
  GroundTruth gt = synth_channel(4, 2, 10, 67);
  Codebook cb = build_codebook(2, 4);
  auto recs = make_records(gt, cb, 4, 21);
  const double a = std::min(lower_bound_a(recs, cb), 0.999);
  FeasibilityReport ok = feasibility_check(gt.c_star, recs, cb, a, 1.0, 1e-8);
  CHECK(ok.pass);
  CHECK(ok.trace == doctest::Approx(1.0).epsilon(1e-12));

  FeasibilityReport zero =
      feasibility_check(HermitianPsd(Mat(Mat::Zero(4, 4))), recs, cb, 0.0,
                        1.0, 1e-8);
  CHECK_FALSE(zero.pass);
  CHECK(zero.worst_c2_residual > 1e-8);
}

TEST_CASE("solver trace records the continuation path") {
  GroundTruth gt = synth_channel(4, 1, 10, 71);
  Codebook cb = build_codebook(2, 4);
  auto recs = make_records(gt, cb, 2, 25);
  CenterConfig cfg;
  cfg.a = std::min(lower_bound_a(recs, cb), 0.999 * cfg.b);
  std::vector<SolverTraceRow> rows;
  CenterSolution sol = analytic_center(recs, cb, cfg, nullptr, &rows);
  REQUIRE_FALSE(rows.empty());
  for (size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].stage >= rows[i - 1].stage);
    CHECK(rows[i].mu <= rows[i - 1].mu + 1e-15);
  }
  CHECK(rows.back().eq_residual <= 1e-5);
  CHECK(sol.newton_iters >= static_cast<int>(rows.size()));
}
