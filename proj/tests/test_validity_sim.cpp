#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "pacbound/binary_kl.hpp"
#include "pacbound/mutual_info.hpp"
#include "pacbound/rng.hpp"
#include "pacbound/validity_sim.hpp"

using namespace pacb;

namespace {

FiniteLearningProblem problem_a() {
  FiniteLearningProblem pb;
  pb.z_probs = {0.3, 0.7};
  pb.m = 2;
  pb.loss = {{0.0, 1.0}, {1.0, 0.0}, {0.5, 0.2}};
  pb.beta = 1.5;
  return pb;
}

FiniteLearningProblem problem_b() {
  FiniteLearningProblem pb;
  pb.z_probs = {0.5, 0.5};
  pb.m = 2;
  pb.loss = {{0.0, 1.0}, {1.0, 0.0}};
  pb.beta = 2.0;
  return pb;
}

// three-outcome space with two reference priors, still fully enumerable
FiniteLearningProblem problem_c() {
  FiniteLearningProblem pb;
  pb.z_probs = {0.2, 0.3, 0.5};
  pb.m = 5;
  pb.loss = {{0.0, 0.4, 1.0}, {1.0, 0.1, 0.3}, {0.5, 0.9, 0.0}};
  pb.beta = 1.0;
  pb.priors = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, {0.6, 0.3, 0.1}};
  return pb;
}

const std::vector<BoundKind> kAllKinds = {
    BoundKind::thm2_alpha2, BoundKind::thm3_lambda,
    BoundKind::corollary5_analog, BoundKind::thm8, BoundKind::seeger_mi};

}  // namespace

TEST_CASE("binomial moment, exact and against the long-double oracle") {
  // equality at m = 1, p = 1/2: both outcomes give e^{kl} = 2
  CHECK(maurer_exact(1, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(maurer_exact(1, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(maurer_exact(1, 1.0) == doctest::Approx(1.0).epsilon(1e-14));

  for (int m : {1, 5, 17, 50}) {
    for (double p : {0.0, 0.13, 0.5, 0.77, 1.0}) {
      double got = maurer_exact(m, p);
      double want = oracle::maurer_exact_ld(m, p);
      CHECK(oracle::rel_err(got, want) < 1e-12);
      CHECK(got <= 2.0 * std::sqrt(static_cast<double>(m)) + 1e-9);
    }
  }

  // frozen grid maximum at m = 25
  std::vector<MaurerRow> rows = maurer_check(25);
  REQUIRE(rows.size() == 25);
  CHECK(rows.back().m == 25);
  CHECK(rows.back().max_moment ==
        doctest::Approx(6.9529791062452591333).epsilon(1e-12));
  CHECK(rows.back().bound == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("binomial moment cap holds for every m up to 50") {
  std::vector<MaurerRow> rows = maurer_check(50);
  REQUIRE(rows.size() == 50);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const MaurerRow& r = rows[i];
    CHECK(r.m == static_cast<int>(i) + 1);
    CHECK(r.pass);
    CHECK(r.max_moment > 1.0);
    CHECK(r.max_moment <= r.bound + 1e-9);
    CHECK(r.bound ==
          doctest::Approx(2.0 * std::sqrt(r.m + 0.0)).epsilon(1e-14));
  }
}

TEST_CASE("moment term by enumeration") {
  FiniteLearningProblem pb = problem_a();

  // frozen ln E_S E_h e^{m kl} under the (uniform) first prior
  double lm = moment_term(pb, 2.0);
  CHECK(lm == doctest::Approx(0.70104963886310459235).epsilon(1e-12));
  // the default integrand does not depend on alpha
  CHECK(moment_term(pb, 4.0) == doctest::Approx(lm).epsilon(1e-13));
  // never above the binomial moment cap
  CHECK(lm <= std::log(2.0 * std::sqrt(2.0)) + 1e-12);

  // a custom phi equal to the default one must reproduce it: at alpha = 2
  // the lifted power is phi^2 with phi = e^{(m/2) kl}
  double via_phi = moment_term(
      pb, 2.0, [&](int h, const std::vector<int>& tuple) {
        return std::exp(0.5 * pb.m *
                        kl(pb.empirical_risk(h, tuple), pb.true_risk(h)));
      });
  CHECK(via_phi == doctest::Approx(lm).epsilon(1e-12));

  double flat = moment_term(
      pb, 2.0, [](int, const std::vector<int>&) { return 1.0; });
  CHECK(flat == doctest::Approx(0.0).epsilon(1e-13));

  // serial reference agrees with the parallel kernel
  CHECK(moment_term(pb, 2.0, {}, false) == lm);
}

TEST_CASE("moment term against a direct monte carlo estimate") {
  FiniteLearningProblem pb = problem_a();
  double lm = moment_term(pb, 2.0);
  double target = std::exp(lm);

  RngStream stream = make_stream(123, StreamPhase::mc_moment, 42);
  const int batches = 10;
  const int per_batch = 2000;
  std::vector<double> means(batches, 0.0);
  for (int b = 0; b < batches; ++b) {
    double sum = 0.0;
    for (int i = 0; i < per_batch; ++i) {
      std::vector<int> tuple = pb.sample_tuple(stream);
      int h = FiniteLearningProblem::sample_index(
          {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, stream.next_unit());
      sum += std::exp(pb.m *
                      kl(pb.empirical_risk(h, tuple), pb.true_risk(h)));
    }
    means[b] = sum / per_batch;
  }
  double mean = 0.0;
  for (double v : means) mean += v / batches;
  double var = 0.0;
  for (double v : means) var += (v - mean) * (v - mean) / (batches - 1);
  double se = std::sqrt(var / batches);
  CHECK(std::abs(mean - target) <= 3.0 * se + 1e-6);
}

TEST_CASE("99 percent binomial interval") {
  // frozen via 50-digit bisection on the beta tail quantiles
  auto [lo, hi] = clopper_pearson_99(3, 1000);
  CHECK(lo == doctest::Approx(0.00033814452906649326176).epsilon(1e-9));
  CHECK(hi == doctest::Approx(0.010933777420405242056).epsilon(1e-9));
  CHECK(lo < 3.0 / 1000.0);
  CHECK(hi > 3.0 / 1000.0);

  auto [lo0, hi0] = clopper_pearson_99(0, 1000);
  CHECK(lo0 == 0.0);
  CHECK(hi0 > 0.0);
  CHECK(hi0 < 0.01);

  auto [lon, hin] = clopper_pearson_99(1000, 1000);
  CHECK(hin == 1.0);
  CHECK(lon > 0.99);

  CHECK_THROWS_AS(clopper_pearson_99(-1, 10), std::invalid_argument);
  CHECK_THROWS_AS(clopper_pearson_99(11, 10), std::invalid_argument);
  CHECK_THROWS_AS(clopper_pearson_99(0, 0), std::invalid_argument);
}

TEST_CASE("exact violation probability stays within delta") {
  for (const FiniteLearningProblem& pb :
       {problem_a(), problem_b(), problem_c()}) {
    for (BoundKind kind : kAllKinds) {
      for (double delta : {0.05, 0.2}) {
        CoverageResult r = coverage_exact(pb, kind, delta);
        std::string kind_name = to_string(kind);
        CAPTURE(kind_name);
        CAPTURE(delta);
        CHECK(r.exact);
        CHECK(r.bound_kind == to_string(kind));
        CHECK(r.delta == delta);
        CHECK(r.trials > 0);
        CHECK(r.violations >= 0);
        CHECK(r.violations <= r.trials);
        CHECK(r.empirical_rate >= 0.0);
        CHECK(r.empirical_rate <= delta + 1e-12);
        CHECK(r.cp_lower == r.empirical_rate);
        CHECK(r.cp_upper == r.empirical_rate);
      }
    }
  }
}

TEST_CASE("exact rate matches a hand enumeration of the moment statement") {
  FiniteLearningProblem pb = problem_b();
  const double delta = 0.05;

  MiResult mi = sibson_mi(pb, 2.0);
  double lm = log_moment_enumerated(pb, mi.optimal_prior, 1.0);
  double threshold = mi.value + 2.0 * std::log(1.0 / delta) + lm;

  double mass = 0.0;
  long long violating = 0;
  for (std::size_t t = 0; t < pb.n_tuples(); ++t) {
    std::vector<int> tuple = pb.decode_tuple(t);
    double prob = pb.tuple_prob(tuple);
    if (prob <= 0.0) continue;
    std::vector<double> q = pb.posterior(tuple);
    for (int h = 0; h < pb.n_hyp(); ++h) {
      double stat =
          pb.m * kl(pb.empirical_risk(h, tuple), pb.true_risk(h));
      if (stat > threshold) {
        mass += prob * q[h];
        ++violating;
      }
    }
  }

  CoverageResult r = coverage_exact(pb, BoundKind::thm8, delta);
  CHECK(r.empirical_rate == doctest::Approx(mass).epsilon(1e-12));
  CHECK(r.violations == violating);
}

TEST_CASE("exact coverage kernels agree with their serial references") {
  FiniteLearningProblem pb = problem_c();
  for (BoundKind kind : kAllKinds) {
    CoverageResult par = coverage_exact(pb, kind, 0.1);
    CoverageResult ser = coverage_exact_serial(pb, kind, 0.1);
    CHECK(par.violations == ser.violations);
    CHECK(par.trials == ser.trials);
    CHECK(par.empirical_rate ==
          doctest::Approx(ser.empirical_rate).epsilon(1e-13));
  }
}

TEST_CASE("monte carlo coverage brackets the exact rate") {
  FiniteLearningProblem pb = problem_a();
  for (BoundKind kind : {BoundKind::thm2_alpha2, BoundKind::thm8}) {
    CoverageResult exact = coverage_exact(pb, kind, 0.2);
    CoverageResult mc = coverage(pb, kind, 0.2, 20000, 7);
    std::string kind_name = to_string(kind);
    CAPTURE(kind_name);
    CHECK_FALSE(mc.exact);
    CHECK(mc.trials == 20000);
    CHECK(mc.empirical_rate ==
          doctest::Approx(mc.violations / 20000.0).epsilon(1e-15));
    CHECK(mc.cp_lower <= exact.empirical_rate);
    CHECK(mc.cp_upper >= exact.empirical_rate);

    CoverageResult ser = coverage_serial(pb, kind, 0.2, 20000, 7);
    CHECK(ser.violations == mc.violations);
    CHECK(ser.empirical_rate == mc.empirical_rate);

    CoverageResult rerun = coverage(pb, kind, 0.2, 20000, 7);
    CHECK(rerun.violations == mc.violations);
  }
}

TEST_CASE("degenerate confidence level is still recorded") {
  FiniteLearningProblem pb = problem_b();
  CoverageResult r = coverage(pb, BoundKind::thm2_alpha2, 1.0, 500, 3);
  CHECK(r.delta == 1.0);
  CHECK(r.trials == 500);
  CHECK(r.empirical_rate >= 0.0);
  CHECK(r.empirical_rate <= 1.0);
  CHECK(r.cp_lower <= r.empirical_rate);
  CHECK(r.cp_upper >= r.empirical_rate);
}

TEST_CASE("coverage rejects bad arguments and oversized problems") {
  FiniteLearningProblem pb = problem_a();
  CHECK_THROWS_AS(coverage(pb, BoundKind::thm8, 0.0, 100, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(coverage(pb, BoundKind::thm8, 1.5, 100, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(coverage(pb, BoundKind::thm8, 0.1, 0, 1),
                  std::invalid_argument);

  FiniteLearningProblem big;
  big.z_probs = {0.5, 0.5};
  big.m = 30;
  big.loss = {{0.0, 1.0}, {1.0, 0.0}};
  // statement constants need full enumeration, so this must refuse
  CHECK_THROWS_AS(coverage(big, BoundKind::thm8, 0.1, 100, 1),
                  std::runtime_error);
  CHECK_THROWS_AS(coverage_exact(big, BoundKind::thm2_alpha2, 0.1),
                  std::runtime_error);
}

TEST_CASE("bound kind names round trip") {
  for (BoundKind kind : kAllKinds) {
    CHECK(bound_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(bound_kind_from_string("made_up"), std::invalid_argument);
}

TEST_CASE("coverage rows append to csv with a single header") {
  const std::string path = "validity_tmp_rows.csv";
  std::remove(path.c_str());

  FiniteLearningProblem pb = problem_b();
  CoverageResult a = coverage_exact(pb, BoundKind::thm8, 0.1);
  CoverageResult b = coverage_exact(pb, BoundKind::seeger_mi, 0.1);
  append_coverage_csv(path, {a, b});
  append_coverage_csv(path, {a});

  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  in.close();
  std::remove(path.c_str());

  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "bound_kind,delta,trials,violations,rate,cp_upper");
  CHECK(lines[1].find("thm8") == 0);
  CHECK(lines[2].find("seeger_mi") == 0);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    CHECK(std::count(lines[i].begin(), lines[i].end(), ',') == 5);
  }
}
