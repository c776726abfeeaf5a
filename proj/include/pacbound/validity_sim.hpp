#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pacbound/mutual_info.hpp"

namespace pacb {

// Statements whose coverage the simulator can check, each in its literal
// kl-form on (S, h):
//   thm2_alpha2:       m kl <= 3 ln(2/d) + D2(Q_S||P) + ln E E e^{m kl}
//   thm3_lambda:       m kl <= 2 ln( l/2 e^{D2} + 8 e^{lm} / (2 l d^3) ) at a
//                      data-free l chosen from E_S D2(Q_S||P)
//   corollary5_analog: for all t, m kl <= D2(Q_S||P_t) + ln(16 T sqrt(m)/d^3)
//   thm8:              m kl <= I_alpha + (a/(a-1)) ln(1/d) + ln E E e^{m kl}
//                      with the moment under the Sibson prior
//   seeger_mi:         kl <= (1/m) [ I_alpha + ln(2 sqrt(m)/d^{a/(a-1)}) ]
enum class BoundKind {
  thm2_alpha2,
  thm3_lambda,
  corollary5_analog,
  thm8,
  seeger_mi
};

BoundKind bound_kind_from_string(const std::string& s);
std::string to_string(BoundKind kind);

struct CoverageResult {
  std::string bound_kind;
  double delta = 0.0;
  long long trials = 0;       // MC draws, or evaluated (S,h) pairs if exact
  long long violations = 0;
  double empirical_rate = 0.0;  // exact mode: the true violation probability
  double cp_lower = 0.0;        // 99% Clopper-Pearson; rate itself if exact
  double cp_upper = 1.0;
  bool exact = false;
};

// Monte Carlo coverage: draws S ~ D^m and h ~ Q_S per trial and counts
// violations of the kind's statement. Statement constants (moments, Sibson
// terms, lambda) are computed exactly by enumeration up front, so the
// problem must fit the enumeration cap in either mode.
CoverageResult coverage(const FiniteLearningProblem& problem, BoundKind kind,
                        double delta, long long trials, std::uint64_t seed,
                        double alpha = 2.0);
CoverageResult coverage_serial(const FiniteLearningProblem& problem,
                               BoundKind kind, double delta, long long trials,
                               std::uint64_t seed, double alpha = 2.0);

// Exact violation probability: sums D^m(S) Q_S(h) over violating pairs.
// Pairs whose tuple has zero sampling probability are skipped (they carry no
// mass and may hit 0 * inf indicators).
CoverageResult coverage_exact(const FiniteLearningProblem& problem,
                              BoundKind kind, double delta,
                              double alpha = 2.0);
CoverageResult coverage_exact_serial(const FiniteLearningProblem& problem,
                                     BoundKind kind, double delta,
                                     double alpha = 2.0);

// E_{K~Bin(m,p)} e^{m kl(K/m || p)} by exact log-domain enumeration; always
// <= 2 sqrt(m), with equality at m = 1, p = 1/2.
double maurer_exact(int m, double p);

struct MaurerRow {
  int m = 0;
  double max_moment = 0.0;  // over p in {0, 0.01, ..., 1}
  double bound = 0.0;       // 2 sqrt(m)
  bool pass = false;
};

std::vector<MaurerRow> maurer_check(int m_max);

// ln E_{S~D^m} E_{h~P_1} phi(h,S)^{alpha/(alpha-1)} by exact enumeration;
// the default phi = exp[(alpha-1)/alpha m kl(R_S||R_D)] makes the lifted
// integrand e^{m kl}, the quantity the Maurer constant caps.
double moment_term(const FiniteLearningProblem& problem, double alpha,
                   const PhiFn& phi = {}, bool parallel = true);

// two-sided 99% Clopper-Pearson interval for a binomial proportion
std::pair<double, double> clopper_pearson_99(long long successes,
                                             long long trials);

// appends rows (with a header when the file is new):
// bound_kind,delta,trials,violations,rate,cp_upper
void append_coverage_csv(const std::string& path,
                         const std::vector<CoverageResult>& rows);

}  // namespace pacb
