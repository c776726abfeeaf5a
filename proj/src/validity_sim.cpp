#include "pacbound/validity_sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>

#include "pacbound/binary_kl.hpp"
#include "pacbound/bounds.hpp"
#include "pacbound/parallel.hpp"

namespace pacb {
namespace {

// Tuple-independent pieces of a statement, enumerated once; the per-tuple
// test then reduces to a threshold on m * kl(R_S(h) || R_D(h)).
struct StatementContext {
  BoundKind kind;
  double delta = 0.05;
  double alpha = 2.0;
  double m = 1.0;
  std::vector<DiscreteMeasure> priors;
  std::vector<double> true_risks;
  double log_moment = 0.0;  // ln E E e^{m kl} under priors[0] or the Sibson P*
  double lambda = 0.0;      // thm3_lambda only
  double cor5_log = 0.0;    // ln(16 T sqrt(m)) - 3 ln(delta)
  double rhs_const = 0.0;   // thm8 / seeger_mi: the whole threshold
};

StatementContext make_context(const FiniteLearningProblem& pb, BoundKind kind,
                              double delta, double alpha) {
  pb.validate();
  if (!(delta > 0.0) || !(delta <= 1.0)) {
    throw std::invalid_argument("delta must lie in (0,1]");
  }
  StatementContext ctx;
  ctx.kind = kind;
  ctx.delta = delta;
  ctx.alpha = alpha;
  ctx.m = static_cast<double>(pb.m);
  for (auto& p : pb.effective_priors()) ctx.priors.push_back(make_discrete(p));
  ctx.true_risks.resize(pb.n_hyp());
  for (int h = 0; h < pb.n_hyp(); ++h) ctx.true_risks[h] = pb.true_risk(h);

  switch (kind) {
    case BoundKind::thm2_alpha2:
      ctx.log_moment = log_moment_enumerated(pb, ctx.priors[0].probs, 1.0);
      break;
    case BoundKind::thm3_lambda: {
      ctx.log_moment = log_moment_enumerated(pb, ctx.priors[0].probs, 1.0);
      // data-free lambda: the minimizer at the expected divergence, so the
      // statement stays a fixed-lambda instance quantified over (S, h)
      const std::size_t n = pb.n_tuples();
      double d2_ref = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        std::vector<int> tuple = pb.decode_tuple(t);
        double prob = pb.tuple_prob(tuple);
        if (prob <= 0.0) continue;
        d2_ref += prob * renyi_discrete(make_discrete(pb.posterior(tuple)),
                                        ctx.priors[0], 2.0);
      }
      ctx.lambda = optimal_lambda(d2_ref, delta, ctx.log_moment);
      break;
    }
    case BoundKind::corollary5_analog:
      ctx.cor5_log = std::log(16.0 * static_cast<double>(ctx.priors.size()) *
                              std::sqrt(ctx.m)) -
                     3.0 * std::log(delta);
      break;
    case BoundKind::thm8: {
      if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
      MiResult mi = sibson_mi(pb, alpha);
      ctx.log_moment = log_moment_enumerated(pb, mi.optimal_prior, 1.0);
      ctx.rhs_const = mi.value + alpha / (alpha - 1.0) * std::log(1.0 / delta) +
                      ctx.log_moment;
      break;
    }
    case BoundKind::seeger_mi: {
      if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
      MiResult mi = sibson_mi(pb, alpha);
      // threshold expressed on m * kl
      ctx.rhs_const = mi.value + std::log(2.0 * std::sqrt(ctx.m)) +
                      alpha / (alpha - 1.0) * std::log(1.0 / delta);
      break;
    }
  }
  return ctx;
}

// threshold on m * kl(R_S(h)||R_D(h)) for one sampled/enumerated tuple
double tuple_threshold(const StatementContext& ctx,
                       const DiscreteMeasure& posterior) {
  switch (ctx.kind) {
    case BoundKind::thm2_alpha2:
      return theorem2_rhs(renyi_discrete(posterior, ctx.priors[0], 2.0), 2.0,
                          ctx.delta, ctx.log_moment);
    case BoundKind::thm3_lambda:
      return 2.0 * theorem3_rhs(ctx.lambda,
                                renyi_discrete(posterior, ctx.priors[0], 2.0),
                                ctx.delta, ctx.log_moment);
    case BoundKind::corollary5_analog: {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : ctx.priors) {
        best = std::min(best,
                        renyi_discrete(posterior, p, 2.0) + ctx.cor5_log);
      }
      return best;
    }
    case BoundKind::thm8:
    case BoundKind::seeger_mi:
      return ctx.rhs_const;
  }
  return 0.0;
}

CoverageResult finish_exact(const StatementContext& ctx, long long pairs,
                            long long violations, double rate) {
  CoverageResult res;
  res.bound_kind = to_string(ctx.kind);
  res.delta = ctx.delta;
  res.trials = pairs;
  res.violations = violations;
  res.empirical_rate = rate;
  res.cp_lower = rate;
  res.cp_upper = rate;
  res.exact = true;
  return res;
}

CoverageResult finish_mc(const StatementContext& ctx, long long trials,
                         long long violations) {
  CoverageResult res;
  res.bound_kind = to_string(ctx.kind);
  res.delta = ctx.delta;
  res.trials = trials;
  res.violations = violations;
  res.empirical_rate =
      static_cast<double>(violations) / static_cast<double>(trials);
  auto [lo, hi] = clopper_pearson_99(violations, trials);
  res.cp_lower = lo;
  res.cp_upper = hi;
  return res;
}

}  // namespace

BoundKind bound_kind_from_string(const std::string& s) {
  if (s == "thm2_alpha2") return BoundKind::thm2_alpha2;
  if (s == "thm3_lambda") return BoundKind::thm3_lambda;
  if (s == "corollary5_analog") return BoundKind::corollary5_analog;
  if (s == "thm8") return BoundKind::thm8;
  if (s == "seeger_mi") return BoundKind::seeger_mi;
  throw std::invalid_argument("unknown bound kind: " + s);
}

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::thm2_alpha2: return "thm2_alpha2";
    case BoundKind::thm3_lambda: return "thm3_lambda";
    case BoundKind::corollary5_analog: return "corollary5_analog";
    case BoundKind::thm8: return "thm8";
    case BoundKind::seeger_mi: return "seeger_mi";
  }
  return "thm2_alpha2";
}

CoverageResult coverage(const FiniteLearningProblem& pb, BoundKind kind,
                        double delta, long long trials, std::uint64_t seed,
                        double alpha) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  StatementContext ctx = make_context(pb, kind, delta, alpha);
  std::vector<long long> partial(kParallelChunks, 0);
  parallel_chunks([&](int c) {
    auto [b, e] = chunk_range(static_cast<std::size_t>(trials), c);
    for (std::size_t i = b; i < e; ++i) {
      RngStream stream = make_stream(seed, StreamPhase::coverage, i);
      std::vector<int> tuple = pb.sample_tuple(stream);
      DiscreteMeasure q = make_discrete(pb.posterior(tuple));
      int h = FiniteLearningProblem::sample_index(q.probs,
                                                  stream.next_unit());
      double mkl = ctx.m * kl(pb.empirical_risk(h, tuple),
                              ctx.true_risks[h]);
      if (mkl > tuple_threshold(ctx, q)) ++partial[c];
    }
  });
  long long violations = 0;
  for (long long v : partial) violations += v;
  return finish_mc(ctx, trials, violations);
}

CoverageResult coverage_serial(const FiniteLearningProblem& pb, BoundKind kind,
                               double delta, long long trials,
                               std::uint64_t seed, double alpha) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  StatementContext ctx = make_context(pb, kind, delta, alpha);
  long long violations = 0;
  for (long long i = 0; i < trials; ++i) {
    RngStream stream =
        make_stream(seed, StreamPhase::coverage, static_cast<uint64_t>(i));
    std::vector<int> tuple = pb.sample_tuple(stream);
    DiscreteMeasure q = make_discrete(pb.posterior(tuple));
    int h = FiniteLearningProblem::sample_index(q.probs, stream.next_unit());
    double mkl = ctx.m * kl(pb.empirical_risk(h, tuple), ctx.true_risks[h]);
    if (mkl > tuple_threshold(ctx, q)) ++violations;
  }
  return finish_mc(ctx, trials, violations);
}

namespace {

// chunked partials combined in fixed index order in both modes so the
// serial reference and the parallel kernel agree bitwise on the rate
CoverageResult coverage_exact_impl(const FiniteLearningProblem& pb,
                                   BoundKind kind, double delta, double alpha,
                                   bool parallel) {
  StatementContext ctx = make_context(pb, kind, delta, alpha);
  const std::size_t n = pb.n_tuples();
  const int nh = pb.n_hyp();
  std::vector<long long> pair_part(kParallelChunks, 0);
  std::vector<long long> vio_part(kParallelChunks, 0);
  std::vector<double> rate_part(kParallelChunks, 0.0);
  auto body = [&](int c) {
    auto [b, e] = chunk_range(n, c);
    for (std::size_t t = b; t < e; ++t) {
      std::vector<int> tuple = pb.decode_tuple(t);
      double prob = pb.tuple_prob(tuple);
      if (prob <= 0.0) continue;
      DiscreteMeasure q = make_discrete(pb.posterior(tuple));
      double threshold = tuple_threshold(ctx, q);
      pair_part[c] += nh;
      for (int h = 0; h < nh; ++h) {
        double mkl =
            ctx.m * kl(pb.empirical_risk(h, tuple), ctx.true_risks[h]);
        if (mkl > threshold) {
          ++vio_part[c];
          rate_part[c] += prob * q.probs[h];
        }
      }
    }
  };
  if (parallel) {
    parallel_chunks(body);
  } else {
    for (int c = 0; c < static_cast<int>(kParallelChunks); ++c) body(c);
  }
  long long pairs = 0;
  long long violations = 0;
  double rate = 0.0;
  for (int c = 0; c < kParallelChunks; ++c) {
    pairs += pair_part[c];
    violations += vio_part[c];
    rate += rate_part[c];
  }
  return finish_exact(ctx, pairs, violations, rate);
}

}  // namespace

CoverageResult coverage_exact(const FiniteLearningProblem& pb, BoundKind kind,
                              double delta, double alpha) {
  return coverage_exact_impl(pb, kind, delta, alpha, true);
}

CoverageResult coverage_exact_serial(const FiniteLearningProblem& pb,
                                     BoundKind kind, double delta,
                                     double alpha) {
  return coverage_exact_impl(pb, kind, delta, alpha, false);
}

double maurer_exact(int m, double p) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (!(p >= 0.0) || !(p <= 1.0)) {
    throw std::invalid_argument("p must lie in [0,1]");
  }
  // log-domain sum over k of C(m,k) p^k (1-p)^{m-k} e^{m kl(k/m||p)}
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(m + 1);
  const double lm = std::lgamma(m + 1.0);
  for (int k = 0; k <= m; ++k) {
    if (p == 0.0 && k > 0) continue;
    if (p == 1.0 && k < m) continue;
    double lw = lm - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
    if (k > 0) lw += k * std::log(p);
    if (k < m) lw += (m - k) * std::log1p(-p);
    double term = lw + m * kl(static_cast<double>(k) / m, p);
    terms.push_back(term);
    best = std::max(best, term);
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - best);
  return std::exp(best) * sum;
}

std::vector<MaurerRow> maurer_check(int m_max) {
  if (m_max < 1) throw std::invalid_argument("m_max must be >= 1");
  std::vector<MaurerRow> rows(m_max);
  parallel_items(m_max, [&](std::size_t idx) {
    const int m = static_cast<int>(idx) + 1;
    MaurerRow row;
    row.m = m;
    row.bound = maurer_moment_bound(m);
    for (int i = 0; i <= 100; ++i) {
      row.max_moment = std::max(row.max_moment, maurer_exact(m, i / 100.0));
    }
    row.pass = row.max_moment <= row.bound + 1e-9;
    rows[idx] = row;
  });
  return rows;
}

double moment_term(const FiniteLearningProblem& pb, double alpha,
                   const PhiFn& phi, bool parallel) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be finite and > 1");
  }
  // for the default kl instantiation the lifted power is exactly e^{m kl}
  double weight = phi ? alpha / (alpha - 1.0) : 1.0;
  return log_moment_enumerated(pb, pb.effective_priors()[0], weight, phi,
                               parallel);
}

std::pair<double, double> clopper_pearson_99(long long successes,
                                             long long trials) {
  if (trials < 1 || successes < 0 || successes > trials) {
    throw std::invalid_argument("need 0 <= successes <= trials, trials >= 1");
  }
  const double k = static_cast<double>(successes);
  const double n = static_cast<double>(trials);
  double lo = 0.0;
  double hi = 1.0;
  if (successes > 0) {
    boost::math::beta_distribution<double> dist(k, n - k + 1.0);
    lo = boost::math::quantile(dist, 0.005);
  }
  if (successes < trials) {
    boost::math::beta_distribution<double> dist(k + 1.0, n - k);
    hi = boost::math::quantile(dist, 0.995);
  }
  return {lo, hi};
}

void append_coverage_csv(const std::string& path,
                         const std::vector<CoverageResult>& rows) {
  bool need_header = true;
  {
    std::ifstream probe(path);
    if (probe && probe.peek() != std::ifstream::traits_type::eof()) {
      need_header = false;
    }
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot write coverage csv: " + path);
  if (need_header) out << "bound_kind,delta,trials,violations,rate,cp_upper\n";
  char buf[160];
  for (const CoverageResult& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.10g,%lld,%lld,%.10g,%.10g\n",
                  r.bound_kind.c_str(), r.delta, r.trials, r.violations,
                  r.empirical_rate, r.cp_upper);
    out << buf;
  }
}

}  // namespace pacb
