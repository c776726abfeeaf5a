#include "pacbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pacbound/binary_kl.hpp"

namespace pacb {

namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("w and v must share a length");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void check_risk(double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::invalid_argument("empirical risk must lie in [0,1]");
  }
}

void check_sigma2(double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
}

// log(a + b) from log a and log b.
double log_sum_exp(double la, double lb) {
  double hi = std::max(la, lb);
  double lo = std::min(la, lb);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  return hi + std::log1p(std::exp(lo - hi));
}

const char* method_name(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::rivasplata: return "rivasplata";
    case BaselineMethod::blanchard: return "blanchard";
    case BaselineMethod::catoni: return "catoni";
  }
  throw std::invalid_argument("unknown baseline method");
}

}  // namespace

void BoundContext::validate() const {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0,1)");
  }
  if (t_priors < 1) throw std::invalid_argument("t_priors must be >= 1");
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
}

nlohmann::json to_json(const BoundReport& r) {
  return nlohmann::json{{"schema_version", "1"},
                        {"method", r.method},
                        {"m", r.m},
                        {"delta", r.delta},
                        {"T", r.t_priors},
                        {"sigma2", r.sigma2},
                        {"alpha", r.alpha},
                        {"empirical_risk", r.empirical_risk},
                        {"divergence", r.divergence_term},
                        {"log_term", r.log_term},
                        {"psi", r.psi},
                        {"certified_risk", r.certified_risk},
                        {"extras", r.extras.is_null() ? nlohmann::json::object()
                                                      : r.extras}};
}

double maurer_moment_bound(long long m) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  return 2.0 * std::sqrt(static_cast<double>(m));
}

BoundReport bound_ours_sq(const BoundContext& ctx, double r_s, double sq_dist,
                          double sigma2) {
  ctx.validate();
  check_risk(r_s);
  check_sigma2(sigma2);
  if (!(sq_dist >= 0.0)) throw std::invalid_argument("sq_dist must be >= 0");

  double md = static_cast<double>(ctx.m);
  double d2 = sq_dist / sigma2;  // order-2 Renyi divergence
  double log_term = std::log(16.0) + std::log(static_cast<double>(ctx.t_priors)) +
                    0.5 * std::log(md) - 3.0 * std::log(ctx.delta);
  double psi = (d2 + log_term) / md;

  BoundReport r;
  r.method = "ours";
  r.m = ctx.m;
  r.delta = ctx.delta;
  r.t_priors = ctx.t_priors;
  r.sigma2 = sigma2;
  r.alpha = 2.0;
  r.empirical_risk = r_s;
  r.divergence_term = d2;
  r.log_term = log_term;
  r.psi = psi;
  r.certified_risk = kl_inverse(r_s, psi).p_star;
  r.extras = {{"sq_dist", sq_dist},
              {"overhead_disintegration",
               (std::log(8.0) - 2.0 * std::log(ctx.delta)) / md}};
  return r;
}

BoundReport bound_ours(const BoundContext& ctx, double r_s,
                       const std::vector<double>& w,
                       const std::vector<double>& v, double sigma2) {
  return bound_ours_sq(ctx, r_s, sq_distance(w, v), sigma2);
}

BoundReport bound_baseline_dkl(const BoundContext& ctx, BaselineMethod method,
                               double r_s, double dkl, double sigma2,
                               const std::vector<double>& c_grid) {
  ctx.validate();
  check_risk(r_s);
  check_sigma2(sigma2);
  if (!std::isfinite(dkl)) throw std::invalid_argument("dkl must be finite");

  double md = static_cast<double>(ctx.m);
  double td = static_cast<double>(ctx.t_priors);

  BoundReport r;
  r.method = method_name(method);
  r.m = ctx.m;
  r.delta = ctx.delta;
  r.t_priors = ctx.t_priors;
  r.sigma2 = sigma2;
  r.alpha = 2.0;
  r.empirical_risk = r_s;
  r.divergence_term = dkl;

  switch (method) {
    case BaselineMethod::rivasplata: {
      r.log_term = std::log(2.0 * td) + 0.5 * std::log(md) - std::log(ctx.delta);
      double raw = (dkl + r.log_term) / md;
      r.psi = std::max(0.0, raw);
      r.certified_risk = kl_inverse(r_s, r.psi).p_star;
      r.extras = {{"clamped", raw < 0.0}};
      break;
    }
    case BaselineMethod::blanchard: {
      r.log_term = std::log(td * (md + 1.0)) - std::log(ctx.delta);
      double raw = ((md + 1.0) / md * dkl + r.log_term) / md;
      r.psi = std::max(0.0, raw);
      r.certified_risk = kl_inverse(r_s, r.psi).p_star;
      r.extras = {{"clamped", raw < 0.0}};
      break;
    }
    case BaselineMethod::catoni: {
      if (c_grid.empty()) {
        throw std::invalid_argument("catoni requires a nonempty c_grid");
      }
      for (double c : c_grid) {
        if (!(c > 0.0)) throw std::invalid_argument("c_grid entries must be > 0");
      }
      r.log_term = std::log(td * static_cast<double>(c_grid.size())) -
                   std::log(ctx.delta);
      double raw = (dkl + r.log_term) / md;
      r.psi = std::max(0.0, raw);
      double best = std::numeric_limits<double>::infinity();
      double best_c = c_grid.front();
      for (double c : c_grid) {
        double val = (1.0 - std::exp(-c * r_s - r.psi)) / (1.0 - std::exp(-c));
        if (val < best) {
          best = val;
          best_c = c;
        }
      }
      r.certified_risk = std::clamp(best, 0.0, 1.0);
      r.extras = {{"chosen_c", best_c},
                  {"grid_size", c_grid.size()},
                  {"clamped", raw < 0.0}};
      break;
    }
  }
  return r;
}

BoundReport bound_baseline(const BoundContext& ctx, BaselineMethod method,
                           double r_s, const std::vector<double>& w,
                           const std::vector<double>& eps,
                           const std::vector<double>& v, double sigma2,
                           const std::vector<double>& c_grid) {
  return bound_baseline_dkl(ctx, method, r_s,
                            disintegrated_kl_gaussian(w, eps, v, sigma2),
                            sigma2, c_grid);
}

BoundReport bound_stochastic_sq(const BoundContext& ctx,
                                const std::vector<double>& risks_n,
                                double sq_dist, double sigma2) {
  ctx.validate();
  check_sigma2(sigma2);
  if (risks_n.empty()) throw std::invalid_argument("risks_n must be nonempty");
  for (double r : risks_n) check_risk(r);
  if (!(sq_dist >= 0.0)) throw std::invalid_argument("sq_dist must be >= 0");

  double md = static_cast<double>(ctx.m);
  double nd = static_cast<double>(risks_n.size());
  double mean_risk =
      std::accumulate(risks_n.begin(), risks_n.end(), 0.0) / nd;

  double inner_budget = std::log(4.0 / ctx.delta) / nd;
  double inner = kl_inverse(mean_risk, inner_budget).p_star;

  double dkl = sq_dist / (2.0 * sigma2);
  double log_term = std::log(4.0 * static_cast<double>(ctx.t_priors)) +
                    0.5 * std::log(md) - std::log(ctx.delta);
  double psi = (dkl + log_term) / md;

  BoundReport r;
  r.method = "stochastic";
  r.m = ctx.m;
  r.delta = ctx.delta;
  r.t_priors = ctx.t_priors;
  r.sigma2 = sigma2;
  r.alpha = 2.0;
  r.empirical_risk = mean_risk;
  r.divergence_term = dkl;
  r.log_term = log_term;
  r.psi = psi;
  r.certified_risk = kl_inverse(inner, psi).p_star;
  r.extras = {{"n", risks_n.size()},
              {"inner_budget", inner_budget},
              {"inner_risk", inner}};
  return r;
}

BoundReport bound_stochastic(const BoundContext& ctx,
                             const std::vector<double>& risks_n,
                             const std::vector<double>& w,
                             const std::vector<double>& v, double sigma2) {
  return bound_stochastic_sq(ctx, risks_n, sq_distance(w, v), sigma2);
}

double theorem2_rhs(double d_alpha, double alpha, double delta,
                    double log_moment) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("delta must lie in (0,1]");
  }
  return (2.0 * alpha - 1.0) / (alpha - 1.0) * std::log(2.0 / delta) +
         d_alpha + log_moment;
}

double theorem3_rhs(double lam, double d2, double delta, double log_moment2) {
  if (!(lam > 0.0)) throw std::invalid_argument("lam must be > 0");
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("delta must lie in (0,1]");
  }
  double a = std::log(lam / 2.0) + d2;
  double b = std::log(4.0 / lam) - 3.0 * std::log(delta) + log_moment2;
  return log_sum_exp(a, b);
}

double optimal_lambda(double d2, double delta, double log_moment2) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("delta must lie in (0,1]");
  }
  return std::exp(0.5 * (std::log(8.0) + log_moment2 - 3.0 * std::log(delta) -
                         d2));
}

double alpha_limit_rhs_one(double delta, double esssup_phi) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("delta must lie in (0,1]");
  }
  if (!(esssup_phi > 0.0)) {
    throw std::invalid_argument("esssup_phi must be > 0");
  }
  return std::log(2.0 / delta) + std::log(esssup_phi);
}

double alpha_limit_rhs_infinity(double delta, const DiscreteMeasure& q,
                                const DiscreteMeasure& p, double mean_phi) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("delta must lie in (0,1]");
  }
  if (!(mean_phi > 0.0)) throw std::invalid_argument("mean_phi must be > 0");
  validate(q);
  validate(p);
  if (q.probs.size() != p.probs.size()) {
    throw std::invalid_argument("measures must share a support size");
  }
  double sup = 0.0;
  for (std::size_t i = 0; i < q.probs.size(); ++i) {
    if (q.probs[i] == 0.0) continue;
    if (p.probs[i] == 0.0) {
      throw absolute_continuity_error(
          "q has mass at index " + std::to_string(i) + " where p has none");
    }
    sup = std::max(sup, q.probs[i] / p.probs[i]);
  }
  return std::log(sup) + std::log(4.0 * mean_phi) - 2.0 * std::log(delta);
}

double alpha_limit_rhs_infinity(double, const IsotropicGaussian&,
                                const IsotropicGaussian&, double) {
  throw std::domain_error(
      "unsupported space: the density-ratio esssup needs a finite hypothesis "
      "space");
}

}  // namespace pacb
