#include "pacbound/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pacb {

namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void check_gaussian_pair(const IsotropicGaussian& q,
                         const IsotropicGaussian& p) {
  if (q.mean.size() != p.mean.size()) {
    throw std::invalid_argument("Gaussian means must share a dimension");
  }
  if (!(q.variance > 0.0) || !(p.variance > 0.0)) {
    throw std::invalid_argument("Gaussian variance must be > 0");
  }
  if (q.variance != p.variance) {
    throw std::invalid_argument(
        "only equal-variance Gaussians are supported; got " +
        std::to_string(q.variance) + " vs " + std::to_string(p.variance));
  }
  for (double x : q.mean) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite mean entry");
  }
  for (double x : p.mean) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite mean entry");
  }
}

}  // namespace

void validate(const DiscreteMeasure& d) {
  double sum = 0.0;
  for (double x : d.probs) {
    if (!(x >= 0.0)) {
      throw std::invalid_argument("DiscreteMeasure entries must be >= 0");
    }
    sum += x;
  }
  if (std::fabs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("DiscreteMeasure must sum to 1 within 1e-12, got " +
                                std::to_string(sum));
  }
}

DiscreteMeasure make_discrete(std::vector<double> probs) {
  DiscreteMeasure d{std::move(probs)};
  validate(d);
  return d;
}

double renyi_gaussian(const IsotropicGaussian& q, const IsotropicGaussian& p,
                      double alpha) {
  check_gaussian_pair(q, p);
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
  return alpha * sq_distance(q.mean, p.mean) / (2.0 * q.variance);
}

double kl_gaussian(const IsotropicGaussian& q, const IsotropicGaussian& p) {
  check_gaussian_pair(q, p);
  return sq_distance(q.mean, p.mean) / (2.0 * q.variance);
}

double disintegrated_kl_gaussian(const std::vector<double>& w,
                                 const std::vector<double>& eps,
                                 const std::vector<double>& v, double sigma2) {
  if (w.size() != eps.size() || w.size() != v.size()) {
    throw std::invalid_argument("w, eps, v must share a length");
  }
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double a = w[i] + eps[i] - v[i];
    s += a * a - eps[i] * eps[i];
  }
  return s / (2.0 * sigma2);
}

double renyi_discrete(const DiscreteMeasure& q, const DiscreteMeasure& p,
                      double alpha) {
  validate(q);
  validate(p);
  if (q.probs.size() != p.probs.size()) {
    throw std::invalid_argument("measures must share a support size");
  }
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
  // log-sum-exp over ln p + alpha ln(q/p): survives large alpha, where the
  // linear-domain power overflows.
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(q.probs.size());
  for (std::size_t i = 0; i < q.probs.size(); ++i) {
    if (q.probs[i] == 0.0) continue;  // 0^alpha contributes nothing
    if (p.probs[i] == 0.0) {
      throw absolute_continuity_error(
          "q has mass at index " + std::to_string(i) + " where p has none");
    }
    double t = std::log(p.probs[i]) +
               alpha * (std::log(q.probs[i]) - std::log(p.probs[i]));
    terms.push_back(t);
    max_term = std::max(max_term, t);
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - max_term);
  return (max_term + std::log(sum)) / (alpha - 1.0);
}

double chi2_from_renyi2(double d2) {
  if (!(d2 >= 0.0)) throw std::invalid_argument("d2 must be >= 0");
  return std::expm1(d2);  // overflows to +inf, the saturating signal
}

}  // namespace pacb
