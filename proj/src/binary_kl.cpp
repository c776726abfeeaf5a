#include "pacbound/binary_kl.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pacb {

namespace {

constexpr double kBracketCeiling = 1.0 - 1e-15;
constexpr int kMaxBisectIterations = 200;

void check_unit_interval(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0,1], got " +
                                std::to_string(x));
  }
}

}  // namespace

double kl(double q, double p) {
  check_unit_interval(q, "q");
  check_unit_interval(p, "p");
  if (p == 0.0 || p == 1.0) {
    if (q == p) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  double a = (q > 0.0) ? q * std::log(q / p) : 0.0;
  double b = (q < 1.0) ? (1.0 - q) * std::log((1.0 - q) / (1.0 - p)) : 0.0;
  double v = a + b;
  return v > 0.0 ? v : 0.0;  // clip the few ulps of negative noise at q == p
}

KlInverseResult kl_inverse(double q, double psi, double tol) {
  check_unit_interval(q, "q");
  if (!std::isfinite(psi)) throw std::invalid_argument("psi must be finite");
  if (psi < 0.0) throw std::invalid_argument("psi must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");

  if (q == 1.0) return {1.0, 0, 0.0};  // kl(1||p) is infinite for all p < 1
  if (psi == 0.0) return {q, 0, 0.0};

  double lo = q;
  double hi = kBracketCeiling;
  if (hi <= lo) return {q, 0, psi};
  if (kl(q, hi) <= psi) return {hi, 0, psi - kl(q, hi)};

  // Invariant: kl(q||lo) <= psi < kl(q||hi).
  int it = 0;
  while (it < kMaxBisectIterations && hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (kl(q, mid) <= psi) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++it;
  }
  return {lo, it, std::fabs(kl(q, lo) - psi)};
}

KlInverseGrad kl_inverse_grad(double q, double psi) {
  if (!(q > 0.0 && q < 1.0)) {
    throw std::invalid_argument("kl_inverse_grad requires q in (0,1)");
  }
  if (!std::isfinite(psi)) throw std::invalid_argument("psi must be finite");
  if (psi < kKlGradPsiGuard) {
    throw std::domain_error(
        "kl_inverse_grad: psi below singularity guard; the partials diverge "
        "as p* -> q");
  }
  double p = kl_inverse(q, psi).p_star;
  double ratio_top = (1.0 - q) / (1.0 - p);
  double ratio_bot = q / p;
  double den = ratio_top - ratio_bot;
  return {(std::log(ratio_top) - std::log(ratio_bot)) / den, 1.0 / den};
}

double pinsker_gap(double q, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("pinsker_gap requires p in (0,1)");
  }
  double d = q - p;
  return kl(q, p) - 2.0 * d * d;
}

}  // namespace pacb
