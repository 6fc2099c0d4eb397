#include "roadatlas/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace roadatlas {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double density(double x, const Gaussian1D& g) {
  const double z = (x - g.mu) / g.sigma;
  return kInvSqrt2Pi / g.sigma * std::exp(-0.5 * z * z);
}

double mixture(double x, const Gaussian1D& a, const Gaussian1D& b) {
  return 0.5 * (density(x, a) + density(x, b));
}

// Sign-exact even when both component densities underflow: factor out the
// larger exponent so one term is always O(1).
double mixture_slope(double x, const Gaussian1D& a, const Gaussian1D& b) {
  const double za = (x - a.mu) / a.sigma;
  const double zb = (x - b.mu) / b.sigma;
  const double ea = -0.5 * za * za - std::log(a.sigma);
  const double eb = -0.5 * zb * zb - std::log(b.sigma);
  const double ka = -(x - a.mu) / (a.sigma * a.sigma);
  const double kb = -(x - b.mu) / (b.sigma * b.sigma);
  const double m = std::max(ea, eb);
  return ka * std::exp(ea - m) + kb * std::exp(eb - m);
}

void require_valid(const Gaussian1D& g) {
  if (!(g.sigma > 0.0) || !std::isfinite(g.sigma) || !std::isfinite(g.mu))
    throw std::invalid_argument("gaussian requires finite mu and sigma > 0");
}

}  // namespace

Gaussian1D fuse_gaussians(const Gaussian1D& a, const Gaussian1D& b) {
  require_valid(a);
  require_valid(b);
  const double va = a.sigma * a.sigma;
  const double vb = b.sigma * b.sigma;
  Gaussian1D out;
  out.mu = (vb * a.mu + va * b.mu) / (va + vb);
  out.sigma = std::sqrt(va * vb / (va + vb));
  return out;
}

double overlap_rate(const Gaussian1D& a, const Gaussian1D& b) {
  require_valid(a);
  require_valid(b);

  const Gaussian1D& lo = a.mu <= b.mu ? a : b;
  const Gaussian1D& hi = a.mu <= b.mu ? b : a;
  if (hi.mu - lo.mu < 1e-12) return 1.0;

  // All critical points of a two-component mixture sit inside [mu_lo, mu_hi].
  // Bracket slope sign changes on a fixed scan, then bisect.
  constexpr int kScan = 512;
  const double span = hi.mu - lo.mu;
  std::vector<double> critical;
  double prev_x = lo.mu;
  double prev_s = mixture_slope(prev_x, lo, hi);
  for (int i = 1; i <= kScan; ++i) {
    const double x = lo.mu + span * i / kScan;
    const double s = mixture_slope(x, lo, hi);
    if ((prev_s > 0.0 && s <= 0.0) || (prev_s < 0.0 && s >= 0.0)) {
      double l = prev_x, r = x;
      for (int it = 0; it < 80; ++it) {
        const double m = 0.5 * (l + r);
        const double sm = mixture_slope(m, lo, hi);
        if ((sm <= 0.0) == (prev_s > 0.0))
          r = m;
        else
          l = m;
      }
      critical.push_back(0.5 * (l + r));
    }
    prev_x = x;
    prev_s = s;
  }

  if (critical.size() < 3) return 1.0;  // unimodal: no interior saddle

  // Three critical points: mode, saddle, mode (in x order).
  const double mode_lo = mixture(critical.front(), lo, hi);
  const double saddle = mixture(critical[1], lo, hi);
  const double mode_hi = mixture(critical.back(), lo, hi);
  const double sub_max = std::min(mode_lo, mode_hi);
  if (sub_max <= 0.0) return 0.0;
  return std::clamp(saddle / sub_max, 0.0, 1.0);
}

}  // namespace roadatlas
