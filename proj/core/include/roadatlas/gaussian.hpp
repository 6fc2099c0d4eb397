#pragma once

namespace roadatlas {

struct Gaussian1D {
  double mu = 0.0;
  double sigma = 1.0;
};

/// Precision-weighted product of two Gaussians:
///   mu  <- (s2^2 mu1 + s1^2 mu2) / (s1^2 + s2^2)
///   s^2 <- s1^2 s2^2 / (s1^2 + s2^2)
/// Throws on non-positive or non-finite sigma.
Gaussian1D fuse_gaussians(const Gaussian1D& a, const Gaussian1D& b);

/// Overlap rate of two Gaussians via their equal-weight mixture: density at
/// the saddle between the two modes over the density of the smaller mode;
/// 1 when the mixture is unimodal on [min mu, max mu].
double overlap_rate(const Gaussian1D& a, const Gaussian1D& b);

}  // namespace roadatlas
