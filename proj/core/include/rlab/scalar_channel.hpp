#pragma once

#include "rlab/prior.hpp"

namespace rlab {

/// Scalar Gaussian denoising model y = s + z*sigma with S ~ P0, Z ~ N(0,1).
/// sigma = +infinity is a distinguished value meaning "no observation" and is
/// handled symbolically (free energy and mutual information are exactly 0).
struct ScalarChannel {
  Prior prior;
  double sigma;
};

inline constexpr int kDefaultQuadOrder = 80;

/// Free energy of the denoising model: minus the average log normalization of
/// the posterior. The S average is an exact atom sum, the Z average is
/// Gauss-Hermite quadrature of the given order.
double f_den(const ScalarChannel& channel, int quad_order = kDefaultQuadOrder);

/// Mutual information I(S; S + Z*sigma). Satisfies
/// i_den = f_den + E[S^2] / (2 sigma^2).
double i_den(const ScalarChannel& channel, int quad_order = kDefaultQuadOrder);

/// Posterior mean E[X | y] under the channel; always within the prior support.
double posterior_mean(const ScalarChannel& channel, double y);

/// Same quantities parametrized by the SNR rho = sigma^-2 (rho = 0 is the
/// sigma = infinity limit and returns exactly 0).
double f_den_snr(const Prior& prior, double snr, int quad_order = kDefaultQuadOrder);
double i_den_snr(const Prior& prior, double snr, int quad_order = kDefaultQuadOrder);

/// d f_den / d(sigma^-2) at the given SNR, by central differences (one-sided
/// at the snr = 0 boundary). step <= 0 selects the default 1e-5 * max(1, snr).
double fden_snr_derivative(const Prior& prior, double snr,
                           int quad_order = kDefaultQuadOrder, double step = 0.0);

/// d i_den / d(sigma^-2); equals half the scalar-channel MMSE.
double iden_snr_derivative(const Prior& prior, double snr,
                           int quad_order = kDefaultQuadOrder, double step = 0.0);

}  // namespace rlab
