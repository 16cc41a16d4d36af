#pragma once

#include <vector>

#include "ogsbl/channel.hpp"
#include "ogsbl/types.hpp"

namespace ogsbl {

/// Hyperparameters of the hierarchical prior and solver controls. The two
/// Gamma hyperpriors share one (a, b) pair; a = b = 1e-6 approximates the
/// broad-hyperprior limit without dividing by zero.
struct SblHyper {
  double a = 1e-6;
  double b = 1e-6;
  double delta = 1e-10;     // stop when ||h^t - h^{t-1}||^2 <= delta
  int max_iters = 500;
  double step_beta = 2e-5;  // gradient step on the off-grid gaps
  double support_ratio = 0.01;
  double gamma_cap = 1e12;  // elements at cap are treated as pruned
  bool recompute_gamma_posterior = true;  // refresh moments at alpha^{t+1}
  bool beta_backtracking = false;  // halve step until evidence ascent
};

/// Solver iterate: noise precision, per-element precisions, off-grid gaps.
struct SblState {
  double alpha = 1.0;
  VecR gamma;
  VecR beta;
  int iter = 0;
};

/// Gaussian posterior moments of the sparse coefficients plus the residual
/// statistic eta = Tr(Phi Sigma Phi^H) + ||y - Phi mu||^2.
struct Posterior {
  VecC mu;
  MatC sigma;
  double eta = 0.0;
};

struct SblResult {
  VecC h_hat;
  std::vector<int> support;
  SblState state;
  int iters_used = 0;
  double nmse = 0.0;

  struct TracePoint {
    double alpha;
    double h_change_sq;
    double evidence;
  };
  std::vector<TracePoint> trajectory;
};

// ---- core operations on explicit matrices -------------------------------
// phi = X * A(beta). These entry points let callers (the unfolding layer,
// the environment, zero-padded evaluation) supply their own dictionary.

/// Sigma = (alpha Phi^H Phi + diag(gamma))^{-1}, mu = alpha Sigma Phi^H y.
/// Uses an LDLT factorization with a diagonal jitter retry; throws
/// NumericalError if the system stays numerically singular.
Posterior posterior_moments(double alpha, const VecR& gamma, const MatC& phi, const VecC& y);

/// alpha = (T + a) / (b + eta). Throws NumericalError when b + eta == 0.
double update_alpha(const Posterior& post, const SblHyper& hyper, int pilot_length);

/// gamma_j = (a + 1) / (b + Lambda_jj), Lambda = Sigma + mu mu^H.
VecR update_gamma(const Posterior& post, const SblHyper& hyper);

/// Derivative of the surrogate's beta-dependent terms,
///   Xi_j = 2 Re{a'_j^H X^H X a_j} c1_j + 2 Re{a'_j^H X^H c2_j},
/// with c1_j = -alpha (chi_jj + |mu_j|^2) and
/// c2_j = alpha (conj(mu_j) y_{-j} - X sum_{i!=j} chi_ij a_i).
/// The posterior must be evaluated at (alpha_next, gamma_next, beta).
VecR beta_gradient(double alpha_next, const Posterior& post, const MatC& dict, const MatC& dict_deriv,
                   const MatC& pilot_x, const VecC& y);

/// beta + step .* xi, clipped componentwise to +-resolution/2.
VecR update_beta(const VecR& beta, const VecR& xi, const VecR& step, double resolution);
VecR update_beta(const VecR& beta, const VecR& xi, double step, double resolution);

/// Omega = { j : 1/gamma_j >= ratio * max_i 1/gamma_i }, excluding elements
/// at the cap. Falls back to the single largest-variance index so the
/// result is never empty.
std::vector<int> select_support(const VecR& gamma, double threshold_ratio, double gamma_cap = 1e12);

/// h_hat = A_Omega pinv(Phi_Omega) y (minimum-norm least squares).
/// Throws DimensionError on an empty support.
VecC reconstruct_channel(const MatC& dict, const MatC& phi, const std::vector<int>& support, const VecC& y);

/// ln p(y, alpha, gamma, beta) up to an additive constant:
/// Gaussian marginal y ~ CN(0, alpha^{-1} I + Phi diag(1/gamma) Phi^H)
/// plus the Gamma log-priors. Throws NumericalError if the covariance is
/// not positive definite.
double log_evidence(double alpha, const VecR& gamma, const MatC& phi, const VecC& y, const SblHyper& hyper);

// ---- spec-shaped wrappers (dictionary built from grid + state) -----------

Posterior posterior_moments(const SblState& state, const PilotMatrix& pilot, const Grid& grid,
                            const ArrayGeometry& geom, const VecC& y);
VecR beta_gradient(const SblState& state, const Posterior& post, const PilotMatrix& pilot, const Grid& grid,
                   const ArrayGeometry& geom, const VecC& y, double alpha_next);
VecC reconstruct_channel(const Grid& grid, const ArrayGeometry& geom, const VecR& beta,
                         const std::vector<int>& support, const PilotMatrix& pilot, const VecC& y);
double log_evidence(const SblState& state, const PilotMatrix& pilot, const Grid& grid,
                    const ArrayGeometry& geom, const VecC& y, const SblHyper& hyper);

/// Initialization used everywhere: alpha = 1/var(y), gamma = 1, beta = 0.
SblState initial_state(const VecC& y, int grid_size);

/// Full Algorithm-1 loop: alpha -> gamma -> beta -> reconstruct until the
/// channel stops moving or max_iters is hit.
SblResult run_sbl(const ChannelSample& sample, const PilotMatrix& pilot, const Grid& grid,
                  const ArrayGeometry& geom, const SblHyper& hyper);

/// Standard on-grid SBL: identical loop with beta frozen at zero.
SblResult run_standard_sbl(const ChannelSample& sample, const PilotMatrix& pilot, const Grid& grid,
                           const ArrayGeometry& geom, const SblHyper& hyper);

/// ||h_hat - h||^2 / ||h||^2.
double nmse(const VecC& h_hat, const VecC& h);

}  // namespace ogsbl
