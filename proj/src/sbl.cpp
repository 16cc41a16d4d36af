#include "ogsbl/sbl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace ogsbl {

namespace {

/// Hermitian solve helper: factorizes alpha Phi^H Phi + diag(gamma) once,
/// retrying with a small diagonal jitter when the factorization fails
/// (gamma spans many orders of magnitude).
class HermitianSolver {
 public:
  HermitianSolver(double alpha, const VecR& gamma, const MatC& gram) {
    MatC m = alpha * gram;
    m.diagonal() += gamma.cast<Complex>();
    ldlt_.compute(m);
    if (ldlt_.info() != Eigen::Success) {
      const double jitter = 1e-12 * std::abs(m.trace()) / static_cast<double>(m.rows());
      m.diagonal().array() += jitter;
      ldlt_.compute(m);
      if (ldlt_.info() != Eigen::Success) {
        throw NumericalError("posterior precision matrix is numerically singular");
      }
    }
  }

  MatC solve(const MatC& rhs) const { return ldlt_.solve(rhs); }
  VecC solve(const VecC& rhs) const { return ldlt_.solve(rhs); }

 private:
  Eigen::LDLT<MatC> ldlt_;
};

}  // namespace

Posterior posterior_moments(double alpha, const VecR& gamma, const MatC& phi, const VecC& y) {
  if (gamma.size() != phi.cols() || y.size() != phi.rows()) {
    throw DimensionError("posterior_moments: inconsistent dimensions");
  }
  const MatC gram = phi.adjoint() * phi;
  HermitianSolver solver(alpha, gamma, gram);

  Posterior post;
  const MatC identity = MatC::Identity(phi.cols(), phi.cols());
  post.sigma = solver.solve(identity);
  // Symmetrize: LDLT solves leave ~1e-16 asymmetry that compounds downstream.
  post.sigma = 0.5 * (post.sigma + post.sigma.adjoint()).eval();
  post.mu = alpha * (post.sigma * (phi.adjoint() * y));
  const double trace_term = (gram * post.sigma).trace().real();
  const double fit_term = (y - phi * post.mu).squaredNorm();
  post.eta = trace_term + fit_term;
  return post;
}

double update_alpha(const Posterior& post, const SblHyper& hyper, int pilot_length) {
  const double denom = hyper.b + post.eta;
  if (denom <= 0.0) {
    throw NumericalError("update_alpha: b + eta is not positive (exact noiseless fit?)");
  }
  return (pilot_length + hyper.a) / denom;
}

VecR update_gamma(const Posterior& post, const SblHyper& hyper) {
  const Eigen::Index n = post.mu.size();
  VecR gamma(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex diag = post.sigma(j, j);
    // Hermitian diagonal plus |mu_j|^2 is real up to roundoff.
    const double lambda_jj = diag.real() + std::norm(post.mu(j));
    if (std::abs(diag.imag()) > 1e-9 * std::max(1.0, std::abs(diag.real()))) {
      throw NumericalError("update_gamma: posterior covariance diagonal is not real");
    }
    gamma(j) = std::min((hyper.a + 1.0) / (hyper.b + lambda_jj), hyper.gamma_cap);
  }
  return gamma;
}

VecR beta_gradient(double alpha_next, const Posterior& post, const MatC& dict, const MatC& dict_deriv,
                   const MatC& pilot_x, const VecC& y) {
  const Eigen::Index n_cols = dict.cols();
  if (post.mu.size() != n_cols || dict_deriv.cols() != n_cols) {
    throw DimensionError("beta_gradient: inconsistent dimensions");
  }
  // Compact form of the per-component derivative: with Phi = X A,
  //   Xi_j = 2 alpha Re{ a'_j^H X^H ( conj(mu_j) (y - Phi mu) - Phi Sigma e_j ) },
  // which expands to the c1/c2/y_{-j} grouping.
  const MatC phi = pilot_x * dict;
  const VecC resid = y - phi * post.mu;
  const VecC dres = dict_deriv.adjoint() * (pilot_x.adjoint() * resid);       // a'_j^H X^H (y - Phi mu)
  const MatC cross = dict_deriv.adjoint() * (pilot_x.adjoint() * (phi * post.sigma));
  VecR xi(n_cols);
  for (Eigen::Index j = 0; j < n_cols; ++j) {
    const Complex term = std::conj(post.mu(j)) * dres(j) - cross(j, j);
    xi(j) = 2.0 * alpha_next * term.real();
  }
  return xi;
}

VecR update_beta(const VecR& beta, const VecR& xi, const VecR& step, double resolution) {
  if (beta.size() != xi.size() || beta.size() != step.size()) {
    throw DimensionError("update_beta: inconsistent dimensions");
  }
  const double half = resolution / 2.0;
  VecR out(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    out(j) = std::clamp(beta(j) + step(j) * xi(j), -half, half);
  }
  return out;
}

VecR update_beta(const VecR& beta, const VecR& xi, double step, double resolution) {
  return update_beta(beta, xi, VecR::Constant(beta.size(), step), resolution);
}

std::vector<int> select_support(const VecR& gamma, double threshold_ratio, double gamma_cap) {
  double max_inv = 0.0;
  int argmax = 0;
  for (Eigen::Index j = 0; j < gamma.size(); ++j) {
    const double inv = 1.0 / gamma(j);
    if (inv > max_inv) {
      max_inv = inv;
      argmax = static_cast<int>(j);
    }
  }
  std::vector<int> support;
  for (Eigen::Index j = 0; j < gamma.size(); ++j) {
    if (gamma(j) >= gamma_cap) continue;  // pruned at the cap
    if (1.0 / gamma(j) >= threshold_ratio * max_inv) support.push_back(static_cast<int>(j));
  }
  if (support.empty()) support.push_back(argmax);
  return support;
}

VecC reconstruct_channel(const MatC& dict, const MatC& phi, const std::vector<int>& support, const VecC& y) {
  if (support.empty()) throw DimensionError("reconstruct_channel: empty support");
  MatC phi_sub(phi.rows(), static_cast<Eigen::Index>(support.size()));
  MatC dict_sub(dict.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    phi_sub.col(static_cast<Eigen::Index>(k)) = phi.col(support[k]);
    dict_sub.col(static_cast<Eigen::Index>(k)) = dict.col(support[k]);
  }
  const VecC w = phi_sub.completeOrthogonalDecomposition().solve(y);
  return dict_sub * w;
}

double log_evidence(double alpha, const VecR& gamma, const MatC& phi, const VecC& y, const SblHyper& hyper) {
  const Eigen::Index t = phi.rows();
  MatC cov = MatC::Identity(t, t) / alpha;
  cov.noalias() += phi * gamma.cwiseInverse().cast<Complex>().asDiagonal() * phi.adjoint();
  Eigen::LLT<MatC> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("log_evidence: marginal covariance is not positive definite");
  }
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < t; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i).real());
  const double quad = y.dot(llt.solve(y)).real();
  double value = -logdet - quad + hyper.a * std::log(alpha) - hyper.b * alpha;
  for (Eigen::Index j = 0; j < gamma.size(); ++j) {
    value += hyper.a * std::log(gamma(j)) - hyper.b * gamma(j);
  }
  return value;
}

// ---- wrappers ------------------------------------------------------------

Posterior posterior_moments(const SblState& state, const PilotMatrix& pilot, const Grid& grid,
                            const ArrayGeometry& geom, const VecC& y) {
  const MatC dict = build_dictionary(geom, grid, state.beta);
  return posterior_moments(state.alpha, state.gamma, pilot.x * dict, y);
}

VecR beta_gradient(const SblState& state, const Posterior& post, const PilotMatrix& pilot, const Grid& grid,
                   const ArrayGeometry& geom, const VecC& y, double alpha_next) {
  const MatC dict = build_dictionary(geom, grid, state.beta);
  const MatC deriv = build_dictionary_derivative(geom, grid, state.beta);
  return beta_gradient(alpha_next, post, dict, deriv, pilot.x, y);
}

VecC reconstruct_channel(const Grid& grid, const ArrayGeometry& geom, const VecR& beta,
                         const std::vector<int>& support, const PilotMatrix& pilot, const VecC& y) {
  const MatC dict = build_dictionary(geom, grid, beta);
  return reconstruct_channel(dict, pilot.x * dict, support, y);
}

double log_evidence(const SblState& state, const PilotMatrix& pilot, const Grid& grid,
                    const ArrayGeometry& geom, const VecC& y, const SblHyper& hyper) {
  const MatC dict = build_dictionary(geom, grid, state.beta);
  return log_evidence(state.alpha, state.gamma, pilot.x * dict, y, hyper);
}

SblState initial_state(const VecC& y, int grid_size) {
  SblState s;
  const Eigen::Index t = y.size();
  const Complex mean = y.sum() / static_cast<double>(t);
  double var = 0.0;
  for (Eigen::Index i = 0; i < t; ++i) var += std::norm(y(i) - mean);
  var /= static_cast<double>(t);
  s.alpha = 1.0 / std::max(var, 1e-12);
  s.gamma = VecR::Ones(grid_size);
  s.beta = VecR::Zero(grid_size);
  s.iter = 0;
  return s;
}

namespace {

SblResult run_sbl_impl(const ChannelSample& sample, const PilotMatrix& pilot, const Grid& grid,
                       const ArrayGeometry& geom, const SblHyper& hyper, bool update_offgrid) {
  const VecC& y = sample.y;
  if (y.size() != pilot.length) throw DimensionError("run_sbl: sample has no matching observation");

  SblState state = initial_state(y, grid.size());
  SblResult result;

  MatC dict = build_dictionary(geom, grid, state.beta);
  MatC phi = pilot.x * dict;
  VecC h_prev = reconstruct_channel(dict, phi, select_support(state.gamma, hyper.support_ratio, hyper.gamma_cap), y);

  int t = 0;
  try {
    for (t = 1; t <= hyper.max_iters; ++t) {
      const Posterior post_alpha = posterior_moments(state.alpha, state.gamma, phi, y);
      const double alpha_next = update_alpha(post_alpha, hyper, pilot.length);

      const Posterior post_gamma = hyper.recompute_gamma_posterior
                                       ? posterior_moments(alpha_next, state.gamma, phi, y)
                                       : post_alpha;
      const VecR gamma_next = update_gamma(post_gamma, hyper);

      VecR beta_next = state.beta;
      if (update_offgrid) {
        const MatC deriv = build_dictionary_derivative(geom, grid, state.beta);
        const Posterior post_beta = posterior_moments(alpha_next, gamma_next, phi, y);
        const VecR xi = beta_gradient(alpha_next, post_beta, dict, deriv, pilot.x, y);
        if (hyper.beta_backtracking) {
          // Halve the step until the evidence does not decrease; give up
          // (keep beta) after 10 halvings.
          const double ref = log_evidence(alpha_next, gamma_next, phi, y, hyper);
          double step = hyper.step_beta;
          bool accepted = false;
          for (int k = 0; k < 10 && !accepted; ++k) {
            const VecR candidate = update_beta(state.beta, xi, step, grid.resolution);
            const MatC cand_dict = build_dictionary(geom, grid, candidate);
            const double value = log_evidence(alpha_next, gamma_next, pilot.x * cand_dict, y, hyper);
            if (value >= ref - 1e-12) {
              beta_next = candidate;
              accepted = true;
            } else {
              step /= 2.0;
            }
          }
        } else {
          beta_next = update_beta(state.beta, xi, hyper.step_beta, grid.resolution);
        }
      }

      state.alpha = alpha_next;
      state.gamma = gamma_next;
      state.beta = beta_next;
      state.iter = t;

      dict = build_dictionary(geom, grid, state.beta);
      phi = pilot.x * dict;
      const std::vector<int> support = select_support(state.gamma, hyper.support_ratio, hyper.gamma_cap);
      const VecC h_hat = reconstruct_channel(dict, phi, support, y);
      const double change = (h_hat - h_prev).squaredNorm();
      result.trajectory.push_back({state.alpha, change, log_evidence(state.alpha, state.gamma, phi, y, hyper)});
      h_prev = h_hat;
      result.h_hat = h_hat;
      result.support = support;
      if (change <= hyper.delta) break;
    }
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " at iteration " + std::to_string(t));
  }

  result.state = state;
  result.iters_used = std::min(t, hyper.max_iters);
  result.nmse = nmse(result.h_hat, sample.h);
  return result;
}

}  // namespace

SblResult run_sbl(const ChannelSample& sample, const PilotMatrix& pilot, const Grid& grid,
                  const ArrayGeometry& geom, const SblHyper& hyper) {
  return run_sbl_impl(sample, pilot, grid, geom, hyper, true);
}

SblResult run_standard_sbl(const ChannelSample& sample, const PilotMatrix& pilot, const Grid& grid,
                           const ArrayGeometry& geom, const SblHyper& hyper) {
  return run_sbl_impl(sample, pilot, grid, geom, hyper, false);
}

double nmse(const VecC& h_hat, const VecC& h) {
  const double denom = h.squaredNorm();
  if (denom <= 0.0) throw DimensionError("nmse: reference channel has zero norm");
  return (h_hat - h).squaredNorm() / denom;
}

}  // namespace ogsbl
