#include "ogsbl/unfolding.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

namespace ogsbl {

namespace {

constexpr double kStateFloor = 1e-12;
constexpr double kStateCap = 1e12;

double clamp_positive(double x) {
  if (std::isnan(x)) return kStateFloor;
  return std::clamp(x, kStateFloor, kStateCap);
}

}  // namespace

LayerParams LayerParams::zeros(int n, int t, int jhat) {
  LayerParams p;
  p.c1 = VecR::Zero(jhat);
  p.step_beta = VecR::Zero(jhat);
  p.w1 = MatC::Zero(n, n);
  p.b1 = VecC::Zero(n);
  p.w2 = MatC::Zero(t, t);
  p.b2 = VecC::Zero(jhat);
  p.b3 = VecC::Zero(t);
  p.o1 = MatC::Zero(jhat, jhat);
  p.o2 = VecC::Zero(jhat);
  return p;
}

CodecMode codec_mode_from_string(const std::string& name) {
  if (name == "scalar") return CodecMode::scalar;
  if (name == "diagonal") return CodecMode::diagonal;
  if (name == "diagonal-plus-rank1") return CodecMode::diagonal_rank1;
  if (name == "full") return CodecMode::full;
  throw DimensionError("unknown codec mode: " + name);
}

std::string to_string(CodecMode mode) {
  switch (mode) {
    case CodecMode::scalar: return "scalar";
    case CodecMode::diagonal: return "diagonal";
    case CodecMode::diagonal_rank1: return "diagonal-plus-rank1";
    case CodecMode::full: return "full";
  }
  return "?";
}

int ParamCodec::block_len(int dim) const {
  switch (mode) {
    case CodecMode::scalar: return 1;
    case CodecMode::diagonal: return dim;
    case CodecMode::diagonal_rank1: return 3 * dim;
    case CodecMode::full: return dim * dim;
  }
  return 0;
}

int ParamCodec::flat_len() const {
  return 2 + 2 * jhat + 2 * (block_len(n) + n + block_len(t) + jhat + t + block_len(jhat) + jhat);
}

namespace {

void write_complex(VecR& flat, int& pos, Complex v) {
  flat(pos++) = v.real();
  flat(pos++) = v.imag();
}

Complex read_complex(const VecR& flat, int& pos) {
  const double re = flat(pos++);
  const double im = flat(pos++);
  return {re, im};
}

void write_cvec(VecR& flat, int& pos, const VecC& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) write_complex(flat, pos, v(i));
}

VecC read_cvec(const VecR& flat, int& pos, int n) {
  VecC v(n);
  for (int i = 0; i < n; ++i) v(i) = read_complex(flat, pos);
  return v;
}

void write_block(VecR& flat, int& pos, const MatC& m, const std::optional<Rank1Factors>& factors,
                 const ParamCodec& codec) {
  switch (codec.mode) {
    case CodecMode::scalar:
      write_complex(flat, pos, m(0, 0));
      break;
    case CodecMode::diagonal:
      write_cvec(flat, pos, m.diagonal());
      break;
    case CodecMode::diagonal_rank1: {
      if (!factors) {
        throw DimensionError("encode_params: diagonal-plus-rank1 matrix without stored factors");
      }
      write_cvec(flat, pos, factors->diag);
      write_cvec(flat, pos, factors->u);
      write_cvec(flat, pos, factors->v);
      break;
    }
    case CodecMode::full:
      for (Eigen::Index c = 0; c < m.cols(); ++c) write_cvec(flat, pos, m.col(c));
      break;
  }
}

MatC read_block(const VecR& flat, int& pos, int dim, const ParamCodec& codec,
                std::optional<Rank1Factors>* factors_out) {
  switch (codec.mode) {
    case CodecMode::scalar: {
      const Complex s = read_complex(flat, pos);
      return s * MatC::Identity(dim, dim);
    }
    case CodecMode::diagonal: {
      const VecC d = read_cvec(flat, pos, dim);
      MatC m = MatC::Zero(dim, dim);
      m.diagonal() = d;
      return m;
    }
    case CodecMode::diagonal_rank1: {
      Rank1Factors f;
      f.diag = read_cvec(flat, pos, dim);
      f.u = read_cvec(flat, pos, dim);
      f.v = read_cvec(flat, pos, dim);
      MatC m = f.u * f.v.adjoint();
      m.diagonal() += f.diag;
      if (factors_out) *factors_out = std::move(f);
      return m;
    }
    case CodecMode::full: {
      MatC m(dim, dim);
      for (int c = 0; c < dim; ++c) m.col(c) = read_cvec(flat, pos, dim);
      return m;
    }
  }
  return MatC();
}

}  // namespace

VecR encode_params(const LayerParams& params, const ParamCodec& codec) {
  if (params.c1.size() != codec.jhat || params.b1.size() != codec.n || params.b3.size() != codec.t) {
    throw DimensionError("encode_params: parameter dimensions do not match codec");
  }
  VecR flat(codec.flat_len());
  int pos = 0;
  flat(pos++) = params.a;
  flat(pos++) = params.b;
  flat.segment(pos, codec.jhat) = params.c1;
  pos += codec.jhat;
  flat.segment(pos, codec.jhat) = params.step_beta;
  pos += codec.jhat;
  write_block(flat, pos, params.w1, params.w1_factors, codec);
  write_cvec(flat, pos, params.b1);
  write_block(flat, pos, params.w2, params.w2_factors, codec);
  write_cvec(flat, pos, params.b2);
  write_cvec(flat, pos, params.b3);
  write_block(flat, pos, params.o1, params.o1_factors, codec);
  write_cvec(flat, pos, params.o2);
  return flat;
}

LayerParams decode_params(const VecR& flat, const ParamCodec& codec) {
  if (flat.size() != codec.flat_len()) {
    throw DimensionError("decode_params: flat vector length " + std::to_string(flat.size()) +
                         " does not match codec layout " + std::to_string(codec.flat_len()));
  }
  LayerParams p;
  int pos = 0;
  p.a = flat(pos++);
  p.b = flat(pos++);
  p.c1 = flat.segment(pos, codec.jhat);
  pos += codec.jhat;
  p.step_beta = flat.segment(pos, codec.jhat);
  pos += codec.jhat;
  p.w1 = read_block(flat, pos, codec.n, codec, &p.w1_factors);
  p.b1 = read_cvec(flat, pos, codec.n);
  p.w2 = read_block(flat, pos, codec.t, codec, &p.w2_factors);
  p.b2 = read_cvec(flat, pos, codec.jhat);
  p.b3 = read_cvec(flat, pos, codec.t);
  p.o1 = read_block(flat, pos, codec.jhat, codec, &p.o1_factors);
  p.o2 = read_cvec(flat, pos, codec.jhat);
  return p;
}

SblState unfolded_layer(const SblState& state, const LayerParams& params, const MatC& dict,
                        const MatC& pilot_x, const VecC& y, double grid_resolution) {
  const int pilot_length = static_cast<int>(pilot_x.rows());
  const Eigen::Index jhat = dict.cols();
  if (params.c1.size() != jhat || state.gamma.size() != jhat) {
    throw DimensionError("unfolded_layer: parameter dimensions do not match problem");
  }
  const MatC phi = pilot_x * dict;
  const MatC gram = phi.adjoint() * phi;

  // alpha branch at the incoming state.
  const Posterior post = posterior_moments(state.alpha, state.gamma, phi, y);
  const MatC sigma_tilde = post.sigma + params.o1;
  const VecC mu_tilde = state.alpha * (sigma_tilde * (phi.adjoint() * y)) + params.o2;
  const double eta_tilde = (gram * sigma_tilde).trace().real() + (y - phi * mu_tilde).squaredNorm();
  const double alpha_next = clamp_positive((pilot_length + params.a) / (params.b + eta_tilde));

  // gamma branch, moments refreshed at the new alpha.
  const Posterior post2 = posterior_moments(alpha_next, state.gamma, phi, y);
  const MatC sigma_tilde2 = post2.sigma + params.o1;
  const VecC mu_tilde2 = alpha_next * (sigma_tilde2 * (phi.adjoint() * y)) + params.o2;
  VecR gamma_next(jhat);
  for (Eigen::Index j = 0; j < jhat; ++j) {
    const double lambda_jj = sigma_tilde2(j, j).real() + std::norm(mu_tilde2(j));
    gamma_next(j) = clamp_positive((params.a + 1.0) / (params.b + lambda_jj));
  }

  // beta branch: a' replaced by W1 a + b1, c2 by W2 y + Phi b2 + b3.
  const VecC c2_shared = params.w2 * y + phi * params.b2 + params.b3;
  const MatC xhx = pilot_x.adjoint() * pilot_x;
  VecR xi(jhat);
  for (Eigen::Index j = 0; j < jhat; ++j) {
    const VecC g = params.w1 * dict.col(j) + params.b1;
    const Complex term1 = g.dot(xhx * dict.col(j));  // g^H X^H X a_j
    const Complex term2 = g.dot(pilot_x.adjoint() * c2_shared);
    xi(j) = term1.real() * params.c1(j) + term2.real();
  }
  const VecR beta_next = update_beta(state.beta, xi, params.step_beta, grid_resolution);

  SblState next;
  next.alpha = alpha_next;
  next.gamma = gamma_next;
  next.beta = beta_next;
  next.iter = state.iter + 1;
  return next;
}

SblState unfolded_layer(const SblState& state, const LayerParams& params, const PilotMatrix& pilot,
                        const Grid& grid, const ArrayGeometry& geom, const VecC& y) {
  const MatC dict = build_dictionary(geom, grid, state.beta);
  return unfolded_layer(state, params, dict, pilot.x, y, grid.resolution);
}

std::pair<MatC, VecC> theorem1_params(const SblState& state, const PilotMatrix& pilot, const Grid& grid,
                                      const ArrayGeometry& geom, const VecC& y, const SblHyper& hyper,
                                      double alpha_t, double alpha_l) {
  const MatC dict = build_dictionary(geom, grid, state.beta);
  const MatC phi = pilot.x * dict;

  const Posterior post_t = posterior_moments(alpha_t, state.gamma, phi, y);
  const double kappa = (pilot.length + hyper.a) / (hyper.b + post_t.eta);

  const Posterior post_kappa = posterior_moments(kappa, state.gamma, phi, y);
  const Posterior post_l = posterior_moments(alpha_l, state.gamma, phi, y);
  const MatC o1 = post_kappa.sigma - post_l.sigma;

  const MatC pinv_phi = phi.completeOrthogonalDecomposition().pseudoInverse();
  const VecC phi_h_y = phi.adjoint() * y;
  const VecC o2 = kappa * (pinv_phi * (phi * (post_kappa.sigma * phi_h_y))) -
                  alpha_l * (pinv_phi * (phi * ((post_l.sigma + o1) * phi_h_y)));
  return {o1, o2};
}

double verify_one_layer_two_iters(const ChannelSample& sample, const PilotMatrix& pilot, const Grid& grid,
                                  const ArrayGeometry& geom, const SblHyper& hyper, double alpha_l) {
  const VecC& y = sample.y;
  SblState state = initial_state(y, grid.size());
  const double alpha_t = state.alpha;

  const MatC dict = build_dictionary(geom, grid, state.beta);
  const MatC phi = pilot.x * dict;

  // Two plain alpha iterations with gamma and beta held fixed.
  const Posterior p0 = posterior_moments(alpha_t, state.gamma, phi, y);
  const double alpha1 = update_alpha(p0, hyper, pilot.length);
  const Posterior p1 = posterior_moments(alpha1, state.gamma, phi, y);
  const double alpha2 = update_alpha(p1, hyper, pilot.length);

  // One unfolded layer from alpha_l with the closed-form (O1, o2).
  auto [o1, o2] = theorem1_params(state, pilot, grid, geom, y, hyper, alpha_t, alpha_l);
  LayerParams params = LayerParams::zeros(geom.n_antennas, pilot.length, grid.size());
  params.a = hyper.a;
  params.b = hyper.b;
  params.o1 = o1;
  params.o2 = o2;
  state.alpha = alpha_l;
  const SblState out = unfolded_layer(state, params, dict, pilot.x, y, grid.resolution);

  return std::abs(out.alpha - alpha2) / std::abs(alpha2);
}

LayerParams plain_equivalent_params(const SblState& state, const PilotMatrix& pilot, const Grid& grid,
                                    const ArrayGeometry& geom, const VecC& y, const SblHyper& hyper) {
  const MatC dict = build_dictionary(geom, grid, state.beta);
  const MatC deriv = build_dictionary_derivative(geom, grid, state.beta);
  const MatC phi = pilot.x * dict;

  // The plain iteration's beta gradient from this state.
  const Posterior post_alpha = posterior_moments(state.alpha, state.gamma, phi, y);
  const double alpha_next = update_alpha(post_alpha, hyper, pilot.length);
  const Posterior post_gamma = hyper.recompute_gamma_posterior
                                   ? posterior_moments(alpha_next, state.gamma, phi, y)
                                   : post_alpha;
  const VecR gamma_next = update_gamma(post_gamma, hyper);
  const Posterior post_beta = posterior_moments(alpha_next, gamma_next, phi, y);
  const VecR xi = beta_gradient(alpha_next, post_beta, dict, deriv, pilot.x, y);

  LayerParams p = LayerParams::zeros(geom.n_antennas, pilot.length, grid.size());
  p.a = hyper.a;
  p.b = hyper.b;
  p.w1 = steering_derivative_operator(geom);
  p.step_beta = VecR::Constant(grid.size(), hyper.step_beta);

  // With c2's replacement zeroed, the layer computes
  //   xi~_j = Re{(W1 a_j)^H X^H X a_j} * c1_j,
  // so folding the target gradient into the per-component c1 reproduces the
  // plain step exactly.
  const MatC xhx = pilot.x.adjoint() * pilot.x;
  for (int j = 0; j < grid.size(); ++j) {
    const VecC g = p.w1 * dict.col(j);
    const double denom = g.dot(xhx * dict.col(j)).real();
    const double scale = std::max(1.0, xhx.norm());
    if (std::abs(denom) > 1e-14 * scale) {
      p.c1(j) = xi(j) / denom;
    } else if (std::abs(xi(j)) <= 1e-14 * scale) {
      p.c1(j) = 0.0;
      p.step_beta(j) = 0.0;
    } else {
      throw NumericalError("plain_equivalent_params: degenerate steering direction");
    }
  }
  return p;
}

MatC steering_derivative_operator(const ArrayGeometry& geom) {
  const int n = geom.n_antennas;
  MatC m = MatC::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    m(k, k) = Complex(0.0, -2.0 * std::numbers::pi * geom.spacing_ratio * k);
  }
  return m;
}

}  // namespace ogsbl
