#pragma once

#include <optional>
#include <utility>

#include "ogsbl/sbl.hpp"

namespace ogsbl {

/// Factors of a diag(d) + u v^H matrix; kept alongside the materialized
/// matrix so structured encodings can round-trip.
struct Rank1Factors {
  VecC diag;
  VecC u;
  VecC v;
};

/// Per-layer trainable parameter sets. Theta_1 = {a, b, c1, step_beta},
/// Theta_2 = {w1, w2, o1, o2, b1, b2, b3}.
struct LayerParams {
  double a = 0.0;
  double b = 0.0;
  VecR c1;         // Jhat
  VecR step_beta;  // Jhat, per-component step
  MatC w1;         // N x N, replaces the steering-derivative operator
  VecC b1;         // N
  MatC w2;         // T x T
  VecC b2;         // Jhat
  VecC b3;         // T
  MatC o1;         // Jhat x Jhat, additive covariance refinement
  VecC o2;         // Jhat, additive mean refinement

  std::optional<Rank1Factors> w1_factors;
  std::optional<Rank1Factors> w2_factors;
  std::optional<Rank1Factors> o1_factors;

  static LayerParams zeros(int n, int t, int jhat);
};

enum class CodecMode { scalar, diagonal, diagonal_rank1, full };

CodecMode codec_mode_from_string(const std::string& name);
std::string to_string(CodecMode mode);

/// Maps between LayerParams and a flat real action vector.
///
/// Layout: a, b, c1[Jhat], step_beta[Jhat], then complex blocks with each
/// entry stored as (re, im): w1 block, b1[N], w2 block, b2[Jhat], b3[T],
/// o1 block, o2[Jhat]. A square block holds 1 complex entry in scalar
/// mode (s*I), n in diagonal mode, 3n in diagonal-plus-rank1 mode
/// (d, u, v), and n^2 in full mode (column-major).
struct ParamCodec {
  CodecMode mode = CodecMode::diagonal_rank1;
  int n = 0;
  int t = 0;
  int jhat = 0;

  int block_len(int dim) const;
  int flat_len() const;
};

VecR encode_params(const LayerParams& params, const ParamCodec& codec);
LayerParams decode_params(const VecR& flat, const ParamCodec& codec);

/// One unfolded iteration with trainable parameters injected:
///   alpha branch uses Sigma~ = Sigma + O1 and mu~ = alpha Sigma~ Phi^H y + o2,
///   gamma branch recomputes both at the new alpha,
///   beta branch replaces a' with W1 a + b1 and c2 with W2 y + Phi b2 + b3.
/// Outputs are clamped to the state box: alpha, gamma in [1e-12, 1e12],
/// |beta| <= resolution/2.
SblState unfolded_layer(const SblState& state, const LayerParams& params, const MatC& dict,
                        const MatC& pilot_x, const VecC& y, double grid_resolution);
SblState unfolded_layer(const SblState& state, const LayerParams& params, const PilotMatrix& pilot,
                        const Grid& grid, const ArrayGeometry& geom, const VecC& y);

/// Closed-form (O1, o2) making one unfolded layer's alpha equal two plain
/// alpha iterations, for fixed gamma and beta:
///   kappa = (T + a) / (b + eta(alpha_t)),
///   O1 = (kappa Phi^H Phi + diag(gamma))^{-1} - (alpha_l Phi^H Phi + diag(gamma))^{-1},
///   o2 = kappa pinv(Phi) Phi Sigma(kappa) Phi^H y
///        - alpha_l pinv(Phi) Phi (Sigma(alpha_l) + O1) Phi^H y.
std::pair<MatC, VecC> theorem1_params(const SblState& state, const PilotMatrix& pilot, const Grid& grid,
                                      const ArrayGeometry& geom, const VecC& y, const SblHyper& hyper,
                                      double alpha_t, double alpha_l);

/// Diagnostic: |alpha_one_layer - alpha_two_iters| / |alpha_two_iters| for
/// the construction above. Reported, never asserted here.
double verify_one_layer_two_iters(const ChannelSample& sample, const PilotMatrix& pilot, const Grid& grid,
                                  const ArrayGeometry& geom, const SblHyper& hyper, double alpha_l);

/// Parameters that make one unfolded layer reproduce one plain SBL
/// iteration from the given state: O1 = o2 = 0 so the alpha and gamma
/// branches coincide, W1 realizes the steering derivative up to a factor
/// folded into c1, and the full beta gradient value is folded into c1 as
/// well (c1 and step_beta are per-component by design). Also used to
/// warm-start c1 at the plain algorithm's layer-0 value.
LayerParams plain_equivalent_params(const SblState& state, const PilotMatrix& pilot, const Grid& grid,
                                    const ArrayGeometry& geom, const VecC& y, const SblHyper& hyper);

/// diag(-j 2 pi (d/lambda) k): W1 value realizing a'(phi) = cos(phi) W1 a(phi).
MatC steering_derivative_operator(const ArrayGeometry& geom);

}  // namespace ogsbl
