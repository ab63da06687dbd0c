#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "varapprox/interp.hpp"
#include "varapprox/nn.hpp"
#include "varapprox/rng.hpp"
#include "varapprox/tensor.hpp"

namespace varapprox {

/// Autoregressive transformer of one scale: FFN o Attn over the scale's sequence.
struct ArScaleParams {
  AttnParams attn;
  FfnParams ffn;
};

/// Flow-matching network of one scale.
///
/// The modulation MLP maps c -> 6c; its output columns are split into six
/// c-wide chunks in the order alpha1, alpha2, beta1, beta2, gamma1, gamma2.
struct FlowMatchParams {
  Matrix mod_w;               // c x 6c
  std::vector<double> mod_b;  // 6c
  AttnParams attn;            // c -> c
  Matrix out_w;               // c x c
  std::vector<double> out_b;  // c
  double ln_eps = 1e-6;
};

struct FlowArConfig {
  std::size_t scales = 1;  // K
  std::size_t base = 2;    // a
  std::size_t h = 1;
  std::size_t w = 1;
  std::size_t c = 1;
  std::vector<ArScaleParams> tf;
  std::vector<FlowMatchParams> nn;
  std::size_t steps = 8;
  InterpOptions interp;

  /// r_i = a^(K - i) for 1-based scale i.
  std::size_t factor(std::size_t scale) const;
  /// (h / r_i, w / r_i).
  Shape2 scale_shape(std::size_t scale) const;
  /// Length of the concatenated sequence fed to TF_i: sum over j <= i of (h/r_j)(w/r_j).
  std::size_t sequence_length(std::size_t scale) const;
  void validate() const;
};

/// One point on the linear path between a Gaussian draw and a target map.
struct FlowState {
  std::size_t scale = 1;
  double t = 0.0;
  TokenMap f;   // F_t
  TokenMap y;   // target token map
  TokenMap f0;  // Gaussian draw
};

/// Y^i = down_sample(X, r_i) for i = 1..K, coarsest first.
std::vector<TokenMap> vae_tokenize(const TokenMap& x, const FlowArConfig& cfg);

/// Rows of Z_init followed by each previous map up-sampled to the next scale.
/// `previous` holds the maps of scales 1 .. scale-1.
Matrix build_ar_input(const TokenMap& z_init, std::span<const TokenMap> previous,
                      const FlowArConfig& cfg, std::size_t scale);

struct ArOutput {
  Matrix full;     // TF_i(Z^i)
  TokenMap block;  // last (h/r_i)(w/r_i) rows, tensorized
};

ArOutput ar_forward(std::size_t scale, const Matrix& z, const FlowArConfig& cfg);

/// t * Y + (1 - t) * F0.
TokenMap flow_interpolate(const TokenMap& y, const TokenMap& f0, double t);
/// Y - F0.
TokenMap flow_velocity(const TokenMap& y, const TokenMap& f0);
FlowState make_flow_state(std::size_t scale, const TokenMap& y, const TokenMap& f0, double t);

/// Every intermediate of one flow-matching evaluation, rows = tokens.
struct FlowMatchTrace {
  Matrix alpha1, alpha2, beta1, beta2, gamma1, gamma2;
  Matrix attended;  // Attn(gamma1 o LN(F_t) + beta1) o alpha1
  Matrix pre_gate;  // MLP(gamma2 o LN(attended) + beta2)
  Matrix output;    // pre_gate o alpha2
};

FlowMatchTrace flow_matching_trace(const TokenMap& f_t, const TokenMap& y_hat, double t,
                                   const FlowMatchParams& p);
TokenMap flow_matching_forward(const TokenMap& f_t, const TokenMap& y_hat, double t,
                               const FlowMatchParams& p);

/// Network used by the loss; sees the full flow state so test oracles can return V exactly.
using LossNet = std::function<TokenMap(const FlowState& state, const TokenMap& cond)>;
/// Network used by inference: (scale, F, condition, t) -> velocity.
using VelocityNet =
    std::function<TokenMap(std::size_t scale, const TokenMap& f, const TokenMap& cond, double t)>;

LossNet default_loss_net(const FlowArConfig& cfg);
VelocityNet default_velocity_net(const FlowArConfig& cfg);

struct LossDraw {
  double t = 0.0;
  TokenMap f0;
};
/// draws[i][k] is sample k of scale i + 1.
using LossDraws = std::vector<std::vector<LossDraw>>;

/// t ~ Unif[0, 1] and F0 ~ N(0, 1) per scale; scale i uses substream "scale/i".
LossDraws sample_loss_draws(const FlowArConfig& cfg, std::size_t samples, const Rng& rng);

struct LossBreakdown {
  double total = 0.0;
  std::vector<double> per_scale;
  /// Y-hat^i of every scale (teacher-forced AR outputs).
  std::vector<TokenMap> conditions;
  std::vector<TokenMap> targets;
};

/// Sum over scales of the sample mean of ||NN_i(F_t, Y-hat^i, t) - V^i||_F^2.
/// A network off by a constant c everywhere therefore scores c^2 * sum_i (h/r_i)(w/r_i) c.
LossBreakdown flowar_loss_detailed(const FlowArConfig& cfg, const TokenMap& x,
                                   const TokenMap& z_init, const LossDraws& draws,
                                   const LossNet& net);
double flowar_loss(const FlowArConfig& cfg, const TokenMap& x, const TokenMap& z_init,
                   const LossDraws& draws, const LossNet& net);
double flowar_loss(const FlowArConfig& cfg, const TokenMap& x, const TokenMap& z_init,
                   const LossDraws& draws);

struct InferScale {
  Shape2 shape;
  std::size_t sequence_length = 0;
  TokenMap f0;
  TokenMap cond;   // s_i
  TokenMap s_hat;  // integrated map at t = 1
};

struct FlowArInference {
  TokenMap output;  // s-hat_K
  std::vector<InferScale> scales;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
};

/// Coarse-to-fine sampling with `steps` explicit Euler steps per scale:
/// F <- F + (1/T) NN_i(F, s_i, k/T). steps == 1 is a single network evaluation at t = 0.
/// Throws NumericalError naming scale and step if a non-finite value appears.
FlowArInference flowar_infer(const FlowArConfig& cfg, const TokenMap& z_init, std::uint64_t seed,
                             std::size_t steps, const VelocityNet& net);
FlowArInference flowar_infer(const FlowArConfig& cfg, const TokenMap& z_init, std::uint64_t seed,
                             std::size_t steps);

/// Seeded Gaussian parameters (scale 1/sqrt(c)); modulation bias centered so gates start near 1.
FlowArConfig random_flowar_config(std::size_t scales, std::size_t base, std::size_t h,
                                  std::size_t w, std::size_t c, std::size_t hidden, Rng& rng,
                                  std::size_t steps = 8);

}  // namespace varapprox
