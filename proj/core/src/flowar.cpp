#include "varapprox/flowar.hpp"

#include <cmath>
#include <string>

#include "varapprox/error.hpp"

namespace varapprox {

namespace {

std::string scale_tag(std::size_t scale) { return "scale " + std::to_string(scale); }

void require_same(const TokenMap& a, const TokenMap& b, const char* op) {
  if (a.h() != b.h() || a.w() != b.w() || a.d() != b.d()) {
    throw ShapeError(std::string(op) + ": token maps differ in shape");
  }
}

}  // namespace

std::size_t FlowArConfig::factor(std::size_t scale) const {
  if (scale == 0 || scale > scales) throw ShapeError("flowar: scale index out of range");
  std::size_t r = 1;
  for (std::size_t k = scale; k < scales; ++k) r *= base;
  return r;
}

Shape2 FlowArConfig::scale_shape(std::size_t scale) const {
  const std::size_t r = factor(scale);
  return {h / r, w / r};
}

std::size_t FlowArConfig::sequence_length(std::size_t scale) const {
  std::size_t n = 0;
  for (std::size_t j = 1; j <= scale; ++j) n += scale_shape(j).area();
  return n;
}

void FlowArConfig::validate() const {
  if (scales == 0 || base == 0 || h == 0 || w == 0 || c == 0) {
    throw ShapeError("flowar config: K, a, h, w, c must be positive");
  }
  const std::size_t r1 = factor(1);
  if (h % r1 != 0 || w % r1 != 0) {
    throw ShapeError("flowar config: r_1 = " + std::to_string(r1) + " does not divide " +
                     std::to_string(h) + "x" + std::to_string(w));
  }
  if (tf.size() != scales || nn.size() != scales) {
    throw ShapeError("flowar config: need one TF and one NN parameter set per scale");
  }
  for (std::size_t i = 0; i < scales; ++i) {
    const auto& s = tf[i];
    const auto& f = nn[i];
    try {
      s.attn.validate();
      s.ffn.validate();
      f.attn.validate();
      if (s.attn.model_dim() != c || s.attn.output_dim() != c || s.ffn.model_dim() != c) {
        throw ShapeError("TF is not c -> c");
      }
      if (f.mod_w.rows() != c || f.mod_w.cols() != 6 * c || f.mod_b.size() != 6 * c) {
        throw ShapeError("modulation MLP must be c -> 6c");
      }
      if (f.attn.model_dim() != c || f.attn.output_dim() != c) {
        throw ShapeError("NN attention is not c -> c");
      }
      if (f.out_w.rows() != c || f.out_w.cols() != c || f.out_b.size() != c) {
        throw ShapeError("output MLP must be c -> c");
      }
    } catch (const ShapeError& e) {
      throw ShapeError("flowar config " + scale_tag(i + 1) + ": " + e.what());
    }
  }
}

std::vector<TokenMap> vae_tokenize(const TokenMap& x, const FlowArConfig& cfg) {
  if (x.h() != cfg.h || x.w() != cfg.w || x.d() != cfg.c) {
    throw ShapeError("vae_tokenize: latent shape does not match config");
  }
  std::vector<TokenMap> out;
  out.reserve(cfg.scales);
  for (std::size_t i = 1; i <= cfg.scales; ++i) out.push_back(down_sample(x, cfg.factor(i)));
  return out;
}

Matrix build_ar_input(const TokenMap& z_init, std::span<const TokenMap> previous,
                      const FlowArConfig& cfg, std::size_t scale) {
  if (z_init.shape() != cfg.scale_shape(1) || z_init.d() != cfg.c) {
    throw ShapeError("build_ar_input: Z_init must have the scale-1 shape");
  }
  if (previous.size() != scale - 1) {
    throw ShapeError("build_ar_input: " + scale_tag(scale) + " needs " +
                     std::to_string(scale - 1) + " previous maps, got " +
                     std::to_string(previous.size()));
  }
  std::vector<Matrix> parts;
  parts.push_back(matricize(z_init));
  for (std::size_t j = 1; j < scale; ++j) {
    const TokenMap& m = previous[j - 1];
    if (m.shape() != cfg.scale_shape(j) || m.d() != cfg.c) {
      throw ShapeError("build_ar_input: map of " + scale_tag(j) + " has the wrong shape");
    }
    const Shape2 next = cfg.scale_shape(j + 1);
    parts.push_back(matricize(up_interpolate(m, next.h, next.w, cfg.interp)));
  }
  return vstack(parts);
}

ArOutput ar_forward(std::size_t scale, const Matrix& z, const FlowArConfig& cfg) {
  const std::size_t expected = cfg.sequence_length(scale);
  if (z.rows() != expected || z.cols() != cfg.c) {
    throw ShapeError("ar_forward: " + scale_tag(scale) + " expects a " + std::to_string(expected) +
                     "x" + std::to_string(cfg.c) + " sequence, got " + std::to_string(z.rows()) +
                     "x" + std::to_string(z.cols()));
  }
  const auto& p = cfg.tf.at(scale - 1);
  ArOutput out;
  out.full = ffn(attention(z, p.attn), p.ffn);
  const Shape2 s = cfg.scale_shape(scale);
  out.block = tensorize(out.full.row_block(expected - s.area(), s.area()), s.h, s.w);
  return out;
}

TokenMap flow_interpolate(const TokenMap& y, const TokenMap& f0, double t) {
  require_same(y, f0, "flow_interpolate");
  TokenMap out = y;
  auto o = out.data();
  const auto a = y.data();
  const auto b = f0.data();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] = t * a[k] + (1.0 - t) * b[k];
  return out;
}

TokenMap flow_velocity(const TokenMap& y, const TokenMap& f0) {
  require_same(y, f0, "flow_velocity");
  return y - f0;
}

FlowState make_flow_state(std::size_t scale, const TokenMap& y, const TokenMap& f0, double t) {
  return {scale, t, flow_interpolate(y, f0, t), y, f0};
}

FlowMatchTrace flow_matching_trace(const TokenMap& f_t, const TokenMap& y_hat, double t,
                                   const FlowMatchParams& p) {
  require_same(f_t, y_hat, "flow_matching_forward");
  const std::size_t c = f_t.d();
  Matrix cond = matricize(y_hat);
  for (double& v : cond.data()) v += t;
  const Matrix mod = mlp(cond, p.mod_w, p.mod_b);
  if (mod.cols() != 6 * c) throw ShapeError("flow_matching_forward: modulation must be 6c wide");

  FlowMatchTrace tr;
  tr.alpha1 = mod.col_block(0, c);
  tr.alpha2 = mod.col_block(c, c);
  tr.beta1 = mod.col_block(2 * c, c);
  tr.beta2 = mod.col_block(3 * c, c);
  tr.gamma1 = mod.col_block(4 * c, c);
  tr.gamma2 = mod.col_block(5 * c, c);

  const Matrix x1 = hadamard(tr.gamma1, layer_norm(matricize(f_t), p.ln_eps)) + tr.beta1;
  tr.attended = hadamard(attention(x1, p.attn), tr.alpha1);
  const Matrix x2 = hadamard(tr.gamma2, layer_norm(tr.attended, p.ln_eps)) + tr.beta2;
  tr.pre_gate = mlp(x2, p.out_w, p.out_b);
  tr.output = hadamard(tr.pre_gate, tr.alpha2);
  return tr;
}

TokenMap flow_matching_forward(const TokenMap& f_t, const TokenMap& y_hat, double t,
                               const FlowMatchParams& p) {
  return tensorize(flow_matching_trace(f_t, y_hat, t, p).output, f_t.h(), f_t.w());
}

LossNet default_loss_net(const FlowArConfig& cfg) {
  return [nn = cfg.nn](const FlowState& s, const TokenMap& cond) {
    return flow_matching_forward(s.f, cond, s.t, nn.at(s.scale - 1));
  };
}

VelocityNet default_velocity_net(const FlowArConfig& cfg) {
  return [nn = cfg.nn](std::size_t scale, const TokenMap& f, const TokenMap& cond, double t) {
    return flow_matching_forward(f, cond, t, nn.at(scale - 1));
  };
}

LossDraws sample_loss_draws(const FlowArConfig& cfg, std::size_t samples, const Rng& rng) {
  LossDraws draws(cfg.scales);
  for (std::size_t i = 1; i <= cfg.scales; ++i) {
    Rng r = rng.substream("scale/" + std::to_string(i));
    const Shape2 s = cfg.scale_shape(i);
    for (std::size_t k = 0; k < samples; ++k) {
      LossDraw d;
      d.t = r.uniform(0.0, 1.0);
      d.f0 = r.gaussian_map(s.h, s.w, cfg.c);
      draws[i - 1].push_back(std::move(d));
    }
  }
  return draws;
}

LossBreakdown flowar_loss_detailed(const FlowArConfig& cfg, const TokenMap& x,
                                   const TokenMap& z_init, const LossDraws& draws,
                                   const LossNet& net) {
  cfg.validate();
  if (draws.size() != cfg.scales) throw ShapeError("flowar_loss: need draws for every scale");
  LossBreakdown out;
  out.targets = vae_tokenize(x, cfg);
  for (std::size_t i = 1; i <= cfg.scales; ++i) {
    const std::span<const TokenMap> prev(out.targets.data(), i - 1);
    const Matrix z = build_ar_input(z_init, prev, cfg, i);
    out.conditions.push_back(ar_forward(i, z, cfg).block);
    const auto& samples = draws[i - 1];
    if (samples.empty()) throw ShapeError("flowar_loss: " + scale_tag(i) + " has no draws");
    double acc = 0.0;
    for (const auto& d : samples) {
      const FlowState state = make_flow_state(i, out.targets[i - 1], d.f0, d.t);
      const TokenMap pred = net(state, out.conditions.back());
      const TokenMap resid = pred - flow_velocity(state.y, state.f0);
      for (double v : resid.data()) acc += v * v;
    }
    out.per_scale.push_back(acc / static_cast<double>(samples.size()));
    out.total += out.per_scale.back();
  }
  return out;
}

double flowar_loss(const FlowArConfig& cfg, const TokenMap& x, const TokenMap& z_init,
                   const LossDraws& draws, const LossNet& net) {
  return flowar_loss_detailed(cfg, x, z_init, draws, net).total;
}

double flowar_loss(const FlowArConfig& cfg, const TokenMap& x, const TokenMap& z_init,
                   const LossDraws& draws) {
  return flowar_loss(cfg, x, z_init, draws, default_loss_net(cfg));
}

FlowArInference flowar_infer(const FlowArConfig& cfg, const TokenMap& z_init, std::uint64_t seed,
                             std::size_t steps, const VelocityNet& net) {
  cfg.validate();
  if (steps == 0) throw DomainError("flowar_infer: steps must be positive");
  FlowArInference out;
  out.seed = seed;
  out.steps = steps;
  const Rng root(seed, "flowar/infer");
  std::vector<TokenMap> s_hats;
  const double dt = 1.0 / static_cast<double>(steps);
  for (std::size_t i = 1; i <= cfg.scales; ++i) {
    const Matrix z = build_ar_input(z_init, s_hats, cfg, i);
    InferScale rec;
    rec.shape = cfg.scale_shape(i);
    rec.sequence_length = z.rows();
    rec.cond = ar_forward(i, z, cfg).block;
    Rng r = root.substream("scale/" + std::to_string(i));
    rec.f0 = r.gaussian_map(rec.shape.h, rec.shape.w, cfg.c);
    TokenMap f = rec.f0;
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      const TokenMap v = net(i, f, rec.cond, t);
      if (v.shape() != f.shape() || v.d() != f.d()) {
        throw ShapeError("flowar_infer: velocity shape mismatch at " + scale_tag(i));
      }
      auto fd = f.data();
      const auto vd = v.data();
      for (std::size_t e = 0; e < fd.size(); ++e) {
        fd[e] += dt * vd[e];
        if (!std::isfinite(fd[e])) {
          throw NumericalError("flowar_infer: non-finite value at " + scale_tag(i) + ", step " +
                               std::to_string(k + 1));
        }
      }
    }
    rec.s_hat = f;
    s_hats.push_back(f);
    out.scales.push_back(std::move(rec));
  }
  out.output = s_hats.back();
  return out;
}

FlowArInference flowar_infer(const FlowArConfig& cfg, const TokenMap& z_init, std::uint64_t seed,
                             std::size_t steps) {
  return flowar_infer(cfg, z_init, seed, steps, default_velocity_net(cfg));
}

FlowArConfig random_flowar_config(std::size_t scales, std::size_t base, std::size_t h,
                                  std::size_t w, std::size_t c, std::size_t hidden, Rng& rng,
                                  std::size_t steps) {
  FlowArConfig cfg;
  cfg.scales = scales;
  cfg.base = base;
  cfg.h = h;
  cfg.w = w;
  cfg.c = c;
  cfg.steps = steps;
  const double scale = 1.0 / std::sqrt(static_cast<double>(c));
  auto attn = [&] {
    AttnParams a;
    a.w_q = rng.gaussian_matrix(c, c, scale);
    a.w_k = rng.gaussian_matrix(c, c, scale);
    a.w_v = rng.gaussian_matrix(c, c, scale);
    return a;
  };
  for (std::size_t i = 0; i < scales; ++i) {
    ArScaleParams tf;
    tf.attn = attn();
    tf.ffn.w1 = rng.gaussian_matrix(hidden, c, scale);
    tf.ffn.b1 = rng.gaussian_vector(hidden, scale);
    tf.ffn.w2 = rng.gaussian_matrix(c, hidden, scale);
    tf.ffn.b2 = rng.gaussian_vector(c, scale);
    cfg.tf.push_back(std::move(tf));

    FlowMatchParams nn;
    nn.mod_w = rng.gaussian_matrix(c, 6 * c, 0.1 * scale);
    nn.mod_b = rng.gaussian_vector(6 * c, 0.1 * scale);
    for (std::size_t k = 0; k < c; ++k) {
      nn.mod_b[k] += 1.0;          // alpha1
      nn.mod_b[c + k] += 1.0;      // alpha2
      nn.mod_b[4 * c + k] += 1.0;  // gamma1
      nn.mod_b[5 * c + k] += 1.0;  // gamma2
    }
    nn.attn = attn();
    nn.out_w = rng.gaussian_matrix(c, c, scale);
    nn.out_b = rng.gaussian_vector(c, scale);
    cfg.nn.push_back(std::move(nn));
  }
  cfg.validate();
  return cfg;
}

}  // namespace varapprox
