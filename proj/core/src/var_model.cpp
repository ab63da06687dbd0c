#include "varapprox/var_model.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "varapprox/error.hpp"

namespace varapprox {

namespace {

std::string shape_str(Shape2 s) { return std::to_string(s.h) + "x" + std::to_string(s.w); }

}  // namespace

void ScaleSchedule::validate() const {
  if (levels.empty()) throw ShapeError("schedule: no levels");
  if (d == 0) throw ShapeError("schedule: d must be positive");
  if (levels.front() != Shape2{1, 1}) throw ShapeError("schedule: level 1 must be 1x1");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i].h < levels[i - 1].h || levels[i].w < levels[i - 1].w) {
      throw ShapeError("schedule: level " + std::to_string(i + 1) + " (" + shape_str(levels[i]) +
                       ") shrinks level " + std::to_string(i) + " (" + shape_str(levels[i - 1]) +
                       ")");
    }
  }
}

std::size_t ScaleSchedule::tokens_through(std::size_t count) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < count && i < levels.size(); ++i) n += levels[i].area();
  return n;
}

Matrix TokenwiseMap::apply(const Matrix& x) const {
  switch (kind) {
    case TokenwiseKind::kIdentity:
      return x;
    case TokenwiseKind::kAffine:
      return mlp(x, w, b);
    case TokenwiseKind::kLayerNorm:
      return layer_norm(x, ln_eps);
  }
  return x;
}

std::string_view to_string(BlockOrder order) noexcept {
  return order == BlockOrder::kFfnAttnUp ? "ffn_attn_up" : "g_attn_up";
}

BlockOrder block_order_from_string(std::string_view name) {
  if (name == "ffn_attn_up") return BlockOrder::kFfnAttnUp;
  if (name == "g_attn_up") return BlockOrder::kGAttnUp;
  throw DomainError("unknown block order '" + std::string(name) + "'");
}

std::size_t UpPlan::rows_in() const noexcept {
  std::size_t n = 0;
  for (const auto& s : from) n += s.area();
  return n;
}

std::size_t UpPlan::rows_out() const noexcept {
  std::size_t n = 0;
  for (const auto& s : to) n += s.area();
  return n;
}

Matrix apply_up(const Matrix& x, const UpPlan& plan, const InterpOptions& interp,
                const Matrix* x_init) {
  if (!plan.grows() && plan.to.size() != plan.from.size()) {
    throw ShapeError("up stage: 'to' must have as many maps as 'from', or one more");
  }
  if (x.rows() != plan.rows_in()) {
    throw ShapeError("up stage: input has " + std::to_string(x.rows()) + " rows, plan expects " +
                     std::to_string(plan.rows_in()));
  }
  std::vector<Matrix> parts;
  parts.reserve(plan.to.size());
  std::size_t offset = 0;
  if (plan.grows()) {
    if (x_init == nullptr) throw ShapeError("up stage: pyramid growth needs X_init");
    if (plan.to.front() != Shape2{1, 1} || x_init->rows() != 1) {
      throw ShapeError("up stage: X_init must be a single 1x1 token");
    }
    parts.push_back(*x_init);
  }
  const std::size_t shift = plan.grows() ? 1 : 0;
  for (std::size_t i = 0; i < plan.from.size(); ++i) {
    const Shape2 src = plan.from[i];
    const Shape2 dst = plan.to[i + shift];
    const Matrix block = x.row_block(offset, src.area());
    offset += src.area();
    if (src == dst) {
      parts.push_back(block);
    } else {
      parts.push_back(matricize(up_interpolate(tensorize(block, src.h, src.w), dst.h, dst.w, interp)));
    }
  }
  if (parts.empty()) return Matrix(0, x.cols());
  return vstack(parts);
}

Matrix VarBlock::operator()(const Matrix& x) const { return var_block(x, *this); }

FunctionClass VarBlock::function_class() const {
  return {1, params.attn.head_size(), params.ffn.hidden()};
}

Matrix var_block(const Matrix& x, const VarBlock& block) {
  const Matrix* init = block.x_init ? &*block.x_init : nullptr;
  const Matrix upped = apply_up(x, block.up, block.interp, init);
  const Matrix attended = attention(upped, block.params.attn);
  if (block.order == BlockOrder::kFfnAttnUp) return ffn(attended, block.params.ffn);
  return block.params.g.apply(attended);
}

VarNetwork::VarNetwork(std::vector<VarBlock> blocks) : blocks_(std::move(blocks)) {}

Matrix VarNetwork::operator()(const Matrix& x) const {
  Matrix y = x;
  for (const auto& b : blocks_) y = b(y);
  return y;
}

bool VarNetwork::belongs_to(const FunctionClass& cls) const {
  for (const auto& b : blocks_) {
    if (!(b.function_class() == cls)) return false;
  }
  return true;
}

VarNetwork VarNetwork::then(const VarNetwork& next) const {
  std::vector<VarBlock> all = blocks_;
  all.insert(all.end(), next.blocks_.begin(), next.blocks_.end());
  return compose_class(std::move(all));
}

VarNetwork compose_class(std::vector<VarBlock> blocks) {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    b.params.attn.validate();
    const std::size_t d = b.params.attn.model_dim();
    if (b.params.attn.output_dim() != d) {
      throw ShapeError("compose: block " + std::to_string(i + 1) +
                       " attention does not map d -> d");
    }
    if (i + 1 < blocks.size() && blocks[i + 1].up.from != b.up.to) {
      throw ShapeError("compose: block " + std::to_string(i + 1) + " output maps do not match block " +
                       std::to_string(i + 2) + " input maps");
    }
  }
  return VarNetwork(std::move(blocks));
}

void VarStackParams::validate() const {
  schedule.validate();
  if (levels.size() != schedule.depth()) {
    throw ShapeError("var stack: " + std::to_string(levels.size()) + " parameter levels for a " +
                     std::to_string(schedule.depth()) + "-level schedule");
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    try {
      levels[i].attn.validate();
      if (levels[i].attn.model_dim() != schedule.d || levels[i].attn.output_dim() != schedule.d) {
        throw ShapeError("attention is not d -> d");
      }
      if (order == BlockOrder::kFfnAttnUp) {
        levels[i].ffn.validate();
        if (levels[i].ffn.model_dim() != schedule.d) throw ShapeError("FFN width != d");
      }
    } catch (const ShapeError& e) {
      throw ShapeError("var stack level " + std::to_string(i + 1) + ": " + e.what());
    }
  }
}

VarForwardResult var_forward(const TokenMap& x_init, const VarStackParams& params) {
  params.validate();
  if (x_init.h() != 1 || x_init.w() != 1 || x_init.d() != params.schedule.d) {
    throw ShapeError("var_forward: X_init must be 1x1x" + std::to_string(params.schedule.d));
  }
  const Matrix init = matricize(x_init);
  const auto& levels = params.schedule.levels;
  VarForwardResult result;
  Matrix x(0, params.schedule.d);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    VarBlock block;
    block.params = params.levels[k];
    block.up.from.assign(levels.begin(), levels.begin() + static_cast<std::ptrdiff_t>(k));
    block.up.to.assign(levels.begin(), levels.begin() + static_cast<std::ptrdiff_t>(k + 1));
    block.interp = params.interp;
    block.order = params.order;
    block.x_init = init;
    try {
      x = var_block(x, block);
    } catch (const ShapeError& e) {
      throw ShapeError("var_forward level " + std::to_string(k + 1) + ": " + e.what());
    }
    result.row_ledger.push_back(x.rows());
  }
  result.output = std::move(x);
  return result;
}

VarLevelParams random_level(std::size_t d, std::size_t head_size, std::size_t hidden, Rng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  VarLevelParams level;
  level.attn.w_q = rng.gaussian_matrix(d, head_size, scale);
  level.attn.w_k = rng.gaussian_matrix(d, head_size, scale);
  if (head_size == d) {
    level.attn.w_v = rng.gaussian_matrix(d, d, scale);
  } else {
    level.attn.w_v = rng.gaussian_matrix(d, head_size, scale);
    level.attn.w_o = rng.gaussian_matrix(head_size, d, scale);
  }
  level.ffn.w1 = rng.gaussian_matrix(hidden, d, scale);
  level.ffn.b1 = rng.gaussian_vector(hidden, scale);
  level.ffn.w2 = rng.gaussian_matrix(d, hidden, scale);
  level.ffn.b2 = rng.gaussian_vector(d, scale);
  level.g.kind = TokenwiseKind::kAffine;
  level.g.w = Matrix::identity(d) + rng.gaussian_matrix(d, d, 0.1 * scale);
  level.g.b = rng.gaussian_vector(d, 0.1 * scale);
  return level;
}

VarStackParams random_var_stack(const ScaleSchedule& schedule, std::size_t head_size,
                                std::size_t hidden, Rng& rng, const InterpOptions& interp,
                                BlockOrder order) {
  schedule.validate();
  VarStackParams p;
  p.schedule = schedule;
  p.interp = interp;
  p.order = order;
  for (std::size_t i = 0; i < schedule.depth(); ++i) {
    p.levels.push_back(random_level(schedule.d, head_size, hidden, rng));
  }
  return p;
}

}  // namespace varapprox
