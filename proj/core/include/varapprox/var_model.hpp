#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "varapprox/interp.hpp"
#include "varapprox/nn.hpp"
#include "varapprox/rng.hpp"
#include "varapprox/tensor.hpp"

namespace varapprox {

/// Coarse-to-fine token map sizes. Level 1 is (1, 1); extents never shrink.
struct ScaleSchedule {
  std::vector<Shape2> levels;
  std::size_t d = 1;

  void validate() const;
  std::size_t depth() const noexcept { return levels.size(); }
  /// Sequence length after `count` levels: sum of h_j * w_j for j < count.
  std::size_t tokens_through(std::size_t count) const;
  std::size_t total_tokens() const { return tokens_through(levels.size()); }
};

/// The per-level map applied after attention in the stack ordering.
enum class TokenwiseKind { kIdentity, kAffine, kLayerNorm };

struct TokenwiseMap {
  TokenwiseKind kind = TokenwiseKind::kIdentity;
  Matrix w;               // d x d, affine only
  std::vector<double> b;  // d, affine only
  double ln_eps = 1e-6;

  Matrix apply(const Matrix& x) const;
};

/// Which post-attention stage a level uses.
///
/// kFfnAttnUp: FFN o Attn o up (the single-block form).
/// kGAttnUp:   g o Attn o up (the stacked form with an abstract g).
enum class BlockOrder { kFfnAttnUp, kGAttnUp };

std::string_view to_string(BlockOrder order) noexcept;
BlockOrder block_order_from_string(std::string_view name);

struct VarLevelParams {
  AttnParams attn;
  FfnParams ffn;
  TokenwiseMap g;
};

/// Shapes of the maps entering and leaving the up stage of a block.
///
/// With to.size() == from.size() every map i is up-interpolated from[i] -> to[i].
/// With to.size() == from.size() + 1 the stage grows the pyramid: the first
/// output map is X_init (shape to[0], must be 1x1) and map i + 1 is
/// up-interpolated from[i] -> to[i + 1].
struct UpPlan {
  std::vector<Shape2> from;
  std::vector<Shape2> to;

  bool grows() const noexcept { return to.size() == from.size() + 1; }
  std::size_t rows_in() const noexcept;
  std::size_t rows_out() const noexcept;
};

/// Applies the up stage of `plan` to the stacked maps in `x`.
/// `x_init` (1 x d) is required when the plan grows the pyramid.
Matrix apply_up(const Matrix& x, const UpPlan& plan, const InterpOptions& interp,
                const Matrix* x_init = nullptr);

/// Head count, head size and FFN width of a block, as in T^{a,s,c}.
struct FunctionClass {
  std::size_t heads = 1;
  std::size_t head_size = 0;
  std::size_t hidden = 0;

  friend bool operator==(const FunctionClass&, const FunctionClass&) = default;
};

struct VarBlock {
  VarLevelParams params;
  UpPlan up;
  InterpOptions interp;
  BlockOrder order = BlockOrder::kFfnAttnUp;
  std::optional<Matrix> x_init;

  Matrix operator()(const Matrix& x) const;
  FunctionClass function_class() const;
};

/// FFN(Attn(up(X))) or g(Attn(up(X))) depending on block.order.
Matrix var_block(const Matrix& x, const VarBlock& block);

/// A composition TF^m o ... o TF^1 of VAR blocks.
class VarNetwork {
 public:
  VarNetwork() = default;
  explicit VarNetwork(std::vector<VarBlock> blocks);

  Matrix operator()(const Matrix& x) const;
  const std::vector<VarBlock>& blocks() const noexcept { return blocks_; }
  std::size_t depth() const noexcept { return blocks_.size(); }
  /// True when every block has the given (heads, head size, hidden) signature.
  bool belongs_to(const FunctionClass& cls) const;

  /// this network followed by `next`.
  VarNetwork then(const VarNetwork& next) const;

 private:
  std::vector<VarBlock> blocks_;
};

/// Validates shape compatibility between consecutive blocks and builds the network.
/// Throws ShapeError naming the first incompatible pair.
VarNetwork compose_class(std::vector<VarBlock> blocks);

struct VarStackParams {
  ScaleSchedule schedule;
  std::vector<VarLevelParams> levels;
  InterpOptions interp;
  BlockOrder order = BlockOrder::kFfnAttnUp;

  void validate() const;
};

struct VarForwardResult {
  Matrix output;
  /// Sequence length after each level.
  std::vector<std::size_t> row_ledger;
};

/// The m-level VAR transformer starting from a 1 x 1 x d initial map.
VarForwardResult var_forward(const TokenMap& x_init, const VarStackParams& params);

/// Gaussian parameters with scale 1/sqrt(d); g is a random affine map near identity.
VarStackParams random_var_stack(const ScaleSchedule& schedule, std::size_t head_size,
                                std::size_t hidden, Rng& rng, const InterpOptions& interp = {},
                                BlockOrder order = BlockOrder::kFfnAttnUp);

VarLevelParams random_level(std::size_t d, std::size_t head_size, std::size_t hidden, Rng& rng);

}  // namespace varapprox
