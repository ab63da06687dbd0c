#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "varapprox/tensor.hpp"

namespace varapprox {

/// Piecewise cubic interpolation kernels.
///
/// kCubicBSpline stays inside [0, 1] everywhere and is the default.
/// kKeysCatmullRom (a = -0.5) is interpolating but dips to -2/27 on 1 < |x| < 2.
enum class KernelKind { kCubicBSpline, kKeysCatmullRom };

/// How a 4-tap stencil is positioned relative to the real-valued anchor.
///
/// kFractional evaluates W at the fractional distance between each tap and the
/// anchor. kIntegerOffset evaluates W only at the integer offsets -1..2 around
/// floor(i * src / dst), the literal reading of the one-step up-interpolation formula.
enum class StencilMode { kFractional, kIntegerOffset };

struct InterpOptions {
  KernelKind kernel = KernelKind::kCubicBSpline;
  StencilMode mode = StencilMode::kFractional;
};

std::string_view to_string(KernelKind k) noexcept;
std::string_view to_string(StencilMode m) noexcept;
/// Accepts "cubic_bspline" / "keys". Throws DomainError otherwise.
KernelKind kernel_from_string(std::string_view name);
StencilMode stencil_from_string(std::string_view name);

double kernel_eval(KernelKind kind, double x) noexcept;

/// Source taps and normalized weights for one output coordinate along one axis.
struct AxisStencil {
  std::array<std::size_t, 4> index{};
  std::array<double, 4> weight{};
};

/// Anchor (i + 0.5) * src / dst - 0.5 clamped to [0, src - 1], taps floor(anchor) - 1 .. + 2
/// clamped to the border, weights renormalized to sum 1. When src == dst the axis is
/// left untouched (single unit tap at i).
AxisStencil axis_stencil(std::size_t out_index, std::size_t src, std::size_t dst,
                         const InterpOptions& opts);

/// Bicubic up-interpolation of every channel to dst_h x dst_w.
/// Throws ShapeError when dst is smaller than the source along either axis.
TokenMap up_interpolate(const TokenMap& t, std::size_t dst_h, std::size_t dst_w,
                        const InterpOptions& opts = {});

/// Explicit (dst.area) x (src.area) matrix of an up-interpolation.
struct UpInterpOp {
  Shape2 src;
  Shape2 dst;
  InterpOptions options;
  Matrix matrix;

  /// matrix * X on the (h*w) x d view.
  Matrix apply(const Matrix& x) const;
  TokenMap apply(const TokenMap& t) const;
};

UpInterpOp materialize_up(Shape2 src, Shape2 dst, const InterpOptions& opts = {});

/// Pyramid up-interpolation.
///
/// `maps` are X_1..X_k with X_i of shape schedule[i-1]; `schedule` has k + 1
/// entries. Returns Y_1..Y_{k+1} with Y_1 = x_init (copied untouched) and
/// Y_{i+1} = up_interpolate(X_i, schedule[i]).
std::vector<TokenMap> pyramid_up(std::span<const TokenMap> maps, const TokenMap& x_init,
                                 std::span<const Shape2> schedule, const InterpOptions& opts = {});

/// r x r average pooling. Throws ShapeError unless r divides h and w.
TokenMap down_sample(const TokenMap& t, std::size_t r);

struct DownSampleOp {
  Shape2 src;
  std::size_t factor = 1;
  Matrix matrix;

  Matrix apply(const Matrix& x) const;
  TokenMap apply(const TokenMap& t) const;
};

DownSampleOp materialize_down(Shape2 src, std::size_t r);

}  // namespace varapprox
