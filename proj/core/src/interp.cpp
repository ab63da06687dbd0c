#include "varapprox/interp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "varapprox/error.hpp"

namespace varapprox {

namespace {

constexpr double kKeysA = -0.5;

std::size_t clamp_index(long long idx, std::size_t extent) {
  if (idx < 0) return 0;
  if (idx >= static_cast<long long>(extent)) return extent - 1;
  return static_cast<std::size_t>(idx);
}

void require_up(Shape2 src, Shape2 dst) {
  if (src.h == 0 || src.w == 0 || dst.h < src.h || dst.w < src.w) {
    std::ostringstream os;
    os << "up_interpolate: cannot go from " << src.h << "x" << src.w << " to " << dst.h << "x"
       << dst.w << " (shrinking needs down_sample)";
    throw ShapeError(os.str());
  }
}

void require_divisible(Shape2 src, std::size_t r) {
  if (r == 0 || src.h % r != 0 || src.w % r != 0) {
    std::ostringstream os;
    os << "down_sample: factor " << r << " does not divide " << src.h << "x" << src.w;
    throw ShapeError(os.str());
  }
}

}  // namespace

std::string_view to_string(KernelKind k) noexcept {
  return k == KernelKind::kCubicBSpline ? "cubic_bspline" : "keys";
}

std::string_view to_string(StencilMode m) noexcept {
  return m == StencilMode::kFractional ? "fractional" : "integer_offset";
}

KernelKind kernel_from_string(std::string_view name) {
  if (name == "cubic_bspline") return KernelKind::kCubicBSpline;
  if (name == "keys") return KernelKind::kKeysCatmullRom;
  throw DomainError("unknown kernel '" + std::string(name) + "'");
}

StencilMode stencil_from_string(std::string_view name) {
  if (name == "fractional") return StencilMode::kFractional;
  if (name == "integer_offset") return StencilMode::kIntegerOffset;
  throw DomainError("unknown stencil mode '" + std::string(name) + "'");
}

double kernel_eval(KernelKind kind, double x) noexcept {
  const double ax = std::abs(x);
  if (ax >= 2.0) return 0.0;
  const double ax2 = ax * ax;
  const double ax3 = ax2 * ax;
  if (kind == KernelKind::kCubicBSpline) {
    if (ax < 1.0) return (3.0 * ax3 - 6.0 * ax2 + 4.0) / 6.0;
    const double u = 2.0 - ax;
    return u * u * u / 6.0;
  }
  if (ax < 1.0) return (kKeysA + 2.0) * ax3 - (kKeysA + 3.0) * ax2 + 1.0;
  return kKeysA * ax3 - 5.0 * kKeysA * ax2 + 8.0 * kKeysA * ax - 4.0 * kKeysA;
}

AxisStencil axis_stencil(std::size_t out_index, std::size_t src, std::size_t dst,
                         const InterpOptions& opts) {
  AxisStencil st;
  if (src == dst) {
    st.index.fill(out_index);
    st.weight = {0.0, 1.0, 0.0, 0.0};
    return st;
  }
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  long long base = 0;
  double frac = 0.0;
  if (opts.mode == StencilMode::kFractional) {
    double anchor = (static_cast<double>(out_index) + 0.5) * scale - 0.5;
    anchor = std::clamp(anchor, 0.0, static_cast<double>(src - 1));
    base = static_cast<long long>(std::floor(anchor));
    frac = anchor - static_cast<double>(base);
  } else {
    base = static_cast<long long>((out_index * src) / dst);
  }
  double total = 0.0;
  for (int s = -1; s <= 2; ++s) {
    const std::size_t k = static_cast<std::size_t>(s + 1);
    st.index[k] = clamp_index(base + s, src);
    st.weight[k] = kernel_eval(opts.kernel, static_cast<double>(s) - frac);
    total += st.weight[k];
  }
  for (double& w : st.weight) w /= total;
  return st;
}

TokenMap up_interpolate(const TokenMap& t, std::size_t dst_h, std::size_t dst_w,
                        const InterpOptions& opts) {
  require_up(t.shape(), {dst_h, dst_w});
  const std::size_t d = t.d();
  TokenMap out(dst_h, dst_w, d);
  std::vector<AxisStencil> cols(dst_w);
  for (std::size_t j = 0; j < dst_w; ++j) cols[j] = axis_stencil(j, t.w(), dst_w, opts);
  for (std::size_t i = 0; i < dst_h; ++i) {
    const AxisStencil rs = axis_stencil(i, t.h(), dst_h, opts);
    for (std::size_t j = 0; j < dst_w; ++j) {
      const AxisStencil& cs = cols[j];
      for (std::size_t s = 0; s < 4; ++s) {
        if (rs.weight[s] == 0.0) continue;
        for (std::size_t u = 0; u < 4; ++u) {
          const double wgt = rs.weight[s] * cs.weight[u];
          if (wgt == 0.0) continue;
          for (std::size_t l = 0; l < d; ++l) out(i, j, l) += wgt * t(rs.index[s], cs.index[u], l);
        }
      }
    }
  }
  return out;
}

Matrix UpInterpOp::apply(const Matrix& x) const {
  if (x.rows() != src.area()) throw ShapeError("UpInterpOp::apply: row count != source area");
  return matmul(matrix, x);
}

TokenMap UpInterpOp::apply(const TokenMap& t) const {
  if (t.shape() != src) throw ShapeError("UpInterpOp::apply: token map shape != source shape");
  return tensorize(matmul(matrix, matricize(t)), dst.h, dst.w);
}

UpInterpOp materialize_up(Shape2 src, Shape2 dst, const InterpOptions& opts) {
  require_up(src, dst);
  Matrix m(dst.area(), src.area());
  std::vector<AxisStencil> cols(dst.w);
  for (std::size_t j = 0; j < dst.w; ++j) cols[j] = axis_stencil(j, src.w, dst.w, opts);
  for (std::size_t i = 0; i < dst.h; ++i) {
    const AxisStencil rs = axis_stencil(i, src.h, dst.h, opts);
    for (std::size_t j = 0; j < dst.w; ++j) {
      for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t u = 0; u < 4; ++u)
          m(i * dst.w + j, rs.index[s] * src.w + cols[j].index[u]) += rs.weight[s] * cols[j].weight[u];
    }
  }
  return {src, dst, opts, std::move(m)};
}

std::vector<TokenMap> pyramid_up(std::span<const TokenMap> maps, const TokenMap& x_init,
                                 std::span<const Shape2> schedule, const InterpOptions& opts) {
  if (x_init.h() != 1 || x_init.w() != 1) {
    throw ShapeError("pyramid_up: X_init must be 1x1xd");
  }
  if (schedule.size() != maps.size() + 1) {
    std::ostringstream os;
    os << "pyramid_up: schedule has " << schedule.size() << " levels, expected " << maps.size() + 1;
    throw ShapeError(os.str());
  }
  std::vector<TokenMap> out;
  out.reserve(maps.size() + 1);
  out.push_back(x_init);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (maps[i].shape() != schedule[i] || maps[i].d() != x_init.d()) {
      std::ostringstream os;
      os << "pyramid_up: level " << i + 1 << " map is " << maps[i].h() << "x" << maps[i].w() << "x"
         << maps[i].d() << ", schedule expects " << schedule[i].h << "x" << schedule[i].w << "x"
         << x_init.d();
      throw ShapeError(os.str());
    }
    if (schedule[i + 1].h < schedule[i].h || schedule[i + 1].w < schedule[i].w) {
      std::ostringstream os;
      os << "pyramid_up: level " << i + 2 << " shrinks the schedule";
      throw ShapeError(os.str());
    }
    out.push_back(up_interpolate(maps[i], schedule[i + 1].h, schedule[i + 1].w, opts));
  }
  return out;
}

TokenMap down_sample(const TokenMap& t, std::size_t r) {
  require_divisible(t.shape(), r);
  const std::size_t oh = t.h() / r;
  const std::size_t ow = t.w() / r;
  const double inv = 1.0 / static_cast<double>(r * r);
  TokenMap out(oh, ow, t.d());
  for (std::size_t i = 0; i < oh; ++i)
    for (std::size_t j = 0; j < ow; ++j)
      for (std::size_t l = 0; l < t.d(); ++l) {
        double s = 0.0;
        for (std::size_t a = 0; a < r; ++a)
          for (std::size_t b = 0; b < r; ++b) s += t(i * r + a, j * r + b, l);
        out(i, j, l) = s * inv;
      }
  return out;
}

Matrix DownSampleOp::apply(const Matrix& x) const {
  if (x.rows() != src.area()) throw ShapeError("DownSampleOp::apply: row count != source area");
  return matmul(matrix, x);
}

TokenMap DownSampleOp::apply(const TokenMap& t) const {
  if (t.shape() != src) throw ShapeError("DownSampleOp::apply: token map shape != source shape");
  return tensorize(matmul(matrix, matricize(t)), src.h / factor, src.w / factor);
}

DownSampleOp materialize_down(Shape2 src, std::size_t r) {
  require_divisible(src, r);
  const std::size_t oh = src.h / r;
  const std::size_t ow = src.w / r;
  const double inv = 1.0 / static_cast<double>(r * r);
  Matrix m(oh * ow, src.area());
  for (std::size_t i = 0; i < oh; ++i)
    for (std::size_t j = 0; j < ow; ++j)
      for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = 0; b < r; ++b) m(i * ow + j, (i * r + a) * src.w + j * r + b) = inv;
  return {src, r, std::move(m)};
}

}  // namespace varapprox
