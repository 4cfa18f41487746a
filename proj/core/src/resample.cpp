#include "metamer/resample.hpp"

#include <cmath>

namespace metamer {

AxisTaps AxisTaps::make(int out_n, int src_n, double scale, double offset) {
  AxisTaps t;
  t.lo.resize(static_cast<std::size_t>(out_n));
  t.hi.resize(static_cast<std::size_t>(out_n));
  t.frac.resize(static_cast<std::size_t>(out_n));
  for (int x = 0; x < out_n; ++x) {
    const double s = x * scale + offset;
    const double f = std::floor(s);
    int i0 = static_cast<int>(f) % src_n;
    if (i0 < 0) i0 += src_n;
    t.lo[static_cast<std::size_t>(x)] = i0;
    t.hi[static_cast<std::size_t>(x)] = (i0 + 1) % src_n;
    t.frac[static_cast<std::size_t>(x)] = s - f;
  }
  return t;
}

AxisTaps AxisTaps::ratio(int out_n, int src_n) {
  AxisTaps t;
  t.lo.resize(static_cast<std::size_t>(out_n));
  t.hi.resize(static_cast<std::size_t>(out_n));
  t.frac.resize(static_cast<std::size_t>(out_n));
  for (int x = 0; x < out_n; ++x) {
    const long long num = static_cast<long long>(x) * src_n;
    const int i0 = static_cast<int>(num / out_n) % src_n;
    t.lo[static_cast<std::size_t>(x)] = i0;
    t.hi[static_cast<std::size_t>(x)] = (i0 + 1) % src_n;
    t.frac[static_cast<std::size_t>(x)] = static_cast<double>(num % out_n) / out_n;
  }
  return t;
}

namespace {

template <class T, class PlaneT>
PlaneT apply_impl(const PlaneT& src, const AxisTaps& tx, const AxisTaps& ty) {
  PlaneT out(tx.size(), ty.size());
  for (int y = 0; y < ty.size(); ++y) {
    const auto yy = static_cast<std::size_t>(y);
    const T* r0 = &src.data[static_cast<std::size_t>(ty.lo[yy]) * src.width];
    const T* r1 = &src.data[static_cast<std::size_t>(ty.hi[yy]) * src.width];
    const double fy = ty.frac[yy];
    T* dst = &out.data[yy * out.width];
    for (int x = 0; x < tx.size(); ++x) {
      const auto xx = static_cast<std::size_t>(x);
      const double fx = tx.frac[xx];
      const int a = tx.lo[xx], b = tx.hi[xx];
      const T top = r0[a] * (1.0 - fx) + r0[b] * fx;
      const T bottom = r1[a] * (1.0 - fx) + r1[b] * fx;
      dst[xx] = top * (1.0 - fy) + bottom * fy;
    }
  }
  return out;
}

template <class T, class PlaneT>
PlaneT adjoint_impl(const PlaneT& grad, const AxisTaps& tx, const AxisTaps& ty, int sw, int sh) {
  PlaneT out(sw, sh);
  for (int y = 0; y < ty.size(); ++y) {
    const auto yy = static_cast<std::size_t>(y);
    T* r0 = &out.data[static_cast<std::size_t>(ty.lo[yy]) * sw];
    T* r1 = &out.data[static_cast<std::size_t>(ty.hi[yy]) * sw];
    const double fy = ty.frac[yy];
    const T* g = &grad.data[yy * grad.width];
    for (int x = 0; x < tx.size(); ++x) {
      const auto xx = static_cast<std::size_t>(x);
      const double fx = tx.frac[xx];
      const int a = tx.lo[xx], b = tx.hi[xx];
      const T top = g[xx] * (1.0 - fy);
      const T bottom = g[xx] * fy;
      r0[a] += top * (1.0 - fx);
      r0[b] += top * fx;
      r1[a] += bottom * (1.0 - fx);
      r1[b] += bottom * fx;
    }
  }
  return out;
}

}  // namespace

Plane apply_taps(const Plane& src, const AxisTaps& tx, const AxisTaps& ty) {
  return apply_impl<double>(src, tx, ty);
}

Plane apply_taps_adjoint(const Plane& grad, const AxisTaps& tx, const AxisTaps& ty, int sw, int sh) {
  return adjoint_impl<double>(grad, tx, ty, sw, sh);
}

Plane resize_circular(const Plane& src, int width, int height) {
  if (src.width == width && src.height == height) return src;
  auto tx = AxisTaps::ratio(width, src.width);
  auto ty = AxisTaps::ratio(height, src.height);
  return apply_impl<double>(src, tx, ty);
}

ComplexPlane resize_circular(const ComplexPlane& src, int width, int height) {
  if (src.width == width && src.height == height) return src;
  auto tx = AxisTaps::ratio(width, src.width);
  auto ty = AxisTaps::ratio(height, src.height);
  return apply_impl<std::complex<double>>(src, tx, ty);
}

Plane resize_circular_adjoint(const Plane& grad, int sw, int sh) {
  if (grad.width == sw && grad.height == sh) return grad;
  auto tx = AxisTaps::ratio(grad.width, sw);
  auto ty = AxisTaps::ratio(grad.height, sh);
  return adjoint_impl<double>(grad, tx, ty, sw, sh);
}

ComplexPlane resize_circular_adjoint(const ComplexPlane& grad, int sw, int sh) {
  if (grad.width == sw && grad.height == sh) return grad;
  auto tx = AxisTaps::ratio(grad.width, sw);
  auto ty = AxisTaps::ratio(grad.height, sh);
  return adjoint_impl<std::complex<double>>(grad, tx, ty, sw, sh);
}

Plane shift_circular(const Plane& src, double dx, double dy) {
  auto tx = AxisTaps::make(src.width, src.width, 1.0, -dx);
  auto ty = AxisTaps::make(src.height, src.height, 1.0, -dy);
  return apply_impl<double>(src, tx, ty);
}

Plane shift_circular_adjoint(const Plane& grad, double dx, double dy) {
  auto tx = AxisTaps::make(grad.width, grad.width, 1.0, -dx);
  auto ty = AxisTaps::make(grad.height, grad.height, 1.0, -dy);
  return adjoint_impl<double>(grad, tx, ty, grad.width, grad.height);
}

}  // namespace metamer
