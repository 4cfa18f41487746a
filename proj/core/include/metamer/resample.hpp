#pragma once

#include <vector>

#include "metamer/image.hpp"

namespace metamer {

/// Two-tap linear interpolation weights along one axis with circular wrap.
/// Output sample x reads source coordinate x*scale + offset.
struct AxisTaps {
  std::vector<int> lo;
  std::vector<int> hi;
  std::vector<double> frac;  // weight of `hi`

  static AxisTaps make(int out_n, int src_n, double scale, double offset);
  /// Sample x reads source coordinate x * src_n / out_n, computed in integers.
  static AxisTaps ratio(int out_n, int src_n);
  int size() const { return static_cast<int>(lo.size()); }
};

/// Bilinear resampling (circular) from src dimensions to (width, height); sample x
/// reads source coordinate x * src_width / width. Used for all cross-level
/// upsampling so every stage stays exactly shift-consistent with the pyramid's
/// decimation grid.
Plane resize_circular(const Plane& src, int width, int height);
ComplexPlane resize_circular(const ComplexPlane& src, int width, int height);

/// Exact adjoint of resize_circular.
Plane resize_circular_adjoint(const Plane& grad, int src_width, int src_height);
ComplexPlane resize_circular_adjoint(const ComplexPlane& grad, int src_width, int src_height);

/// out(x, y) = src(x - dx, y - dy), bilinear with circular wrap.
Plane shift_circular(const Plane& src, double dx, double dy);
Plane shift_circular_adjoint(const Plane& grad, double dx, double dy);

/// Separable bilinear application with precomputed taps, and its adjoint.
Plane apply_taps(const Plane& src, const AxisTaps& tx, const AxisTaps& ty);
Plane apply_taps_adjoint(const Plane& grad, const AxisTaps& tx, const AxisTaps& ty, int src_width,
                         int src_height);

}  // namespace metamer
