#include "metamer/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "metamer/error.hpp"

namespace metamer {

const char* to_string(PoolingMode mode) {
  switch (mode) {
    case PoolingMode::Uniform: return "uniform";
    case PoolingMode::GazeCentric: return "gaze";
    case PoolingMode::Global: return "global";
  }
  return "?";
}

PoolingGeometry PoolingGeometry::uniform(double diameter, double spacing) {
  PoolingGeometry g;
  g.mode = PoolingMode::Uniform;
  g.region_diameter = diameter;
  g.spacing_fraction = spacing;
  g.validate();
  return g;
}

PoolingGeometry PoolingGeometry::global() {
  PoolingGeometry g;
  g.mode = PoolingMode::Global;
  return g;
}

PoolingGeometry PoolingGeometry::gaze_centric(double gx, double gy, double rate, double fovea_radius,
                                              double spacing) {
  PoolingGeometry g;
  g.mode = PoolingMode::GazeCentric;
  g.gaze_x = gx;
  g.gaze_y = gy;
  g.eccentricity_rate = rate;
  g.fovea_radius = fovea_radius;
  g.spacing_fraction = spacing;
  g.validate();
  return g;
}

void PoolingGeometry::validate() const {
  if (!(spacing_fraction > 0.0 && spacing_fraction <= 1.0))
    throw InvalidArgument("spacing_fraction must be in (0, 1], got " + std::to_string(spacing_fraction));
  switch (mode) {
    case PoolingMode::Uniform:
      if (!(region_diameter >= 4.0))
        throw InvalidArgument("region_diameter must be >= 4, got " + std::to_string(region_diameter));
      break;
    case PoolingMode::GazeCentric:
      if (!(eccentricity_rate > 0.0))
        throw InvalidArgument("eccentricity_rate must be > 0, got " + std::to_string(eccentricity_rate));
      if (!(fovea_radius >= 1.0))
        throw InvalidArgument("fovea_radius must be >= 1, got " + std::to_string(fovea_radius));
      if (!(warped_diameter >= 4.0))
        throw InvalidArgument("warped_diameter must be >= 4, got " + std::to_string(warped_diameter));
      if (!std::isfinite(gaze_x) || !std::isfinite(gaze_y)) throw InvalidArgument("gaze must be finite");
      break;
    case PoolingMode::Global:
      break;
  }
}

int PoolingGeometry::step() const {
  return std::max(1, static_cast<int>(std::lround(spacing_fraction * region_diameter)));
}

double fovea_radius_pixels(double screen_width_px, double field_of_view_deg, double fovea_diameter_deg) {
  if (!(screen_width_px > 0.0) || !(field_of_view_deg > 0.0) || !(fovea_diameter_deg > 0.0))
    throw InvalidArgument("viewing geometry must be positive");
  return 0.5 * fovea_diameter_deg * screen_width_px / field_of_view_deg;
}

double pooling_profile(double r, double diameter) {
  const double inner = diameter / 4.0;
  const double outer = diameter / 2.0;
  if (r <= inner) return 1.0;
  if (r >= outer) return 0.0;
  const double c = std::cos(0.5 * std::numbers::pi * (r - inner) / (outer - inner));
  return c * c;
}

Plane pooling_kernel(double diameter) {
  if (!(diameter >= 4.0)) throw InvalidArgument("kernel diameter must be >= 4, got " + std::to_string(diameter));
  const int r = static_cast<int>(std::ceil(diameter / 2.0));
  Plane k(2 * r + 1, 2 * r + 1);
  double sum = 0.0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) {
      const double v = pooling_profile(std::hypot(x, y), diameter);
      k(x + r, y + r) = v;
      sum += v;
    }
  for (double& v : k.data) v /= sum;
  return k;
}

std::pair<int, int> pooled_shape(const PoolingGeometry& geom, int width, int height) {
  if (geom.mode == PoolingMode::Global) return {1, 1};
  const int step = geom.step();
  return {(width + step - 1) / step, (height + step - 1) / step};
}

namespace {

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

struct Tap {
  int dy, dx;
  double w;
};

std::vector<Tap> kernel_taps(const PoolingGeometry& geom, int full_w, int full_h) {
  std::vector<Tap> taps;
  if (geom.mode == PoolingMode::Global) {
    const double w = 1.0 / (static_cast<double>(full_w) * full_h);
    taps.reserve(static_cast<std::size_t>(full_w) * full_h);
    for (int y = 0; y < full_h; ++y)
      for (int x = 0; x < full_w; ++x) taps.push_back({y, x, w});
    return taps;
  }
  const Plane k = pooling_kernel(geom.region_diameter);
  const int r = k.width / 2;
  for (int y = 0; y < k.height; ++y)
    for (int x = 0; x < k.width; ++x)
      if (k(x, y) != 0.0) taps.push_back({y - r, x - r, k(x, y)});
  return taps;
}

}  // namespace

LevelPooler::LevelPooler(const PoolingGeometry& geom, int full_w, int full_h, int level_w, int level_h)
    : level_w_(level_w), level_h_(level_h) {
  if (geom.mode == PoolingMode::GazeCentric)
    throw InvalidArgument("gaze-centric pooling runs as uniform pooling in warped space");
  geom.validate();
  if (geom.mode == PoolingMode::Uniform && geom.region_diameter > std::min(full_w, full_h))
    throw InvalidArgument("pooling diameter " + std::to_string(geom.region_diameter) +
                          " exceeds image size " + std::to_string(full_w) + "x" + std::to_string(full_h));
  const std::vector<Tap> taps = kernel_taps(geom, full_w, full_h);
  int dy_min = 0, dy_max = 0, dx_min = 0, dx_max = 0;
  for (const Tap& t : taps) {
    dy_min = std::min(dy_min, t.dy);
    dy_max = std::max(dy_max, t.dy);
    dx_min = std::min(dx_min, t.dx);
    dx_max = std::max(dx_max, t.dx);
  }

  const auto [pw, ph] = pooled_shape(geom, full_w, full_h);
  const int step = geom.mode == PoolingMode::Global ? 1 : geom.step();

  // Along one axis: lattice coordinate p reads coarse coordinate (p + d) * m / n.
  // Splitting p * m = base * n + key makes the stencil depend only on key.
  struct KeyRange {
    int rel_min;
    int extent;
  };
  auto build_axis = [](Axis& ax, int count, int step, int n, int m, int d_min, int d_max, std::vector<int>& keys,
                       std::vector<KeyRange>& ranges) {
    std::vector<int> base(static_cast<std::size_t>(count));
    ax.key_index.resize(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
      const long long pm = static_cast<long long>(j) * step * m;
      const int key = static_cast<int>(pm % n);
      base[static_cast<std::size_t>(j)] = static_cast<int>(pm / n);
      auto it = std::find(keys.begin(), keys.end(), key);
      if (it == keys.end()) {
        keys.push_back(key);
        it = keys.end() - 1;
      }
      ax.key_index[static_cast<std::size_t>(j)] = static_cast<int>(it - keys.begin());
    }
    for (int key : keys) {
      int lo = 0, hi = 0;
      bool first = true;
      for (int d = d_min; d <= d_max; ++d) {
        const long long num = key + static_cast<long long>(d) * m;
        const int rel = static_cast<int>(floor_div(num, n));
        const int top = rel + (num - static_cast<long long>(rel) * n != 0 ? 1 : 0);
        lo = first ? rel : std::min(lo, rel);
        hi = first ? top : std::max(hi, top);
        first = false;
      }
      ranges.push_back({lo, hi - lo + 1});
    }
    int first_idx = 0, last_idx = 0;
    for (int j = 0; j < count; ++j) {
      const KeyRange& kr = ranges[static_cast<std::size_t>(ax.key_index[static_cast<std::size_t>(j)])];
      const int a = base[static_cast<std::size_t>(j)] + kr.rel_min;
      first_idx = j == 0 ? a : std::min(first_idx, a);
      last_idx = j == 0 ? a + kr.extent : std::max(last_idx, a + kr.extent);
    }
    ax.pad_lo = -first_idx;
    ax.padded = last_idx - first_idx;
    ax.start.resize(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j)
      ax.start[static_cast<std::size_t>(j)] =
          base[static_cast<std::size_t>(j)] +
          ranges[static_cast<std::size_t>(ax.key_index[static_cast<std::size_t>(j)])].rel_min + ax.pad_lo;
  };

  std::vector<int> keys_x, keys_y;
  std::vector<KeyRange> range_x, range_y;
  build_axis(ax_, pw, step, full_w, level_w, dx_min, dx_max, keys_x, range_x);
  build_axis(ay_, ph, step, full_h, level_h, dy_min, dy_max, keys_y, range_y);
  n_key_x_ = static_cast<int>(keys_x.size());

  stencils_.resize(keys_x.size() * keys_y.size());
  for (std::size_t ky = 0; ky < keys_y.size(); ++ky) {
    for (std::size_t kx = 0; kx < keys_x.size(); ++kx) {
      Stencil& st = stencils_[ky * keys_x.size() + kx];
      st.rows = range_y[ky].extent;
      st.cols = range_x[kx].extent;
      st.w.assign(static_cast<std::size_t>(st.rows) * st.cols, 0.0);
      const long long key_y = keys_y[ky], key_x = keys_x[kx];
      for (const Tap& t : taps) {
        const long long ny = key_y + static_cast<long long>(t.dy) * level_h;
        const long long nx = key_x + static_cast<long long>(t.dx) * level_w;
        const long long ry = floor_div(ny, full_h);
        const long long rx = floor_div(nx, full_w);
        const double fy = static_cast<double>(ny - ry * full_h) / full_h;
        const double fx = static_cast<double>(nx - rx * full_w) / full_w;
        const int r0 = static_cast<int>(ry) - range_y[ky].rel_min;
        const int c0 = static_cast<int>(rx) - range_x[kx].rel_min;
        auto at = [&](int r, int c) -> double& {
          return st.w[static_cast<std::size_t>(r) * st.cols + static_cast<std::size_t>(c)];
        };
        at(r0, c0) += t.w * (1.0 - fy) * (1.0 - fx);
        if (fx != 0.0) at(r0, c0 + 1) += t.w * (1.0 - fy) * fx;
        if (fy != 0.0) {
          at(r0 + 1, c0) += t.w * fy * (1.0 - fx);
          if (fx != 0.0) at(r0 + 1, c0 + 1) += t.w * fy * fx;
        }
      }
      st.col_begin.assign(static_cast<std::size_t>(st.rows), 0);
      st.col_end.assign(static_cast<std::size_t>(st.rows), 0);
      for (int r = 0; r < st.rows; ++r) {
        const double* row = &st.w[static_cast<std::size_t>(r) * st.cols];
        int b = 0, e = st.cols;
        while (b < e && row[b] == 0.0) ++b;
        while (e > b && row[e - 1] == 0.0) --e;
        st.col_begin[static_cast<std::size_t>(r)] = b;
        st.col_end[static_cast<std::size_t>(r)] = e;
      }
    }
  }
}

Plane LevelPooler::pad(const Plane& z) const {
  Plane p(ax_.padded, ay_.padded);
  for (int r = 0; r < p.height; ++r) {
    int y = (r - ay_.pad_lo) % level_h_;
    if (y < 0) y += level_h_;
    const double* src = &z.data[static_cast<std::size_t>(y) * level_w_];
    double* dst = &p.data[static_cast<std::size_t>(r) * p.width];
    for (int c = 0; c < p.width; ++c) {
      int x = (c - ax_.pad_lo) % level_w_;
      if (x < 0) x += level_w_;
      dst[c] = src[x];
    }
  }
  return p;
}

namespace {

double dot(const double* a, const double* b, int n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace

Plane LevelPooler::apply(const Plane& z) const {
  if (z.width != level_w_ || z.height != level_h_) throw InvalidArgument("LevelPooler: plane size mismatch");
  const Plane p = pad(z);
  Plane out(pooled_width(), pooled_height());
  for (int j = 0; j < out.height; ++j) {
    const auto jy = static_cast<std::size_t>(j);
    const int row0 = ay_.start[jy];
    const std::size_t ky = static_cast<std::size_t>(ay_.key_index[jy]);
    for (int i = 0; i < out.width; ++i) {
      const auto ix = static_cast<std::size_t>(i);
      const int col0 = ax_.start[ix];
      const Stencil& st = stencils_[ky * static_cast<std::size_t>(n_key_x_) +
                                    static_cast<std::size_t>(ax_.key_index[ix])];
      double acc = 0.0;
      for (int r = 0; r < st.rows; ++r) {
        const int b = st.col_begin[static_cast<std::size_t>(r)], e = st.col_end[static_cast<std::size_t>(r)];
        const double* src = &p.data[static_cast<std::size_t>(row0 + r) * p.width + static_cast<std::size_t>(col0)];
        acc += dot(&st.w[static_cast<std::size_t>(r) * st.cols + static_cast<std::size_t>(b)], src + b, e - b);
      }
      out.data[jy * static_cast<std::size_t>(out.width) + ix] = acc;
    }
  }
  return out;
}

void LevelPooler::accumulate_adjoint(const Plane& grad, Plane& out) const {
  if (grad.width != pooled_width() || grad.height != pooled_height())
    throw InvalidArgument("LevelPooler: gradient size mismatch");
  if (out.width != level_w_ || out.height != level_h_) out = Plane(level_w_, level_h_);
  Plane p(ax_.padded, ay_.padded);
  for (int j = 0; j < grad.height; ++j) {
    const auto jy = static_cast<std::size_t>(j);
    const int row0 = ay_.start[jy];
    const std::size_t ky = static_cast<std::size_t>(ay_.key_index[jy]);
    for (int i = 0; i < grad.width; ++i) {
      const auto ix = static_cast<std::size_t>(i);
      const double g = grad.data[jy * static_cast<std::size_t>(grad.width) + ix];
      if (g == 0.0) continue;
      const int col0 = ax_.start[ix];
      const Stencil& st = stencils_[ky * static_cast<std::size_t>(n_key_x_) +
                                    static_cast<std::size_t>(ax_.key_index[ix])];
      for (int r = 0; r < st.rows; ++r) {
        const int b = st.col_begin[static_cast<std::size_t>(r)], e = st.col_end[static_cast<std::size_t>(r)];
        double* dst = &p.data[static_cast<std::size_t>(row0 + r) * p.width + static_cast<std::size_t>(col0)];
        const double* w = &st.w[static_cast<std::size_t>(r) * st.cols];
        for (int c = b; c < e; ++c) dst[c] += w[c] * g;
      }
    }
  }
  for (int r = 0; r < p.height; ++r) {
    int y = (r - ay_.pad_lo) % level_h_;
    if (y < 0) y += level_h_;
    double* dst = &out.data[static_cast<std::size_t>(y) * level_w_];
    const double* src = &p.data[static_cast<std::size_t>(r) * p.width];
    for (int c = 0; c < p.width; ++c) {
      int x = (c - ax_.pad_lo) % level_w_;
      if (x < 0) x += level_w_;
      dst[x] += src[c];
    }
  }
}

Plane pool_plane(const Plane& stat, const PoolingGeometry& geom) {
  return LevelPooler(geom, stat.width, stat.height, stat.width, stat.height).apply(stat);
}

PooledStatistics pool(const StatisticSet& stats, const PoolingGeometry& geom) {
  if (geom.mode == PoolingMode::GazeCentric)
    throw InvalidArgument("pool: use pool_gaze for gaze-centric geometry");
  PooledStatistics out;
  out.geometry = geom;
  out.source_width = stats.width;
  out.source_height = stats.height;
  const LevelPooler pooler(geom, stats.width, stats.height, stats.width, stats.height);
  out.entries.reserve(stats.entries.size());
  for (const auto& e : stats.entries) out.entries.push_back({e.kind, pooler.apply(e.image)});
  return out;
}

}  // namespace metamer
