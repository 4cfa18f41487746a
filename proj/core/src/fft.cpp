#include "metamer/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace metamer {

namespace detail {

void* fft_alloc(std::size_t bytes) {
  void* p = fftw_malloc(bytes == 0 ? 1 : bytes);
  if (!p) throw std::bad_alloc();
  return p;
}

void fft_free(void* p) noexcept { fftw_free(p); }

}  // namespace detail

namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

// fftw planning is not thread-safe; execution of an existing plan is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

PlanPair plans_for(int width, int height) {
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard lock(plan_mutex());
  auto key = std::make_pair(width, height);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const std::size_t n = static_cast<std::size_t>(width) * height;
  auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  PlanPair p{
      fftw_plan_dft_2d(height, width, scratch, scratch, FFTW_FORWARD, FFTW_ESTIMATE),
      fftw_plan_dft_2d(height, width, scratch, scratch, FFTW_BACKWARD, FFTW_ESTIMATE),
  };
  fftw_free(scratch);
  cache.emplace(key, p);
  return p;
}

}  // namespace

Fft2d::Fft2d(int width, int height) : width_(width), height_(height) {
  PlanPair p = plans_for(width, height);
  forward_plan_ = p.forward;
  inverse_plan_ = p.inverse;
}

void Fft2d::forward(Spectrum& data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), buf, buf);
}

void Fft2d::inverse(Spectrum& data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), buf, buf);
  const double scale = 1.0 / static_cast<double>(size());
  for (auto& v : data) v *= scale;
}

}  // namespace metamer
