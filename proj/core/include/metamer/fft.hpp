#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <new>
#include <vector>

namespace metamer {

namespace detail {
void* fft_alloc(std::size_t bytes);
void fft_free(void* p) noexcept;
}  // namespace detail

/// Allocator giving the SIMD alignment FFTW plans are created with.
template <class T>
struct FftAllocator {
  using value_type = T;
  FftAllocator() = default;
  template <class U>
  FftAllocator(const FftAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) {
    if (n > std::numeric_limits<std::size_t>::max() / sizeof(T)) throw std::bad_array_new_length();
    return static_cast<T*>(detail::fft_alloc(n * sizeof(T)));
  }
  void deallocate(T* p, std::size_t) noexcept { detail::fft_free(p); }
  template <class U>
  bool operator==(const FftAllocator<U>&) const noexcept { return true; }
};

using Spectrum = std::vector<std::complex<double>, FftAllocator<std::complex<double>>>;

/// 2-D complex DFT of a fixed size. forward() is unnormalized; inverse() divides
/// by width*height. Plans are cached per size and shared between instances;
/// execution is thread-safe.
class Fft2d {
 public:
  Fft2d(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return static_cast<std::size_t>(width_) * height_; }

  void forward(Spectrum& data) const;
  void inverse(Spectrum& data) const;

 private:
  int width_;
  int height_;
  void* forward_plan_;
  void* inverse_plan_;
};

/// Signed frequency index of DFT bin k for a length-n transform.
inline int signed_frequency(int k, int n) { return k <= (n - 1) / 2 ? k : k - n; }

}  // namespace metamer
