#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace bzwalk {

using cplx = std::complex<double>;

/// Unnormalized 1-D complex DFT of a fixed size backed by FFTW. Plans are
/// created once; transforms may run on any buffer of the planned size.
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(Fft&&) noexcept;
  Fft& operator=(Fft&&) noexcept;
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::size_t size() const { return n_; }

  /// X_j = sum_x x_n exp(-2 pi i j n / N), in place.
  void forward(std::span<cplx> data) const;
  /// x_n = sum_j X_j exp(+2 pi i j n / N), in place (no 1/N).
  void backward(std::span<cplx> data) const;

 private:
  struct Plans;
  std::size_t n_ = 0;
  std::unique_ptr<Plans> plans_;
};

}  // namespace bzwalk
