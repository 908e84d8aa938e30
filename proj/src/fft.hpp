#pragma once

#include <complex>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace ddr::detail {

// FFTW plan creation is not thread-safe; execution of a fresh plan per call
// keeps this wrapper simple. All transforms here are one-shot setup work.
inline std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

inline void fft_inplace(std::vector<std::complex<double>>& v, int sign) {
  if (v.empty()) throw std::invalid_argument("fft of empty vector");
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(v.size()),
                            reinterpret_cast<fftw_complex*>(v.data()),
                            reinterpret_cast<fftw_complex*>(v.data()), sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
}

inline void fft_forward(std::vector<std::complex<double>>& v) { fft_inplace(v, FFTW_FORWARD); }

inline void fft_inverse(std::vector<std::complex<double>>& v) {
  fft_inplace(v, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(v.size());
  for (auto& x : v) x *= scale;
}

inline size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace ddr::detail
