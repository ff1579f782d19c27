// Copyright 2026 The AFP Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "afp/common/fft.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "afp/common/error.h"

namespace afp {

bool IsPowerOfTwo(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

size_t NextPowerOfTwo(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void Fft(std::span<std::complex<double>> data, bool inverse) {
  const size_t n = data.size();
  Require(IsPowerOfTwo(n), "FFT length must be a power of two");
  if (n == 1) return;

  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  // Root table for the full length; stage `len` uses every (n/len)-th root.
  thread_local std::map<size_t, std::vector<std::complex<double>>> cache;
  auto& roots = cache[n];
  if (roots.empty()) {
    roots.resize(n / 2);
    for (size_t k = 0; k < n / 2; ++k) {
      roots[k] = std::polar(1.0, -2.0 * std::numbers::pi *
                                     static_cast<double>(k) /
                                     static_cast<double>(n));
    }
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const size_t half = len / 2;
    const size_t stride = n / len;
    for (size_t start = 0; start < n; start += len) {
      for (size_t k = 0; k < half; ++k) {
        const std::complex<double> w =
            inverse ? std::conj(roots[k * stride]) : roots[k * stride];
        const std::complex<double> u = data[start + k];
        const std::complex<double> x = data[start + k + half];
        // Plain product; operator* carries NaN-recovery branches.
        const std::complex<double> v(x.real() * w.real() - x.imag() * w.imag(),
                                     x.real() * w.imag() + x.imag() * w.real());
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : data) x *= scale;
  }
}

std::vector<double> PowerSpectrum(std::span<const double> frame) {
  std::vector<std::complex<double>> buf(frame.begin(), frame.end());
  Fft(buf);
  std::vector<double> power(frame.size() / 2 + 1);
  for (size_t k = 0; k < power.size(); ++k) power[k] = std::norm(buf[k]);
  return power;
}

namespace {

template <typename T>
std::vector<double> ConvolveRangeImpl(std::span<const T> signal,
                                      std::span<const double> kernel,
                                      size_t offset, size_t length) {
  std::vector<double> out(length, 0.0);
  if (signal.empty() || kernel.empty() || length == 0) return out;

  const size_t fft_len =
      NextPowerOfTwo(std::max<size_t>(2 * kernel.size(), 4096));
  const size_t block = fft_len - kernel.size() + 1;

  std::vector<std::complex<double>> spectrum(fft_len);
  std::copy(kernel.begin(), kernel.end(), spectrum.begin());
  Fft(spectrum);

  const size_t end = offset + length;
  std::vector<std::complex<double>> buf(fft_len);
  for (size_t start = 0; start < signal.size(); start += block) {
    // Block output covers full-convolution indices [start, start + fft_len).
    if (start >= end) break;
    if (start + fft_len <= offset) continue;
    const size_t count = std::min(block, signal.size() - start);
    std::fill(buf.begin(), buf.end(), std::complex<double>());
    for (size_t i = 0; i < count; ++i) {
      buf[i] = static_cast<double>(signal[start + i]);
    }
    Fft(buf);
    for (size_t i = 0; i < fft_len; ++i) {
      const std::complex<double> x = buf[i];
      const std::complex<double> k = spectrum[i];
      buf[i] = {x.real() * k.real() - x.imag() * k.imag(),
                x.real() * k.imag() + x.imag() * k.real()};
    }
    Fft(buf, /*inverse=*/true);
    const size_t lo = std::max(start, offset);
    const size_t hi = std::min(start + fft_len, end);
    for (size_t idx = lo; idx < hi; ++idx) {
      out[idx - offset] += buf[idx - start].real();
    }
  }
  return out;
}

}  // namespace

std::vector<double> FftConvolve(std::span<const double> a,
                                std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::span<const double> longer = a.size() >= b.size() ? a : b;
  std::span<const double> shorter = a.size() >= b.size() ? b : a;
  return ConvolveRangeImpl(longer, shorter, 0, a.size() + b.size() - 1);
}

std::vector<double> FftConvolveRange(std::span<const float> signal,
                                     std::span<const double> kernel,
                                     size_t offset, size_t length) {
  return ConvolveRangeImpl(signal, kernel, offset, length);
}

std::vector<double> FftConvolveRange(std::span<const double> signal,
                                     std::span<const double> kernel,
                                     size_t offset, size_t length) {
  return ConvolveRangeImpl(signal, kernel, offset, length);
}

}  // namespace afp
