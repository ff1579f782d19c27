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

#ifndef AFP_COMMON_FFT_H_
#define AFP_COMMON_FFT_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace afp {

bool IsPowerOfTwo(size_t n);
size_t NextPowerOfTwo(size_t n);

// In-place iterative radix-2 FFT. data.size() must be a power of two.
// The inverse transform is scaled by 1/n.
void Fft(std::span<std::complex<double>> data, bool inverse = false);

// |X[k]|^2 for k = 0..n/2 of a real frame of power-of-two length n.
std::vector<double> PowerSpectrum(std::span<const double> frame);

// Full linear convolution (length a.size() + b.size() - 1).
std::vector<double> FftConvolve(std::span<const double> a,
                                std::span<const double> b);

// Samples [offset, offset + length) of the full linear convolution of
// `signal` with `kernel`, computed by FFT overlap-add in blocks sized to the
// kernel so memory stays bounded for hour-long signals. Indices past the
// end of the full convolution read as zero.
std::vector<double> FftConvolveRange(std::span<const float> signal,
                                     std::span<const double> kernel,
                                     size_t offset, size_t length);
std::vector<double> FftConvolveRange(std::span<const double> signal,
                                     std::span<const double> kernel,
                                     size_t offset, size_t length);

}  // namespace afp

#endif  // AFP_COMMON_FFT_H_
