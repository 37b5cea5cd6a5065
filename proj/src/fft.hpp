#pragma once

#include <complex>
#include <vector>

namespace clip::detail {

// Real-to-complex FFT: n real samples -> n/2+1 bins, unnormalized.
std::vector<std::complex<double>> rfft(const std::vector<double>& input);

// Complex-to-real inverse of rfft; returns n real samples scaled by 1/n so
// irfft(rfft(x)) == x. `n` is the original real length (bins = n/2+1).
std::vector<double> irfft(const std::vector<std::complex<double>>& bins,
                          int n);

}  // namespace clip::detail
