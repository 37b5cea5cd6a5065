#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "clip/audio.hpp"

namespace clip {

enum class WindowType { kHanning };

// Analysis framing. fft_size == 0 resolves to the next power of two at or
// above the frame length in samples.
struct FramingConfig {
  double frame_length_ms = 25.0;
  double hop_length_ms = 10.0;
  WindowType window = WindowType::kHanning;
  int fft_size = 0;

  int frame_samples(int sample_rate_hz) const;
  int hop_samples(int sample_rate_hz) const;
  int resolved_fft_size(int sample_rate_hz) const;
};

// Per-frame complex half spectra (fft_size/2 + 1 bins) plus the framing
// metadata needed to invert them.
struct Spectrogram {
  std::vector<std::vector<std::complex<double>>> frames;
  FramingConfig config;
  int sample_rate_hz = 0;
  int fft_size = 0;
  std::vector<double> frame_times;  // seconds at frame centers

  std::size_t num_frames() const { return frames.size(); }
  std::size_t num_bins() const {
    return static_cast<std::size_t>(fft_size / 2 + 1);
  }
  double bin_frequency_hz(std::size_t bin) const {
    return static_cast<double>(bin) * sample_rate_hz / fft_size;
  }
  double hop_s() const {
    return config.hop_samples(sample_rate_hz) /
           static_cast<double>(sample_rate_hz);
  }
  // Time span covered by the framing, in seconds.
  double span_s() const;
};

// Periodic Hann window, w[n] = 0.5 - 0.5 cos(2 pi n / length).
std::vector<double> hanning_window(int length);

// Windowed short-time FFT of a mono buffer, frames zero-padded to fft_size.
// Throws PipelineError when the buffer is shorter than one frame and
// ConfigError for a multi-channel buffer or invalid framing.
Spectrogram stft(const AudioBuffer& buffer, const FramingConfig& config);

// Overlap-add inverse with window-square normalization. Exact (to numeric
// precision) on interior samples for unmodified spectra regardless of hop,
// as long as the summed squared window is nonzero.
AudioBuffer istft(const Spectrogram& spec);

}  // namespace clip
