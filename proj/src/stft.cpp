#include "clip/stft.hpp"

#include <cmath>

#include "clip/errors.hpp"
#include "fft.hpp"

namespace clip {

namespace {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

void check_framing(const FramingConfig& c) {
  if (c.frame_length_ms <= 0.0)
    throw ConfigError("framing: frame length must be positive");
  if (c.hop_length_ms <= 0.0 || c.hop_length_ms > c.frame_length_ms)
    throw ConfigError("framing: hop must satisfy 0 < hop <= frame length");
}

}  // namespace

int FramingConfig::frame_samples(int sample_rate_hz) const {
  return static_cast<int>(std::lround(frame_length_ms * sample_rate_hz /
                                      1000.0));
}

int FramingConfig::hop_samples(int sample_rate_hz) const {
  return static_cast<int>(std::lround(hop_length_ms * sample_rate_hz /
                                      1000.0));
}

int FramingConfig::resolved_fft_size(int sample_rate_hz) const {
  const int frame = frame_samples(sample_rate_hz);
  if (fft_size == 0) return next_pow2(frame);
  if (fft_size < frame)
    throw ConfigError("framing: fft_size smaller than frame length");
  return fft_size;
}

std::vector<double> hanning_window(int length) {
  std::vector<double> w(static_cast<std::size_t>(length));
  for (int n = 0; n < length; ++n)
    w[static_cast<std::size_t>(n)] =
        0.5 - 0.5 * std::cos(2.0 * M_PI * n / length);
  return w;
}

double Spectrogram::span_s() const {
  if (frames.empty()) return 0.0;
  const int frame = config.frame_samples(sample_rate_hz);
  const int hop = config.hop_samples(sample_rate_hz);
  return (static_cast<double>(frames.size() - 1) * hop + frame) /
         sample_rate_hz;
}

Spectrogram stft(const AudioBuffer& buffer, const FramingConfig& config) {
  check_framing(config);
  if (buffer.num_channels() != 1)
    throw ConfigError("stft: mono buffer required, call to_mono first");
  const int sr = buffer.sample_rate_hz;
  if (sr <= 0) throw ConfigError("stft: invalid sample rate");
  const int frame = config.frame_samples(sr);
  const int hop = config.hop_samples(sr);
  const int nfft = config.resolved_fft_size(sr);
  const auto& x = buffer.channels.front();
  if (static_cast<int>(x.size()) < frame)
    throw PipelineError("stft: buffer shorter than one frame (" +
                        std::to_string(x.size()) + " < " +
                        std::to_string(frame) + " samples)");

  const auto window = hanning_window(frame);
  const std::size_t n_frames =
      1 + (x.size() - static_cast<std::size_t>(frame)) /
              static_cast<std::size_t>(hop);

  Spectrogram spec;
  spec.config = config;
  spec.config.fft_size = nfft;
  spec.sample_rate_hz = sr;
  spec.fft_size = nfft;
  spec.frames.reserve(n_frames);
  spec.frame_times.reserve(n_frames);

  std::vector<double> padded(static_cast<std::size_t>(nfft), 0.0);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const std::size_t start = i * static_cast<std::size_t>(hop);
    for (int n = 0; n < frame; ++n)
      padded[static_cast<std::size_t>(n)] =
          x[start + static_cast<std::size_t>(n)] *
          window[static_cast<std::size_t>(n)];
    for (int n = frame; n < nfft; ++n)
      padded[static_cast<std::size_t>(n)] = 0.0;
    spec.frames.push_back(detail::rfft(padded));
    spec.frame_times.push_back(
        (static_cast<double>(start) + frame / 2.0) / sr);
  }
  return spec;
}

AudioBuffer istft(const Spectrogram& spec) {
  const int sr = spec.sample_rate_hz;
  const int frame = spec.config.frame_samples(sr);
  const int hop = spec.config.hop_samples(sr);
  const auto window = hanning_window(frame);

  const std::size_t n_frames = spec.frames.size();
  AudioBuffer out;
  out.sample_rate_hz = sr;
  out.channels.resize(1);
  if (n_frames == 0) return out;

  const std::size_t out_len =
      (n_frames - 1) * static_cast<std::size_t>(hop) +
      static_cast<std::size_t>(frame);
  std::vector<double> num(out_len, 0.0);
  std::vector<double> den(out_len, 0.0);

  for (std::size_t i = 0; i < n_frames; ++i) {
    if (spec.frames[i].size() != spec.num_bins())
      throw ConfigError("istft: frame bin count mismatch");
    const auto time = detail::irfft(spec.frames[i], spec.fft_size);
    const std::size_t start = i * static_cast<std::size_t>(hop);
    for (int n = 0; n < frame; ++n) {
      const double w = window[static_cast<std::size_t>(n)];
      num[start + static_cast<std::size_t>(n)] +=
          time[static_cast<std::size_t>(n)] * w;
      den[start + static_cast<std::size_t>(n)] += w * w;
    }
  }

  constexpr double kDenFloor = 1e-12;
  auto& y = out.channels.front();
  y.resize(out_len);
  for (std::size_t n = 0; n < out_len; ++n)
    y[n] = den[n] > kDenFloor ? num[n] / den[n] : 0.0;
  return out;
}

}  // namespace clip
