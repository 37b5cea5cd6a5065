#include "clip/audio.hpp"

#include <cmath>

#include "clip/errors.hpp"

namespace clip {

void validate(const AudioBuffer& buffer) {
  if (buffer.sample_rate_hz <= 0)
    throw ConfigError("audio buffer: sample rate must be positive");
  if (buffer.channels.empty())
    throw ConfigError("audio buffer: at least one channel required");
  const std::size_t n = buffer.channels.front().size();
  for (const auto& ch : buffer.channels) {
    if (ch.size() != n)
      throw ConfigError("audio buffer: channels of unequal length");
    for (double s : ch) {
      if (!(s >= -1.0 && s <= 1.0))
        throw ConfigError("audio buffer: sample outside [-1, 1]");
    }
  }
}

AudioBuffer to_mono(const AudioBuffer& buffer) {
  if (buffer.num_channels() <= 1) return buffer;
  const std::size_t n = buffer.num_samples();
  const double inv = 1.0 / buffer.num_channels();
  AudioBuffer out;
  out.sample_rate_hz = buffer.sample_rate_hz;
  out.channels.resize(1);
  out.channels[0].resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (const auto& ch : buffer.channels) acc += ch[i];
    out.channels[0][i] = acc * inv;
  }
  return out;
}

AudioBuffer scaled(const AudioBuffer& buffer, double gain) {
  AudioBuffer out = buffer;
  for (auto& ch : out.channels)
    for (double& s : ch) s *= gain;
  return out;
}

double rms(const std::vector<double>& samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

}  // namespace clip
