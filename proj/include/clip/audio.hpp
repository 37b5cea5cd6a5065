#pragma once

#include <cstddef>
#include <vector>

namespace clip {

// Uniformly sampled PCM audio, planar layout, amplitudes in [-1, +1].
// All channels have equal length.
struct AudioBuffer {
  std::vector<std::vector<double>> channels;
  int sample_rate_hz = 0;

  int num_channels() const { return static_cast<int>(channels.size()); }
  std::size_t num_samples() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  double duration_s() const {
    return sample_rate_hz > 0
               ? static_cast<double>(num_samples()) / sample_rate_hz
               : 0.0;
  }
};

// Throws ConfigError if the buffer violates its invariants (no channels,
// unequal channel lengths, non-positive rate, samples outside [-1, 1]).
void validate(const AudioBuffer& buffer);

// Arithmetic mean across channels; mono input is returned unchanged.
AudioBuffer to_mono(const AudioBuffer& buffer);

// Per-channel gain; used by tests and the relay/compare tooling.
AudioBuffer scaled(const AudioBuffer& buffer, double gain);

double rms(const std::vector<double>& samples);

}  // namespace clip
