#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "clip/audio.hpp"
#include "clip/stft.hpp"

namespace clip {

using Interval = std::pair<double, double>;  // [start_s, end_s)

// Excises the given time intervals (e.g. clinician interruptions) and
// concatenates the remainder in order. Overlapping intervals are merged.
// Intervals outside the buffer duration raise DomainError.
AudioBuffer trim_segments(const AudioBuffer& buffer,
                          const std::vector<Interval>& remove);

// Annotation file: one "start_s end_s" pair per line, '#' comments allowed.
std::vector<Interval> read_trim_annotations(const std::string& path);

enum class NoiseMethod { kSilenceAverage, kMinimumStatistics };

// Per-bin noise magnitude estimate on the spectrogram's bin grid.
struct NoiseProfile {
  std::vector<double> magnitude;
  NoiseMethod method = NoiseMethod::kSilenceAverage;
};

struct NoiseEstimationParams {
  NoiseMethod method = NoiseMethod::kMinimumStatistics;
  // Frames known to contain no speech (silence_average mode).
  std::vector<std::size_t> silence_frames;
  // Minimum-statistics parameters.
  double window_s = 0.8;            // sliding minimum window
  double bias_compensation = 1.5;   // minimum -> mean power correction
  double temporal_smoothing = 0.85; // first-order power smoothing
};

// silence_average: per-bin mean magnitude over the listed frames, smoothed
// by a 3-bin moving average in frequency.
// minimum_statistics: per-bin running minimum of temporally smoothed power
// over the sliding window, aggregated over frames (median) and
// bias-compensated; requires at least 1 s of audio.
NoiseProfile estimate_noise(const Spectrogram& spec,
                            const NoiseEstimationParams& params);

// Magnitude-domain subtraction with the noisy phase:
//   |Y| = max(|X| - alpha * |N|, beta * |N|)
// Bins with zero noise estimate are copied bit-exactly.
Spectrogram spectral_subtract(const Spectrogram& spec,
                              const NoiseProfile& noise,
                              double oversubtraction = 2.0,
                              double floor = 0.01);

// trim -> stft -> estimate -> subtract -> istft, the front half of the
// processing chain. The returned buffer covers the framed span of the input.
AudioBuffer denoise(const AudioBuffer& mono, const FramingConfig& framing,
                    const NoiseEstimationParams& params,
                    double oversubtraction = 2.0, double floor = 0.01);

}  // namespace clip
