#include "clip/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

#include "clip/errors.hpp"

namespace clip {

namespace {

std::vector<Interval> merge_intervals(std::vector<Interval> intervals) {
  std::sort(intervals.begin(), intervals.end());
  std::vector<Interval> merged;
  for (const auto& iv : intervals) {
    if (!merged.empty() && iv.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, iv.second);
    else
      merged.push_back(iv);
  }
  return merged;
}

}  // namespace

AudioBuffer trim_segments(const AudioBuffer& buffer,
                          const std::vector<Interval>& remove) {
  if (remove.empty()) return buffer;
  const double duration = buffer.duration_s();
  for (const auto& [start, end] : remove) {
    if (start < 0.0 || end < start || end > duration + 1e-9)
      throw DomainError("trim: interval [" + std::to_string(start) + ", " +
                        std::to_string(end) + "] outside buffer duration " +
                        std::to_string(duration));
  }
  const auto merged = merge_intervals(remove);
  const int sr = buffer.sample_rate_hz;
  const auto n = buffer.num_samples();

  // Keep sample indices outside every removed interval.
  std::vector<std::pair<std::size_t, std::size_t>> keep;
  std::size_t cursor = 0;
  for (const auto& [start, end] : merged) {
    const auto first = static_cast<std::size_t>(
        std::min<double>(std::lround(start * sr), static_cast<double>(n)));
    const auto last = static_cast<std::size_t>(
        std::min<double>(std::lround(end * sr), static_cast<double>(n)));
    if (first > cursor) keep.emplace_back(cursor, first);
    cursor = std::max(cursor, last);
  }
  if (cursor < n) keep.emplace_back(cursor, n);

  AudioBuffer out;
  out.sample_rate_hz = sr;
  out.channels.resize(static_cast<std::size_t>(buffer.num_channels()));
  for (int c = 0; c < buffer.num_channels(); ++c) {
    auto& dst = out.channels[static_cast<std::size_t>(c)];
    const auto& src = buffer.channels[static_cast<std::size_t>(c)];
    for (const auto& [first, last] : keep)
      dst.insert(dst.end(),
                 src.begin() + static_cast<std::ptrdiff_t>(first),
                 src.begin() + static_cast<std::ptrdiff_t>(last));
  }
  return out;
}

std::vector<Interval> read_trim_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotation file: " + path);
  std::vector<Interval> intervals;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double start, end;
    if (!(ss >> start)) continue;  // blank / comment-only line
    if (!(ss >> end))
      throw ParseError("annotation " + path + ":" + std::to_string(line_no) +
                       ": expected 'start_s end_s'");
    intervals.emplace_back(start, end);
  }
  return intervals;
}

namespace {

// 3-bin moving average across frequency, edges averaged over what exists.
std::vector<double> smooth3(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = v[k];
    int count = 1;
    if (k > 0) { acc += v[k - 1]; ++count; }
    if (k + 1 < n) { acc += v[k + 1]; ++count; }
    out[k] = acc / count;
  }
  return out;
}

NoiseProfile estimate_silence_average(const Spectrogram& spec,
                                      const NoiseEstimationParams& params) {
  if (params.silence_frames.empty())
    throw ConfigError(
        "noise estimation: silence_average mode needs a non-empty silence "
        "frame list");
  const std::size_t bins = spec.num_bins();
  std::vector<double> mean(bins, 0.0);
  for (std::size_t idx : params.silence_frames) {
    if (idx >= spec.num_frames())
      throw DomainError("noise estimation: silence frame index " +
                        std::to_string(idx) + " out of range");
    const auto& frame = spec.frames[idx];
    for (std::size_t k = 0; k < bins; ++k) mean[k] += std::abs(frame[k]);
  }
  const double inv = 1.0 / static_cast<double>(params.silence_frames.size());
  for (auto& m : mean) m *= inv;
  return NoiseProfile{smooth3(mean), NoiseMethod::kSilenceAverage};
}

NoiseProfile estimate_minimum_statistics(const Spectrogram& spec,
                                         const NoiseEstimationParams& params) {
  if (spec.span_s() < 1.0)
    throw PipelineError(
        "noise estimation: minimum statistics requires at least 1 s of "
        "audio");
  const std::size_t bins = spec.num_bins();
  const std::size_t n_frames = spec.num_frames();
  const double hop_s = spec.hop_s();
  const std::size_t window_frames = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(params.window_s / hop_s)));
  const double alpha = params.temporal_smoothing;

  // Temporally smoothed power per bin, then the trailing-window minimum.
  std::vector<std::vector<double>> smoothed(
      n_frames, std::vector<double>(bins));
  for (std::size_t t = 0; t < n_frames; ++t) {
    for (std::size_t k = 0; k < bins; ++k) {
      const double p = std::norm(spec.frames[t][k]);
      smoothed[t][k] =
          t == 0 ? p : alpha * smoothed[t - 1][k] + (1.0 - alpha) * p;
    }
  }

  std::vector<double> profile(bins);
  std::vector<double> minima(n_frames);
  for (std::size_t k = 0; k < bins; ++k) {
    for (std::size_t t = 0; t < n_frames; ++t) {
      const std::size_t lo = t + 1 >= window_frames ? t + 1 - window_frames
                                                    : 0;
      double m = smoothed[lo][k];
      for (std::size_t u = lo + 1; u <= t; ++u)
        m = std::min(m, smoothed[u][k]);
      minima[t] = m;
    }
    // Median across frames rejects intervals where speech keeps the
    // windowed minimum elevated.
    auto mid = minima.begin() + static_cast<std::ptrdiff_t>(n_frames / 2);
    std::nth_element(minima.begin(), mid, minima.end());
    profile[k] = std::sqrt(params.bias_compensation * *mid);
  }
  return NoiseProfile{std::move(profile), NoiseMethod::kMinimumStatistics};
}

}  // namespace

NoiseProfile estimate_noise(const Spectrogram& spec,
                            const NoiseEstimationParams& params) {
  switch (params.method) {
    case NoiseMethod::kSilenceAverage:
      return estimate_silence_average(spec, params);
    case NoiseMethod::kMinimumStatistics:
      return estimate_minimum_statistics(spec, params);
  }
  throw ConfigError("noise estimation: unknown method");
}

Spectrogram spectral_subtract(const Spectrogram& spec,
                              const NoiseProfile& noise,
                              double oversubtraction, double floor) {
  if (noise.magnitude.size() != spec.num_bins())
    throw ConfigError("spectral subtraction: noise profile has " +
                      std::to_string(noise.magnitude.size()) +
                      " bins, spectrogram has " +
                      std::to_string(spec.num_bins()));
  if (oversubtraction < 1.0)
    throw ConfigError("spectral subtraction: oversubtraction must be >= 1");
  if (floor < 0.0)
    throw ConfigError("spectral subtraction: floor must be >= 0");

  Spectrogram out = spec;
  for (auto& frame : out.frames) {
    for (std::size_t k = 0; k < frame.size(); ++k) {
      const double n = noise.magnitude[k];
      if (n == 0.0) continue;  // exact identity on noise-free bins
      const double mag = std::abs(frame[k]);
      const double enhanced =
          std::max(mag - oversubtraction * n, floor * n);
      if (mag > 0.0) {
        frame[k] *= enhanced / mag;
      } else {
        frame[k] = {enhanced, 0.0};
      }
    }
  }
  return out;
}

AudioBuffer denoise(const AudioBuffer& mono, const FramingConfig& framing,
                    const NoiseEstimationParams& params,
                    double oversubtraction, double floor) {
  const auto spec = stft(mono, framing);
  const auto profile = estimate_noise(spec, params);
  return istft(spectral_subtract(spec, profile, oversubtraction, floor));
}

}  // namespace clip
