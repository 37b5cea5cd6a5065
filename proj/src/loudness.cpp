#include "clip/loudness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clip/errors.hpp"

namespace clip {

namespace {

constexpr double kQuietNan = std::numeric_limits<double>::quiet_NaN();

// Zwicker excitation slopes, dB per Bark. The lower skirt is fixed; the
// upper skirt flattens with component level and is clamped to stay usable
// at extreme levels.
constexpr double kLowerSlopeDbPerBark = 27.0;
constexpr double kUpperSlopeBase = 24.0;
constexpr double kUpperSlopeLevelFactor = 0.2;
constexpr double kUpperSlopeMin = 4.0;
constexpr double kUpperSlopeMax = 27.0;

// Components below this intensity (-120 dB) cannot contribute audibly.
constexpr double kIntensityFloor = 1e-12;

struct BarkCells {
  std::vector<double> bark;          // z at each cell
  std::vector<double> frequency_hz;  // center frequency
  std::vector<double> threshold_db;  // threshold in quiet
};

const BarkCells& bark_cells() {
  static const BarkCells cells = [] {
    BarkCells c;
    c.bark.resize(bark_grid::kSize);
    c.frequency_hz.resize(bark_grid::kSize);
    c.threshold_db.resize(bark_grid::kSize);
    for (int i = 0; i < bark_grid::kSize; ++i) {
      const double z = i * bark_grid::kStep;
      c.bark[i] = z;
      c.frequency_hz[i] = bark_to_hz(z);
      c.threshold_db[i] = threshold_in_quiet_db(c.frequency_hz[i]);
    }
    return c;
  }();
  return cells;
}

}  // namespace

double hz_to_bark(double f_hz) {
  if (f_hz < 0.0) throw DomainError("hz_to_bark: negative frequency");
  const double r = f_hz / 7500.0;
  return 13.0 * std::atan(0.00076 * f_hz) + 3.5 * std::atan(r * r);
}

double bark_to_hz(double z) {
  if (z <= 0.0) return 0.0;
  double lo = 0.0, hi = 30000.0;
  while (hz_to_bark(hi) < z) hi *= 2.0;
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (hz_to_bark(mid) < z ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double threshold_in_quiet_db(double f_hz) {
  if (f_hz <= 0.0) return 120.0;
  const double khz = f_hz / 1000.0;
  const double tq = 3.64 * std::pow(khz, -0.8) -
                    6.5 * std::exp(-0.6 * (khz - 3.3) * (khz - 3.3)) +
                    1e-3 * khz * khz * khz * khz;
  return std::min(tq, 120.0);
}

std::vector<double> excitation_pattern(
    const std::vector<std::complex<double>>& frame, int sample_rate_hz,
    int fft_size, int frame_samples, const CalibrationSpec& calibration) {
  if (sample_rate_hz <= 0 || fft_size <= 0 || frame_samples <= 0 ||
      frame_samples > fft_size)
    throw ConfigError("excitation: invalid framing parameters");
  if (frame.size() != static_cast<std::size_t>(fft_size / 2 + 1))
    throw ConfigError("excitation: bin count does not match fft size");

  // Energy normalization such that a full-scale sine sums to intensity 1
  // across its leakage bins (robust to off-bin-center tones).
  const auto window = hanning_window(frame_samples);
  double window_energy = 0.0;
  for (double w : window) window_energy += w * w;
  const double bin_scale = 4.0 / (fft_size * window_energy);
  const double calib_gain =
      std::pow(10.0, calibration.full_scale_sine_db_spl / 10.0);

  const BarkCells& cells = bark_cells();
  std::vector<double> excitation_power(bark_grid::kSize, 0.0);

  for (std::size_t k = 1; k < frame.size(); ++k) {
    const double intensity = std::norm(frame[k]) * bin_scale * calib_gain;
    if (intensity < kIntensityFloor) continue;
    const double f_k =
        static_cast<double>(k) * sample_rate_hz / fft_size;
    const double z_k = hz_to_bark(f_k);
    const double level_db = 10.0 * std::log10(intensity);
    const double upper_slope =
        std::clamp(kUpperSlopeBase + 230.0 / f_k -
                       kUpperSlopeLevelFactor * level_db,
                   kUpperSlopeMin, kUpperSlopeMax);
    for (int c = 0; c < bark_grid::kSize; ++c) {
      const double delta = cells.bark[c] - z_k;
      double atten_db = 0.0;
      if (delta < -0.5)
        atten_db = kLowerSlopeDbPerBark * (-delta - 0.5);
      else if (delta > 0.5)
        atten_db = upper_slope * (delta - 0.5);
      if (atten_db > 120.0) continue;
      excitation_power[c] += intensity * std::pow(10.0, -atten_db / 10.0);
    }
  }

  std::vector<double> excitation_db(bark_grid::kSize);
  for (int c = 0; c < bark_grid::kSize; ++c)
    excitation_db[c] =
        10.0 * std::log10(std::max(excitation_power[c], kIntensityFloor));
  return excitation_db;
}

SpecificLoudnessDistribution specific_loudness(
    const std::vector<double>& excitation_db) {
  if (excitation_db.size() != static_cast<std::size_t>(bark_grid::kSize))
    throw ConfigError("specific loudness: excitation not on the Bark grid");
  const BarkCells& cells = bark_cells();
  SpecificLoudnessDistribution dist;
  dist.n_prime.resize(bark_grid::kSize);
  for (int c = 0; c < bark_grid::kSize; ++c) {
    const double e_rel =
        std::pow(10.0, (excitation_db[c] - cells.threshold_db[c]) / 10.0);
    if (e_rel <= 1.0) {
      dist.n_prime[c] = 0.0;
      continue;
    }
    const double tq_factor =
        std::pow(10.0, 0.23 * cells.threshold_db[c] / 10.0);
    dist.n_prime[c] =
        0.08 * tq_factor * (std::pow(0.5 + 0.5 * e_rel, 0.23) - 1.0);
  }
  return dist;
}

double total_loudness(const SpecificLoudnessDistribution& dist) {
  if (dist.n_prime.size() != static_cast<std::size_t>(bark_grid::kSize))
    throw ConfigError("total loudness: distribution not on the Bark grid");
  // Left-endpoint rectangle rule: 240 cells of width 0.1 covering [0, 24].
  double acc = 0.0;
  for (int c = 0; c < bark_grid::kSize - 1; ++c) acc += dist.n_prime[c];
  return acc * bark_grid::kStep;
}

double sone_to_phon(double n) {
  if (n < 0.0) throw DomainError("sone_to_phon: negative loudness");
  if (n == 0.0) return kQuietNan;
  if (n >= 1.0) return 40.0 + 10.0 * std::log2(n);
  return 40.0 * std::pow(n + 0.0005, 0.35);
}

double phon_to_sone(double phon) {
  if (phon >= 40.0) return std::exp2((phon - 40.0) / 10.0);
  const double base = phon / 40.0;
  return std::max(0.0, std::pow(base, 1.0 / 0.35) - 0.0005);
}

LoudnessContour loudness_contour(const AudioBuffer& buffer,
                                 const FramingConfig& framing,
                                 const CalibrationSpec& calibration,
                                 const LoudnessParams& params) {
  const Spectrogram spec = stft(buffer, framing);
  const int frame_samples = framing.frame_samples(buffer.sample_rate_hz);

  LoudnessContour contour;
  contour.frame_times = spec.frame_times;
  contour.loudness_sone.resize(spec.num_frames());
  contour.level_phon.resize(spec.num_frames());

  const double hop_s = spec.hop_s();
  const double smoothing =
      params.time_constant_s > 0.0 ? std::exp(-hop_s / params.time_constant_s)
                                   : 0.0;

  double integrated = 0.0;
  for (std::size_t t = 0; t < spec.num_frames(); ++t) {
    const auto excitation =
        excitation_pattern(spec.frames[t], spec.sample_rate_hz, spec.fft_size,
                           frame_samples, calibration);
    const double instantaneous = total_loudness(specific_loudness(excitation));
    integrated = t == 0 ? instantaneous
                        : smoothing * integrated +
                              (1.0 - smoothing) * instantaneous;
    contour.loudness_sone[t] = integrated;
    contour.level_phon[t] = sone_to_phon(integrated);
  }
  return contour;
}

double average_loudness_level(const LoudnessContour& contour,
                              double sone_floor) {
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < contour.loudness_sone.size(); ++t) {
    if (contour.loudness_sone[t] > sone_floor &&
        !std::isnan(contour.level_phon[t])) {
      acc += contour.level_phon[t];
      ++count;
    }
  }
  if (count == 0)
    throw PipelineError(
        "average loudness: no frames above the silence floor (empty signal)");
  return acc / static_cast<double>(count);
}

}  // namespace clip
