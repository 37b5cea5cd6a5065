#pragma once

#include <complex>
#include <vector>

#include "clip/audio.hpp"
#include "clip/stft.hpp"

namespace clip {

// Critical-band-rate grid: [0, 24] Bark sampled at 0.1 Bark (241 points).
namespace bark_grid {
constexpr int kSize = 241;
constexpr double kStep = 0.1;
constexpr double kMaxBark = 24.0;
}  // namespace bark_grid

// Maps a digital full-scale sine to an assumed sound pressure level. The
// recordings carry no absolute SPL reference, so every report echoes this
// offset.
struct CalibrationSpec {
  double full_scale_sine_db_spl = 94.0;
};

// Specific loudness N'(z) in sone/Bark on the canonical grid.
struct SpecificLoudnessDistribution {
  std::vector<double> n_prime;  // bark_grid::kSize entries, all >= 0

  static double bark_at(int index) { return index * bark_grid::kStep; }
};

// Per-frame total loudness and loudness level time series. level_phon is
// NaN where loudness_sone == 0 (silence carries no loudness level).
struct LoudnessContour {
  std::vector<double> frame_times;
  std::vector<double> loudness_sone;
  std::vector<double> level_phon;
};

struct LoudnessParams {
  double time_constant_s = 0.05;  // first-order temporal integration
  double sone_floor = 0.02;       // frames below this are left out of averages
};

// Critical-band rate, z = 13 atan(0.00076 f) + 3.5 atan((f/7500)^2).
double hz_to_bark(double f_hz);
// Numeric inverse of hz_to_bark (monotone bisection).
double bark_to_hz(double z);

// Threshold in quiet at a grid frequency, dB SPL (Terhardt's analytic
// approximation of the standard threshold curve, clamped to 120 dB).
double threshold_in_quiet_db(double f_hz);

// Excitation level L_E(z) in dB on the Bark grid for one short-time
// spectrum frame: bin powers are calibrated to SPL, given full weight over
// the component's critical band (+-0.5 Bark) and rolled off by 27 dB/Bark
// toward lower z and a level-dependent Zwicker slope toward higher z.
// `frame_samples` is the analysis window length before zero-padding.
std::vector<double> excitation_pattern(
    const std::vector<std::complex<double>>& frame, int sample_rate_hz,
    int fft_size, int frame_samples, const CalibrationSpec& calibration);

// N'(z) = 0.08 (E_TQ/E_0)^0.23 [(0.5 + 0.5 E/E_TQ)^0.23 - 1], clamped at 0
// below the threshold in quiet.
SpecificLoudnessDistribution specific_loudness(
    const std::vector<double>& excitation_db);

// N = sum N'(z) dz, rectangle rule with dz = 0.1 over [0, 24] Bark.
double total_loudness(const SpecificLoudnessDistribution& dist);

// Loudness level: n >= 1 sone -> 40 + 10 log2(n) phon;
// 0 < n < 1 -> 40 (n + 0.0005)^0.35; n == 0 -> NaN (absent).
double sone_to_phon(double n);
// Inverse on n > 0.
double phon_to_sone(double phon);

// Per-frame excitation -> N' -> N -> phon with first-order temporal
// integration of N (time constant per params).
LoudnessContour loudness_contour(const AudioBuffer& buffer,
                                 const FramingConfig& framing,
                                 const CalibrationSpec& calibration,
                                 const LoudnessParams& params = {});

// Mean loudness level over frames with N above the silence floor.
double average_loudness_level(const LoudnessContour& contour,
                              double sone_floor = 0.02);

}  // namespace clip
