#pragma once

#include <vector>

#include "clip/audio.hpp"

namespace clip {

// Sawtooth-inspired F0 estimator configuration. Defaults follow the prime-
// harmonic kernel variant with a 1/96-octave candidate grid over [50, 500]
// Hz; analysis windows are candidate-dependent powers of two spanning
// `cycles_per_window` cycles of the candidate.
struct PitchConfig {
  double f_min_hz = 50.0;
  double f_max_hz = 500.0;
  double candidate_resolution_octaves = 1.0 / 96.0;
  double strength_threshold = 0.30;
  double rms_floor = 0.01;  // fraction of the recording's max frame RMS
  double erb_step = 0.1;
  double cycles_per_window = 8.0;
  double hop_s = 0.010;
  bool prime_harmonics_only = true;  // plain-harmonic kernel when false
  bool emit_unvoiced_f0 = false;     // keep raw estimates on unvoiced frames
};

// Per-frame F0 estimates. f0_hz is NaN where no pitch is reported; voiced
// is true iff strength >= threshold and frame RMS >= the relative floor.
struct PitchContour {
  std::vector<double> frame_times;
  std::vector<double> f0_hz;
  std::vector<double> strength;
  std::vector<bool> voiced;

  std::size_t num_frames() const { return frame_times.size(); }
};

// Equivalent-rectangular-bandwidth scale, erbs = 21.4 log10(1 + 0.00437 f).
double hz_to_erbs(double f_hz);
double erbs_to_hz(double erbs);

// Uniform ERB-scale frequency grid between the two bounds.
std::vector<double> erb_spaced_frequencies(double lo_hz, double hi_hz,
                                           double step_erbs);

// Harmonic template on an ERB-sampled frequency grid: cosine lobes at the
// candidate's (prime) harmonics, half-weight valleys beside them, 1/sqrt(f)
// decay, normalized by the norm of the positive part.
std::vector<double> pitch_kernel(const std::vector<double>& erb_grid_hz,
                                 double candidate_f0_hz,
                                 bool prime_harmonics_only = true);

// Normalized inner product of the kernel with an ERB-resampled square-root
// magnitude spectrum. Candidate outside [f_min, f_max] -> DomainError.
double pitch_strength(const std::vector<double>& sqrt_magnitude,
                      const std::vector<double>& erb_grid_hz,
                      double candidate_f0_hz, const PitchConfig& config = {});

// F0 contour over a log-spaced candidate grid with parabolic refinement of
// the per-frame argmax. Throws PipelineError when the buffer is shorter
// than the smallest analysis window.
PitchContour estimate_f0_contour(const AudioBuffer& buffer,
                                 const PitchConfig& config = {});

// Arithmetic mean of f0 over voiced frames; PipelineError when none.
double average_f0(const PitchContour& contour);

// max(f0) - min(f0) over voiced frames; PipelineError when none.
double pitch_range(const PitchContour& contour);

}  // namespace clip
