#include "clip/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "clip/errors.hpp"
#include "clip/stft.hpp"
#include "fft.hpp"

namespace clip {

namespace {

constexpr double kQuietNan = std::numeric_limits<double>::quiet_NaN();

std::vector<int> primes_up_to(int n) {
  std::vector<int> primes;
  if (n < 2) return primes;
  std::vector<bool> sieve(static_cast<std::size_t>(n) + 1, true);
  for (int p = 2; p <= n; ++p) {
    if (!sieve[static_cast<std::size_t>(p)]) continue;
    primes.push_back(p);
    for (int q = 2 * p; q <= n; q += p) sieve[static_cast<std::size_t>(q)] = false;
  }
  return primes;
}

// Log2-spaced candidate grid over [f_min, f_max].
std::vector<double> candidate_grid(const PitchConfig& cfg) {
  std::vector<double> grid;
  const double lo = std::log2(cfg.f_min_hz);
  const double hi = std::log2(cfg.f_max_hz);
  const double step = cfg.candidate_resolution_octaves;
  for (int j = 0;; ++j) {
    const double l = lo + j * step;
    if (l > hi + 1e-12) break;
    grid.push_back(std::exp2(l));
  }
  return grid;
}

// Linear interpolation of y(x) at xi; x strictly increasing, ends clamped.
double interp_clamped(const std::vector<double>& x,
                      const std::vector<double>& y, double xi) {
  if (xi <= x.front()) return y.front();
  if (xi >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), xi);
  const std::size_t hi = static_cast<std::size_t>(it - x.begin());
  const std::size_t lo = hi - 1;
  const double t = (xi - x[lo]) / (x[hi] - x[lo]);
  return y[lo] + t * (y[hi] - y[lo]);
}

void check_pitch_config(const PitchConfig& cfg, int sample_rate_hz) {
  if (cfg.f_min_hz <= 0.0 || cfg.f_min_hz >= cfg.f_max_hz)
    throw ConfigError("pitch: need 0 < f_min < f_max");
  if (sample_rate_hz > 0 && cfg.f_max_hz >= sample_rate_hz / 2.0)
    throw ConfigError("pitch: f_max must stay below Nyquist");
  if (cfg.candidate_resolution_octaves <= 0.0)
    throw ConfigError("pitch: candidate resolution must be positive");
  if (cfg.hop_s <= 0.0) throw ConfigError("pitch: hop must be positive");
}

}  // namespace

double hz_to_erbs(double f_hz) {
  if (f_hz < 0.0) throw DomainError("hz_to_erbs: negative frequency");
  return 21.4 * std::log10(1.0 + 0.00437 * f_hz);
}

double erbs_to_hz(double erbs) {
  if (erbs < 0.0) throw DomainError("erbs_to_hz: negative ERB number");
  return (std::pow(10.0, erbs / 21.4) - 1.0) / 0.00437;
}

std::vector<double> erb_spaced_frequencies(double lo_hz, double hi_hz,
                                           double step_erbs) {
  if (lo_hz < 0.0 || hi_hz <= lo_hz || step_erbs <= 0.0)
    throw ConfigError("erb grid: invalid bounds");
  std::vector<double> freqs;
  const double lo = hz_to_erbs(lo_hz);
  const double hi = hz_to_erbs(hi_hz);
  for (double e = lo; e <= hi + 1e-12; e += step_erbs)
    freqs.push_back(erbs_to_hz(e));
  return freqs;
}

std::vector<double> pitch_kernel(const std::vector<double>& erb_grid_hz,
                                 double candidate_f0_hz,
                                 bool prime_harmonics_only) {
  const std::size_t n = erb_grid_hz.size();
  std::vector<double> kernel(n, 0.0);
  const double f_top = erb_grid_hz.back();
  const int n_harmonics =
      static_cast<int>(f_top / candidate_f0_hz - 0.75);

  std::vector<int> harmonics{1};
  if (prime_harmonics_only) {
    for (int p : primes_up_to(n_harmonics)) harmonics.push_back(p);
  } else {
    for (int h = 2; h <= n_harmonics; ++h) harmonics.push_back(h);
  }

  // Cosine lobe at each harmonic, half-weight valleys beside it, harmonic
  // weight decaying as 1/sqrt(h). A weight constant across each lobe keeps
  // the lobe apex exactly on the harmonic; a pointwise 1/sqrt(f) envelope
  // would shift it by 1/(8 pi^2) and bias pure tones sharp.
  for (std::size_t i = 0; i < n; ++i) {
    const double q = erb_grid_hz[i] / candidate_f0_hz;
    for (int h : harmonics) {
      const double a = std::abs(q - h);
      const double weight = 1.0 / std::sqrt(static_cast<double>(h));
      if (a < 0.25)
        kernel[i] = std::cos(2.0 * M_PI * q) * weight;
      else if (a < 0.75)
        kernel[i] += std::cos(2.0 * M_PI * q) / 2.0 * weight;
    }
  }

  // Normalize so a perfectly matching spectrum scores 1 against the
  // positive lobes.
  double positive_norm_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (kernel[i] > 0.0) positive_norm_sq += kernel[i] * kernel[i];
  }
  if (positive_norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(positive_norm_sq);
    for (auto& k : kernel) k *= inv;
  }
  return kernel;
}

double pitch_strength(const std::vector<double>& sqrt_magnitude,
                      const std::vector<double>& erb_grid_hz,
                      double candidate_f0_hz, const PitchConfig& config) {
  if (candidate_f0_hz < config.f_min_hz || candidate_f0_hz > config.f_max_hz)
    throw DomainError("pitch_strength: candidate outside search range");
  if (sqrt_magnitude.size() != erb_grid_hz.size())
    throw ConfigError("pitch_strength: spectrum/grid size mismatch");
  const auto kernel = pitch_kernel(erb_grid_hz, candidate_f0_hz,
                                   config.prime_harmonics_only);
  double dot = 0.0, norm_sq = 0.0;
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    dot += kernel[i] * sqrt_magnitude[i];
    norm_sq += sqrt_magnitude[i] * sqrt_magnitude[i];
  }
  return norm_sq > 0.0 ? dot / std::sqrt(norm_sq) : 0.0;
}

namespace {

// Catmull-Rom cubic on the uniform FFT bin grid. Linear interpolation
// biases the lobe centroid toward the stronger bin and costs a few percent
// of pitch accuracy for wide-bin windows; a local cubic reconstructs the
// lobe shape.
double cubic_bin_interp(const std::vector<double>& mag, double position) {
  const auto n = static_cast<std::ptrdiff_t>(mag.size());
  if (position <= 0.0) return mag.front();
  if (position >= static_cast<double>(n - 1)) return mag.back();
  const auto k = static_cast<std::ptrdiff_t>(position);
  const double t = position - static_cast<double>(k);
  const auto at = [&](std::ptrdiff_t i) {
    return mag[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, n - 1))];
  };
  const double m0 = at(k - 1), m1 = at(k), m2 = at(k + 1), m3 = at(k + 2);
  return 0.5 * (2.0 * m1 + (-m0 + m2) * t +
                (2.0 * m0 - 5.0 * m1 + 4.0 * m2 - m3) * t * t +
                (-m0 + 3.0 * m1 - 3.0 * m2 + m3) * t * t * t);
}

// Per-window-size analysis: spectra at hop ws/2, resampled onto the shared
// ERB grid as square-root magnitudes.
struct WindowAnalysis {
  std::vector<double> frame_times;
  std::vector<std::vector<double>> sqrt_mag;  // [frame][erb bin]
};

// Per-window-size analysis over fully supported frames only: centers run
// from ws/2 to N - ws/2 at hop ws/2. Partially supported frames distort
// the local spectrum by a few percent, so they are never emitted; the
// caller restricts each window's contribution to this time span.
WindowAnalysis analyze_window_size(const std::vector<double>& x, int sr,
                                   int ws,
                                   const std::vector<double>& erb_grid_hz) {
  WindowAnalysis out;
  const int hop = std::max(1, ws / 2);
  const auto window = hanning_window(ws);
  const double bin_width = static_cast<double>(sr) / ws;

  std::vector<double> buf(static_cast<std::size_t>(ws));
  for (std::size_t start = 0; start + static_cast<std::size_t>(ws) <= x.size();
       start += static_cast<std::size_t>(hop)) {
    for (int n = 0; n < ws; ++n)
      buf[static_cast<std::size_t>(n)] =
          x[start + static_cast<std::size_t>(n)] *
          window[static_cast<std::size_t>(n)];
    const auto bins = detail::rfft(buf);
    std::vector<double> mag(bins.size());
    for (std::size_t k = 0; k < bins.size(); ++k) mag[k] = std::abs(bins[k]);

    std::vector<double> resampled(erb_grid_hz.size());
    for (std::size_t i = 0; i < erb_grid_hz.size(); ++i)
      resampled[i] = std::sqrt(
          std::max(0.0, cubic_bin_interp(mag, erb_grid_hz[i] / bin_width)));
    out.sqrt_mag.push_back(std::move(resampled));
    out.frame_times.push_back(
        (static_cast<double>(start) + ws / 2.0) / sr);
  }
  return out;
}

}  // namespace

PitchContour estimate_f0_contour(const AudioBuffer& buffer,
                                 const PitchConfig& config) {
  if (buffer.num_channels() != 1)
    throw ConfigError("pitch: mono buffer required, call to_mono first");
  const int sr = buffer.sample_rate_hz;
  check_pitch_config(config, sr);
  const auto& x = buffer.channels.front();

  // Power-of-two window sizes bracketing cycles_per_window cycles of every
  // candidate, largest first.
  const int p_hi = static_cast<int>(
      std::lround(std::log2(config.cycles_per_window * sr / config.f_min_hz)));
  const int p_lo = static_cast<int>(
      std::lround(std::log2(config.cycles_per_window * sr / config.f_max_hz)));
  std::vector<int> window_sizes;
  for (int p = p_hi; p >= p_lo; --p) window_sizes.push_back(1 << p);

  if (x.size() < static_cast<std::size_t>(window_sizes.back()))
    throw PipelineError("pitch: buffer shorter than one analysis window (" +
                        std::to_string(x.size()) + " < " +
                        std::to_string(window_sizes.back()) + " samples)");

  const auto candidates = candidate_grid(config);
  const auto erb_grid_hz = erb_spaced_frequencies(
      std::max(1.0, config.f_min_hz / 4.0), sr / 2.0, config.erb_step);

  std::vector<std::vector<double>> kernels(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c)
    kernels[c] = pitch_kernel(erb_grid_hz, candidates[c],
                              config.prime_harmonics_only);

  // Interpolation weight of window index i for each candidate: 1 at the
  // window whose size matches cycles_per_window cycles, fading linearly in
  // log2(window size) to the neighbor.
  std::vector<std::vector<double>> window_weight(
      window_sizes.size(), std::vector<double>(candidates.size(), 0.0));
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const double ideal =
        std::log2(config.cycles_per_window * sr / candidates[c]);
    for (std::size_t i = 0; i < window_sizes.size(); ++i) {
      const double dist = std::abs(static_cast<double>(p_hi) -
                                   static_cast<double>(i) - ideal);
      window_weight[i][c] = std::max(0.0, 1.0 - dist);
    }
  }

  const double duration = buffer.duration_s();
  std::vector<double> t_grid;
  for (double t = 0.0; t <= duration + 1e-12; t += config.hop_s)
    t_grid.push_back(t);

  std::vector<std::vector<double>> strength(
      candidates.size(), std::vector<double>(t_grid.size(), 0.0));

  std::vector<double> si;
  for (std::size_t i = 0; i < window_sizes.size(); ++i) {
    if (x.size() < static_cast<std::size_t>(window_sizes[i])) continue;
    const auto analysis =
        analyze_window_size(x, sr, window_sizes[i], erb_grid_hz);
    if (analysis.frame_times.empty()) continue;
    // This window only speaks for times it can cover with full support.
    // Candidates missing part of their window weight near the edges end up
    // with proportionally reduced strength and fail the voicing threshold.
    const double t_lo = 0.5 * window_sizes[i] / sr;
    const double t_hi = duration - t_lo;
    std::vector<double> norms(analysis.sqrt_mag.size());
    for (std::size_t m = 0; m < analysis.sqrt_mag.size(); ++m) {
      double nsq = 0.0;
      for (double v : analysis.sqrt_mag[m]) nsq += v * v;
      norms[m] = std::sqrt(nsq);
    }
    si.resize(analysis.frame_times.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const double weight = window_weight[i][c];
      if (weight <= 0.0) continue;
      const auto& kernel = kernels[c];
      for (std::size_t m = 0; m < analysis.sqrt_mag.size(); ++m) {
        if (norms[m] == 0.0) {
          si[m] = 0.0;
          continue;
        }
        double dot = 0.0;
        const auto& l = analysis.sqrt_mag[m];
        for (std::size_t b = 0; b < kernel.size(); ++b) dot += kernel[b] * l[b];
        si[m] = dot / norms[m];
      }
      for (std::size_t j = 0; j < t_grid.size(); ++j) {
        if (t_grid[j] < t_lo - 1e-9 || t_grid[j] > t_hi + 1e-9) continue;
        strength[c][j] +=
            weight * interp_clamped(analysis.frame_times, si, t_grid[j]);
      }
    }
  }

  // A candidate's strength is meaningful only where every window it draws
  // on is fully supported; partial sums near the edges would make wrong
  // neighbors win on support fraction rather than fit. supported[c][j]
  // records where the full window set backs the value.
  std::vector<std::vector<bool>> supported(
      candidates.size(), std::vector<bool>(t_grid.size(), true));
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double max_member_ws = 0.0;
    for (std::size_t i = 0; i < window_sizes.size(); ++i)
      if (window_weight[i][c] > 0.0)
        max_member_ws = std::max(max_member_ws,
                                 static_cast<double>(window_sizes[i]));
    const double t_lo = 0.5 * max_member_ws / sr;
    const double t_hi = duration - t_lo;
    for (std::size_t j = 0; j < t_grid.size(); ++j)
      if (t_grid[j] < t_lo - 1e-9 || t_grid[j] > t_hi + 1e-9) {
        strength[c][j] = 0.0;
        supported[c][j] = false;
      }
  }

  // Frame RMS over a 25 ms window, for the relative energy gate.
  const int rms_half = std::max(1, static_cast<int>(std::lround(0.0125 * sr)));
  std::vector<double> frame_rms(t_grid.size(), 0.0);
  double max_rms = 0.0;
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    const auto center = static_cast<std::ptrdiff_t>(
        std::lround(t_grid[j] * sr));
    const auto lo = std::max<std::ptrdiff_t>(0, center - rms_half);
    const auto hi = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(x.size()), center + rms_half);
    double acc = 0.0;
    for (auto n = lo; n < hi; ++n)
      acc += x[static_cast<std::size_t>(n)] * x[static_cast<std::size_t>(n)];
    frame_rms[j] = hi > lo ? std::sqrt(acc / static_cast<double>(hi - lo)) : 0.0;
    max_rms = std::max(max_rms, frame_rms[j]);
  }
  const double rms_gate = config.rms_floor * max_rms;

  PitchContour contour;
  contour.frame_times = t_grid;
  contour.f0_hz.resize(t_grid.size(), kQuietNan);
  contour.strength.resize(t_grid.size(), 0.0);
  contour.voiced.assign(t_grid.size(), false);

  const double log_step = config.candidate_resolution_octaves;
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < candidates.size(); ++c)
      if (strength[c][j] > strength[best][j]) best = c;
    double s = strength[best][j];
    double log2_f0 = std::log2(candidates[best]);

    // Near the edges the supported sub-range shrinks; a winner sitting at
    // its inner boundary is a neighbor capturing an out-of-range pitch
    // through its first lobe, not a real estimate.
    std::size_t lo = 0, hi = candidates.size() - 1;
    while (lo < candidates.size() && !supported[lo][j]) ++lo;
    while (hi > 0 && !supported[hi][j]) --hi;
    const bool boundary_capture =
        lo > candidates.size() - 1 ||
        (best == lo && lo > 0) ||
        (best == hi && hi + 1 < candidates.size());
    if (boundary_capture) s = 0.0;

    // Parabolic refinement over the three neighboring candidates.
    if (best > 0 && best + 1 < candidates.size()) {
      const double s_lo = strength[best - 1][j];
      const double s_hi = strength[best + 1][j];
      const double denom = s_lo - 2.0 * s + s_hi;
      if (denom < 0.0) {
        double delta = 0.5 * (s_lo - s_hi) / denom;
        delta = std::clamp(delta, -0.5, 0.5);
        log2_f0 += delta * log_step;
        s -= 0.25 * (s_lo - s_hi) * delta;
      }
    }

    const double f0 =
        std::clamp(std::exp2(log2_f0), config.f_min_hz, config.f_max_hz);
    contour.strength[j] = s;
    const bool voiced = s >= config.strength_threshold &&
                        max_rms > 0.0 && frame_rms[j] >= rms_gate;
    contour.voiced[j] = voiced;
    if (voiced || config.emit_unvoiced_f0) contour.f0_hz[j] = f0;
  }
  return contour;
}

double average_f0(const PitchContour& contour) {
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < contour.num_frames(); ++j) {
    if (contour.voiced[j] && !std::isnan(contour.f0_hz[j])) {
      acc += contour.f0_hz[j];
      ++count;
    }
  }
  if (count == 0) throw PipelineError("average_f0: no voiced frames");
  return acc / static_cast<double>(count);
}

double pitch_range(const PitchContour& contour) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t j = 0; j < contour.num_frames(); ++j) {
    if (contour.voiced[j] && !std::isnan(contour.f0_hz[j])) {
      lo = std::min(lo, contour.f0_hz[j]);
      hi = std::max(hi, contour.f0_hz[j]);
      any = true;
    }
  }
  if (!any) throw PipelineError("pitch_range: no voiced frames");
  return hi - lo;
}

}  // namespace clip
