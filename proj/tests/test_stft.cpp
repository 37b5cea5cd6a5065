#include <cmath>
#include <complex>

#include "clip/errors.hpp"
#include "clip/stft.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace clip;
namespace ts = clip::testsupport;

namespace {

// Independent Parseval check: windowed time-domain energy of one frame vs
// its half-spectrum energy (DC and Nyquist counted once, the rest twice).
double spectrum_energy(const std::vector<std::complex<double>>& bins,
                       int fft_size) {
  double acc = std::norm(bins.front()) + std::norm(bins.back());
  for (std::size_t k = 1; k + 1 < bins.size(); ++k)
    acc += 2.0 * std::norm(bins[k]);
  return acc / fft_size;
}

double windowed_frame_energy(const AudioBuffer& x, const FramingConfig& cfg,
                             std::size_t frame_index) {
  const int frame = cfg.frame_samples(x.sample_rate_hz);
  const int hop = cfg.hop_samples(x.sample_rate_hz);
  const auto w = hanning_window(frame);
  double acc = 0.0;
  for (int n = 0; n < frame; ++n) {
    const double v =
        x.channels[0][frame_index * static_cast<std::size_t>(hop) +
                      static_cast<std::size_t>(n)] *
        w[static_cast<std::size_t>(n)];
    acc += v * v;
  }
  return acc;
}

}  // namespace

TEST_CASE("tone magnitude peaks at the nearest bin") {
  const auto tone = ts::sine(1000.0, 0.5, 0.5, 44100);
  const auto spec = stft(tone, {});
  REQUIRE(spec.num_frames() > 10);
  for (const auto& frame : spec.frames) {
    std::size_t peak = 0;
    for (std::size_t k = 1; k < frame.size(); ++k)
      if (std::abs(frame[k]) > std::abs(frame[peak])) peak = k;
    CHECK(std::abs(spec.bin_frequency_hz(peak) - 1000.0) <
          spec.bin_frequency_hz(1));
  }
}

TEST_CASE("all-zero buffer gives all-zero spectra") {
  const auto silent = ts::mono_buffer(std::vector<double>(44100, 0.0), 44100);
  const auto spec = stft(silent, {});
  for (const auto& frame : spec.frames)
    for (const auto& bin : frame) CHECK(std::abs(bin) == 0.0);
}

TEST_CASE("per-frame Parseval within 1e-6 relative") {
  const auto noise = ts::white_noise(0.5, 1.0, 44100, 2024);
  const FramingConfig cfg;
  const auto spec = stft(noise, cfg);
  for (std::size_t i = 0; i < spec.num_frames(); ++i) {
    const double time_energy = windowed_frame_energy(noise, spec.config, i);
    const double freq_energy = spectrum_energy(spec.frames[i], spec.fft_size);
    CHECK(std::abs(time_energy - freq_energy) <=
          1e-6 * std::max(time_energy, 1e-30));
  }
}

TEST_CASE("frame metadata: times increase by the hop") {
  const auto noise = ts::white_noise(0.1, 0.5, 44100, 1);
  const auto spec = stft(noise, {});
  const double hop_s = spec.hop_s();
  for (std::size_t i = 1; i < spec.frame_times.size(); ++i)
    CHECK(spec.frame_times[i] - spec.frame_times[i - 1] ==
          doctest::Approx(hop_s).epsilon(1e-9));
  CHECK(spec.num_bins() == static_cast<std::size_t>(spec.fft_size / 2 + 1));
}

TEST_CASE("istft reconstructs white noise on the interior") {
  const auto noise = ts::white_noise(0.9, 1.0, 44100, 77);
  const FramingConfig cfg;
  const auto spec = stft(noise, cfg);
  const auto rebuilt = istft(spec);
  const int frame = cfg.frame_samples(44100);
  const std::size_t interior_end = rebuilt.num_samples() - frame;
  CHECK(ts::max_abs_diff(noise.channels[0], rebuilt.channels[0],
                         static_cast<std::size_t>(frame),
                         interior_end) < 1e-6);
}

TEST_CASE("istft of a DC-only frame is constant under the window") {
  FramingConfig cfg;
  Spectrogram spec;
  spec.config = cfg;
  spec.sample_rate_hz = 8000;
  spec.fft_size = cfg.resolved_fft_size(8000);
  spec.config.fft_size = spec.fft_size;
  std::vector<std::complex<double>> frame(
      static_cast<std::size_t>(spec.fft_size / 2 + 1), {0.0, 0.0});
  frame[0] = {static_cast<double>(spec.fft_size), 0.0};  // ifft -> all ones
  spec.frames.push_back(frame);
  spec.frame_times.push_back(0.0125);

  const auto out = istft(spec);
  const int frame_len = cfg.frame_samples(8000);
  const auto w = hanning_window(frame_len);
  // The inverse FFT of the frame is the constant 1. The synthesis chain
  // windows it and divides by the summed squared window, so the output
  // times the window returns the constant wherever the window is supported.
  for (int n = frame_len / 8; n < 7 * frame_len / 8; ++n)
    CHECK(out.channels[0][static_cast<std::size_t>(n)] *
              w[static_cast<std::size_t>(n)] ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("zero spectrogram synthesizes silence") {
  const auto noise = ts::white_noise(0.5, 0.3, 16000, 3);
  auto spec = stft(noise, {});
  for (auto& frame : spec.frames)
    for (auto& bin : frame) bin = {0.0, 0.0};
  const auto out = istft(spec);
  for (double v : out.channels[0]) CHECK(v == 0.0);
}

TEST_CASE("buffer shorter than one frame is an error") {
  const auto tiny = ts::mono_buffer(std::vector<double>(100, 0.1), 44100);
  CHECK_THROWS_AS(stft(tiny, {}), PipelineError);
}

TEST_CASE("multi-channel input is rejected") {
  AudioBuffer stereo;
  stereo.sample_rate_hz = 44100;
  stereo.channels = {std::vector<double>(44100, 0.0),
                     std::vector<double>(44100, 0.0)};
  CHECK_THROWS_AS(stft(stereo, {}), ConfigError);
}

TEST_CASE("framing validation") {
  FramingConfig bad;
  bad.hop_length_ms = 30.0;  // hop > frame
  const auto noise = ts::white_noise(0.1, 0.5, 16000, 5);
  CHECK_THROWS_AS(stft(noise, bad), ConfigError);

  FramingConfig small_fft;
  small_fft.fft_size = 64;  // below 25 ms at 16 kHz
  CHECK_THROWS_AS(stft(noise, small_fft), ConfigError);
}
