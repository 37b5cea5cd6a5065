#include <algorithm>
#include <cmath>

#include "clip/errors.hpp"
#include "clip/loudness.hpp"
#include "clip/stft.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace clip;
namespace ts = clip::testsupport;

namespace {

std::vector<double> excitation_of(const AudioBuffer& buffer,
                                  std::size_t frame_index,
                                  const CalibrationSpec& calib = {}) {
  const FramingConfig cfg;
  const auto spec = stft(buffer, cfg);
  return excitation_pattern(spec.frames[frame_index], spec.sample_rate_hz,
                            spec.fft_size,
                            cfg.frame_samples(buffer.sample_rate_hz), calib);
}

double argmax_bark(const std::vector<double>& excitation) {
  const auto it = std::max_element(excitation.begin(), excitation.end());
  return static_cast<double>(it - excitation.begin()) * bark_grid::kStep;
}

}  // namespace

TEST_CASE("bark scale anchors") {
  CHECK(hz_to_bark(0.0) == 0.0);
  // frozen from an independent evaluation of the arctan formula
  CHECK(hz_to_bark(1000.0) == doctest::Approx(8.5105315).epsilon(1e-6));
  CHECK(hz_to_bark(2000.0) > hz_to_bark(1000.0));
  CHECK_THROWS_AS(hz_to_bark(-1.0), DomainError);

  // monotone on a dense grid, and bark_to_hz inverts it
  double prev = -1.0;
  for (double f = 0.0; f <= 16000.0; f += 50.0) {
    const double z = hz_to_bark(f);
    CHECK(z > prev);
    prev = z;
  }
  for (double z = 0.5; z <= 23.5; z += 0.7)
    CHECK(hz_to_bark(bark_to_hz(z)) == doctest::Approx(z).epsilon(1e-9));
}

TEST_CASE("full-scale 1 kHz sine excites near its critical band") {
  const auto tone = ts::sine(1000.0, 0.999, 0.5, 44100);
  const auto excitation = excitation_of(tone, 5);
  CHECK(std::abs(argmax_bark(excitation) - hz_to_bark(1000.0)) <= 0.5);
  // peak level near the calibration offset (94 dB for full scale)
  const double peak = *std::max_element(excitation.begin(), excitation.end());
  CHECK(peak == doctest::Approx(94.0).epsilon(0.02));
}

TEST_CASE("silence stays at or below threshold in every band") {
  const auto silent = ts::mono_buffer(std::vector<double>(22050, 0.0), 44100);
  const auto excitation = excitation_of(silent, 3);
  for (int c = 0; c < bark_grid::kSize; ++c) {
    const double f = bark_to_hz(c * bark_grid::kStep);
    CHECK(excitation[static_cast<std::size_t>(c)] <=
          threshold_in_quiet_db(f) + 1e-9);
  }
  const auto dist = specific_loudness(excitation);
  for (double n : dist.n_prime) CHECK(n == 0.0);
}

TEST_CASE("two distant tones give two excitation peaks") {
  auto tones = ts::mix(ts::sine(100.0, 0.4, 0.5, 44100),
                       ts::sine(10000.0, 0.4, 0.5, 44100));
  const auto excitation = excitation_of(tones, 5);
  const double z_low = hz_to_bark(100.0), z_high = hz_to_bark(10000.0);
  const auto cell = [&](double z) {
    return excitation[static_cast<std::size_t>(std::lround(z * 10.0))];
  };
  const double mid = cell(0.5 * (z_low + z_high));
  CHECK(cell(z_low) > mid + 20.0);
  CHECK(cell(z_high) > mid + 20.0);
}

TEST_CASE("specific loudness clamps at threshold and grows with level") {
  std::vector<double> at_threshold(bark_grid::kSize);
  for (int c = 0; c < bark_grid::kSize; ++c)
    at_threshold[static_cast<std::size_t>(c)] =
        threshold_in_quiet_db(bark_to_hz(c * bark_grid::kStep));
  const auto dist = specific_loudness(at_threshold);
  for (double n : dist.n_prime) CHECK(n == 0.0);

  auto below = at_threshold;
  for (auto& v : below) v -= 10.0;
  for (double n : specific_loudness(below).n_prime) CHECK(n == 0.0);

  auto above = at_threshold;
  for (auto& v : above) v += 20.0;
  const auto d20 = specific_loudness(above);
  for (auto& v : above) v += 3.0;  // doubling the excitation power
  const auto d23 = specific_loudness(above);
  for (int c = 0; c < bark_grid::kSize; ++c) {
    CHECK(d20.n_prime[static_cast<std::size_t>(c)] > 0.0);
    CHECK(d23.n_prime[static_cast<std::size_t>(c)] >
          d20.n_prime[static_cast<std::size_t>(c)]);
  }
}

TEST_CASE("rectangle rule: constant 1 sone/Bark integrates to 24 sone") {
  SpecificLoudnessDistribution dist;
  dist.n_prime.assign(bark_grid::kSize, 1.0);
  CHECK(std::abs(total_loudness(dist) - 24.0) < 1e-9);

  SpecificLoudnessDistribution zero;
  zero.n_prime.assign(bark_grid::kSize, 0.0);
  CHECK(total_loudness(zero) == 0.0);

  // linearity in the distribution
  SpecificLoudnessDistribution ramp;
  ramp.n_prime.resize(bark_grid::kSize);
  for (int c = 0; c < bark_grid::kSize; ++c)
    ramp.n_prime[static_cast<std::size_t>(c)] = 0.01 * c;
  auto ramp3 = ramp;
  for (auto& v : ramp3.n_prime) v *= 3.0;
  CHECK(total_loudness(ramp3) ==
        doctest::Approx(3.0 * total_loudness(ramp)).epsilon(1e-12));
}

TEST_CASE("sone/phon anchors") {
  CHECK(sone_to_phon(1.0) == 40.0);
  CHECK(sone_to_phon(2.0) == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(sone_to_phon(4.0) == doctest::Approx(60.0).epsilon(1e-12));
  CHECK(std::isnan(sone_to_phon(0.0)));
  CHECK_THROWS_AS(sone_to_phon(-0.1), DomainError);

  for (double n = 1.0; n < 200.0; n *= 1.7)
    CHECK(phon_to_sone(sone_to_phon(n)) == doctest::Approx(n).epsilon(1e-9));
}

TEST_CASE("1 kHz at 40 dB SPL is close to 1 sone") {
  // default calibration: full scale = 94 dB SPL -> amplitude for 40 dB
  const double amplitude = std::pow(10.0, (40.0 - 94.0) / 20.0);
  const auto tone = ts::sine(1000.0, amplitude, 0.5, 44100);
  const auto contour = loudness_contour(tone, {}, {}, {});
  const double mid = contour.loudness_sone[contour.loudness_sone.size() / 2];
  CHECK(mid > 0.85);
  CHECK(mid < 1.15);
}

TEST_CASE("loudness grows monotonically with 10 dB steps") {
  double previous = 0.0;
  for (int spl = 30; spl <= 80; spl += 10) {
    const double amplitude = std::pow(10.0, (spl - 94.0) / 20.0);
    const auto tone = ts::sine(1000.0, amplitude, 0.3, 44100);
    const auto contour = loudness_contour(tone, {}, {}, {});
    const double mid = contour.loudness_sone[contour.loudness_sone.size() / 2];
    CHECK(mid > previous);
    previous = mid;
  }
}

TEST_CASE("contour follows an amplitude-modulated envelope") {
  const int sr = 44100;
  auto tone = ts::sine(1000.0, 0.5, 2.0, sr);
  auto& x = tone.channels[0];
  const double mod_hz = 1.5;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / sr;
    x[i] *= 0.55 + 0.45 * std::sin(2.0 * M_PI * mod_hz * t);
  }
  LoudnessParams params;
  params.time_constant_s = 0.02;  // fast integration to track the envelope
  const auto contour = loudness_contour(tone, {}, {}, params);

  // correlation between the known envelope and the sone contour
  std::vector<double> envelope(contour.frame_times.size());
  for (std::size_t i = 0; i < envelope.size(); ++i)
    envelope[i] =
        0.55 + 0.45 * std::sin(2.0 * M_PI * mod_hz * contour.frame_times[i]);
  const auto mean = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double s : v) acc += s;
    return acc / static_cast<double>(v.size());
  };
  const double me = mean(envelope), ml = mean(contour.loudness_sone);
  double num = 0.0, de = 0.0, dl = 0.0;
  for (std::size_t i = 0; i < envelope.size(); ++i) {
    num += (envelope[i] - me) * (contour.loudness_sone[i] - ml);
    de += (envelope[i] - me) * (envelope[i] - me);
    dl += (contour.loudness_sone[i] - ml) * (contour.loudness_sone[i] - ml);
  }
  CHECK(num / std::sqrt(de * dl) > 0.9);
}

TEST_CASE("silence gives a zero contour and no average") {
  const auto silent = ts::mono_buffer(std::vector<double>(44100, 0.0), 44100);
  const auto contour = loudness_contour(silent, {}, {}, {});
  for (double n : contour.loudness_sone) CHECK(n == 0.0);
  for (double p : contour.level_phon) CHECK(std::isnan(p));
  CHECK_THROWS_AS(average_loudness_level(contour), PipelineError);
}

TEST_CASE("a +6 dB gain raises loudness at every frame") {
  const auto quiet = ts::sine(500.0, 0.1, 0.5, 44100);
  const auto loud = scaled(quiet, 2.0);
  const auto contour_q = loudness_contour(quiet, {}, {}, {});
  const auto contour_l = loudness_contour(loud, {}, {}, {});
  REQUIRE(contour_q.loudness_sone.size() == contour_l.loudness_sone.size());
  for (std::size_t i = 0; i < contour_q.loudness_sone.size(); ++i)
    CHECK(contour_l.loudness_sone[i] > contour_q.loudness_sone[i]);
}

TEST_CASE("constant tone averages to any frame's level") {
  const auto tone = ts::sine(800.0, 0.3, 1.0, 44100);
  const auto contour = loudness_contour(tone, {}, {}, {});
  const double avg = average_loudness_level(contour);
  const double mid = contour.level_phon[contour.level_phon.size() / 2];
  CHECK(std::abs(avg - mid) < 0.5);
}

TEST_CASE("average of known phon frames") {
  LoudnessContour contour;
  contour.frame_times = {0.0, 0.01, 0.02};
  contour.loudness_sone = {1.0, 2.0, 4.0};  // all above the floor
  contour.level_phon = {40.0, 50.0, 60.0};
  CHECK(average_loudness_level(contour) == doctest::Approx(50.0));
}

TEST_CASE("no NaNs in sone track; contour matches frame count") {
  const auto noise = ts::white_noise(0.2, 0.7, 44100, 31);
  const auto spec = stft(noise, {});
  const auto contour = loudness_contour(noise, {}, {}, {});
  CHECK(contour.loudness_sone.size() == spec.num_frames());
  CHECK(contour.frame_times.size() == spec.num_frames());
  for (double n : contour.loudness_sone) CHECK(!std::isnan(n));
}
