#pragma once

#include <string>
#include <utility>
#include <vector>

#include "clip/audio.hpp"
#include "clip/loudness.hpp"
#include "clip/pitch.hpp"
#include "clip/preprocess.hpp"
#include "clip/stft.hpp"

namespace clip {

enum class Source { kBaseline, kSmartwatch };

std::string to_string(Source source);          // "BL" / "SW"
Source source_from_string(const std::string&);

enum class DenoiseMode { kOff, kSilenceAverage, kMinimumStatistics };

// Every setting that influences metric values. The digest of this struct is
// embedded in each record so reports are comparable only when produced with
// identical settings.
struct AnalysisConfig {
  FramingConfig framing;
  CalibrationSpec calibration;
  LoudnessParams loudness;
  PitchConfig pitch;
  DenoiseMode denoise = DenoiseMode::kOff;
  double subtract_alpha = 2.0;
  double subtract_beta = 0.01;
  NoiseEstimationParams noise;
};

// 64-bit FNV-1a over a canonical rendering of the settings, as hex.
std::string config_digest(const AnalysisConfig& config);

struct RecordingLabels {
  std::string participant_id;
  std::string task_id;
  Source source = Source::kBaseline;

  std::string display() const {
    return participant_id + "-" + task_id + "-" + to_string(source);
  }
};

// Per-recording metric summary.
struct SqmRecord {
  std::string participant_id;
  std::string task_id;
  Source source = Source::kBaseline;
  double avg_loudness_phon = 0.0;
  double avg_f0_hz = 0.0;
  double pitch_range_hz = 0.0;
  std::string config_digest;
};

enum class Metric { kLoudnessLevel, kF0 };

std::string to_string(Metric metric);  // "loudness_level" / "f0"
Metric metric_from_string(const std::string&);

// Baseline-vs-smartwatch comparison for one metric.
struct DeviationReport {
  Metric metric = Metric::kLoudnessLevel;
  double bl_value = 0.0;
  double sw_value = 0.0;
  double percent_deviation = 0.0;
};

// Deviation annotated with the pair it belongs to, for report emission.
struct LabeledDeviation {
  std::string participant_id;
  std::string task_id;
  DeviationReport report;
};

// Full metric pipeline on one mono recording: optional trim, optional
// denoise, loudness contour and F0 contour, averaged into a record.
// Multi-channel input raises ConfigError (convert with to_mono first).
// Downstream pipeline errors are rethrown with the recording labels.
SqmRecord compute_sqms(const AudioBuffer& buffer,
                       const RecordingLabels& labels,
                       const AnalysisConfig& config,
                       const std::vector<Interval>& trim = {});

// 100 * |sw - bl| / |bl|; bl == 0 raises DomainError.
double percent_deviation(double bl, double sw);

// One DeviationReport per metric. Labels must match and sources differ;
// the first argument is the reference (denominator).
std::vector<DeviationReport> compare_recordings(const SqmRecord& bl,
                                                const SqmRecord& sw);

enum class ReportFormat { kCsv, kJson };

// Stable-order CSV or JSON emission; all metric values are written with
// 2-decimal fixed precision. Empty record set raises ConfigError.
std::string render_report(const std::vector<SqmRecord>& records,
                          const std::vector<LabeledDeviation>& deviations,
                          ReportFormat format);
void emit_report(const std::vector<SqmRecord>& records,
                 const std::vector<LabeledDeviation>& deviations,
                 ReportFormat format, const std::string& out_path);

// Inverse of render_report, used for round-trip checks and tooling.
struct ParsedReport {
  std::vector<SqmRecord> records;
  std::vector<LabeledDeviation> deviations;
};
ParsedReport parse_report(const std::string& text, ReportFormat format);

// Batch manifest: one "participant task source path" row per line.
struct ManifestRow {
  RecordingLabels labels;
  std::string path;
};
std::vector<ManifestRow> read_manifest(const std::string& path);

}  // namespace clip
