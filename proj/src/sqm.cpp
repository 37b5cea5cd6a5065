#include "clip/sqm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "clip/errors.hpp"

namespace clip {

namespace {

using nlohmann::json;

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

std::string to_string(Source source) {
  return source == Source::kBaseline ? "BL" : "SW";
}

Source source_from_string(const std::string& s) {
  if (s == "BL") return Source::kBaseline;
  if (s == "SW") return Source::kSmartwatch;
  throw ParseError("unknown source '" + s + "' (expected BL or SW)");
}

std::string to_string(Metric metric) {
  return metric == Metric::kLoudnessLevel ? "loudness_level" : "f0";
}

Metric metric_from_string(const std::string& s) {
  if (s == "loudness_level") return Metric::kLoudnessLevel;
  if (s == "f0") return Metric::kF0;
  throw ParseError("unknown metric '" + s + "'");
}

std::string config_digest(const AnalysisConfig& c) {
  std::ostringstream ss;
  ss.precision(17);
  ss << "frame=" << c.framing.frame_length_ms
     << ";hop=" << c.framing.hop_length_ms
     << ";window=hanning;fft=" << c.framing.fft_size
     << ";calib=" << c.calibration.full_scale_sine_db_spl
     << ";tau=" << c.loudness.time_constant_s
     << ";sone_floor=" << c.loudness.sone_floor
     << ";fmin=" << c.pitch.f_min_hz << ";fmax=" << c.pitch.f_max_hz
     << ";res=" << c.pitch.candidate_resolution_octaves
     << ";sthr=" << c.pitch.strength_threshold
     << ";rmsfloor=" << c.pitch.rms_floor
     << ";erb=" << c.pitch.erb_step
     << ";cycles=" << c.pitch.cycles_per_window
     << ";phop=" << c.pitch.hop_s
     << ";primes=" << c.pitch.prime_harmonics_only
     << ";emit_unvoiced=" << c.pitch.emit_unvoiced_f0
     << ";denoise=" << static_cast<int>(c.denoise)
     << ";alpha=" << c.subtract_alpha << ";beta=" << c.subtract_beta
     << ";nwin=" << c.noise.window_s
     << ";nbias=" << c.noise.bias_compensation
     << ";nsmooth=" << c.noise.temporal_smoothing;
  // FNV-1a 64-bit
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : ss.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

SqmRecord compute_sqms(const AudioBuffer& buffer,
                       const RecordingLabels& labels,
                       const AnalysisConfig& config,
                       const std::vector<Interval>& trim) {
  if (buffer.num_channels() != 1)
    throw ConfigError(labels.display() +
                      ": multi-channel input, convert with to_mono first");
  try {
    AudioBuffer work = trim_segments(buffer, trim);
    if (config.denoise != DenoiseMode::kOff) {
      NoiseEstimationParams noise = config.noise;
      noise.method = config.denoise == DenoiseMode::kSilenceAverage
                         ? NoiseMethod::kSilenceAverage
                         : NoiseMethod::kMinimumStatistics;
      work = denoise(work, config.framing, noise, config.subtract_alpha,
                     config.subtract_beta);
    }

    const auto contour = loudness_contour(work, config.framing,
                                          config.calibration, config.loudness);
    const auto f0 = estimate_f0_contour(work, config.pitch);

    SqmRecord record;
    record.participant_id = labels.participant_id;
    record.task_id = labels.task_id;
    record.source = labels.source;
    record.avg_loudness_phon =
        average_loudness_level(contour, config.loudness.sone_floor);
    record.avg_f0_hz = average_f0(f0);
    record.pitch_range_hz = pitch_range(f0);
    record.config_digest = config_digest(config);
    return record;
  } catch (const PipelineError& e) {
    throw PipelineError(labels.display() + ": " + e.what());
  }
}

double percent_deviation(double bl, double sw) {
  if (bl == 0.0)
    throw DomainError("percent deviation: baseline value 0 has no reference");
  return 100.0 * std::abs(sw - bl) / std::abs(bl);
}

std::vector<DeviationReport> compare_recordings(const SqmRecord& bl,
                                                const SqmRecord& sw) {
  if (bl.participant_id != sw.participant_id || bl.task_id != sw.task_id)
    throw ConfigError("compare: cannot pair " + bl.participant_id + "-" +
                      bl.task_id + " with " + sw.participant_id + "-" +
                      sw.task_id);
  if (bl.source == sw.source)
    throw ConfigError("compare: both records have source " +
                      to_string(bl.source));
  std::vector<DeviationReport> out;
  out.push_back({Metric::kLoudnessLevel, bl.avg_loudness_phon,
                 sw.avg_loudness_phon,
                 percent_deviation(bl.avg_loudness_phon,
                                   sw.avg_loudness_phon)});
  out.push_back({Metric::kF0, bl.avg_f0_hz, sw.avg_f0_hz,
                 percent_deviation(bl.avg_f0_hz, sw.avg_f0_hz)});
  return out;
}

namespace {

std::string render_csv(const std::vector<SqmRecord>& records,
                       const std::vector<LabeledDeviation>& deviations) {
  std::ostringstream out;
  out << "participant,task,source,avg_loudness_phon,avg_f0_hz,"
         "pitch_range_hz,config_digest\n";
  for (const auto& r : records)
    out << r.participant_id << ',' << r.task_id << ',' << to_string(r.source)
        << ',' << fixed2(r.avg_loudness_phon) << ',' << fixed2(r.avg_f0_hz)
        << ',' << fixed2(r.pitch_range_hz) << ',' << r.config_digest << '\n';
  if (!deviations.empty()) {
    out << "\nmetric,participant,task,bl_value,sw_value,percent_deviation\n";
    for (const auto& d : deviations)
      out << to_string(d.report.metric) << ',' << d.participant_id << ','
          << d.task_id << ',' << fixed2(d.report.bl_value) << ','
          << fixed2(d.report.sw_value) << ','
          << fixed2(d.report.percent_deviation) << '\n';
  }
  return out.str();
}

std::string render_json(const std::vector<SqmRecord>& records,
                        const std::vector<LabeledDeviation>& deviations) {
  json doc;
  doc["records"] = json::array();
  for (const auto& r : records) {
    doc["records"].push_back(
        {{"participant", r.participant_id},
         {"task", r.task_id},
         {"source", to_string(r.source)},
         {"avg_loudness_phon", round2(r.avg_loudness_phon)},
         {"avg_f0_hz", round2(r.avg_f0_hz)},
         {"pitch_range_hz", round2(r.pitch_range_hz)},
         {"config_digest", r.config_digest}});
  }
  doc["deviations"] = json::array();
  for (const auto& d : deviations) {
    doc["deviations"].push_back(
        {{"metric", to_string(d.report.metric)},
         {"participant", d.participant_id},
         {"task", d.task_id},
         {"bl_value", round2(d.report.bl_value)},
         {"sw_value", round2(d.report.sw_value)},
         {"percent_deviation", round2(d.report.percent_deviation)}});
  }
  return doc.dump(2) + "\n";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

ParsedReport parse_csv(const std::string& text) {
  ParsedReport parsed;
  std::istringstream in(text);
  std::string line;
  enum class Section { kNone, kRecords, kDeviations } section = Section::kNone;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("participant,", 0) == 0) {
      section = Section::kRecords;
      continue;
    }
    if (line.rfind("metric,", 0) == 0) {
      section = Section::kDeviations;
      continue;
    }
    const auto f = split_csv_line(line);
    if (section == Section::kRecords) {
      if (f.size() != 7) throw ParseError("report csv: bad record row");
      SqmRecord r;
      r.participant_id = f[0];
      r.task_id = f[1];
      r.source = source_from_string(f[2]);
      r.avg_loudness_phon = std::stod(f[3]);
      r.avg_f0_hz = std::stod(f[4]);
      r.pitch_range_hz = std::stod(f[5]);
      r.config_digest = f[6];
      parsed.records.push_back(std::move(r));
    } else if (section == Section::kDeviations) {
      if (f.size() != 6) throw ParseError("report csv: bad deviation row");
      LabeledDeviation d;
      d.report.metric = metric_from_string(f[0]);
      d.participant_id = f[1];
      d.task_id = f[2];
      d.report.bl_value = std::stod(f[3]);
      d.report.sw_value = std::stod(f[4]);
      d.report.percent_deviation = std::stod(f[5]);
      parsed.deviations.push_back(std::move(d));
    } else {
      throw ParseError("report csv: data before header row");
    }
  }
  return parsed;
}

ParsedReport parse_json_report(const std::string& text) {
  ParsedReport parsed;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("report json: ") + e.what());
  }
  for (const auto& j : doc.value("records", json::array())) {
    SqmRecord r;
    r.participant_id = j.at("participant").get<std::string>();
    r.task_id = j.at("task").get<std::string>();
    r.source = source_from_string(j.at("source").get<std::string>());
    r.avg_loudness_phon = j.at("avg_loudness_phon").get<double>();
    r.avg_f0_hz = j.at("avg_f0_hz").get<double>();
    r.pitch_range_hz = j.at("pitch_range_hz").get<double>();
    r.config_digest = j.at("config_digest").get<std::string>();
    parsed.records.push_back(std::move(r));
  }
  for (const auto& j : doc.value("deviations", json::array())) {
    LabeledDeviation d;
    d.report.metric = metric_from_string(j.at("metric").get<std::string>());
    d.participant_id = j.at("participant").get<std::string>();
    d.task_id = j.at("task").get<std::string>();
    d.report.bl_value = j.at("bl_value").get<double>();
    d.report.sw_value = j.at("sw_value").get<double>();
    d.report.percent_deviation = j.at("percent_deviation").get<double>();
    parsed.deviations.push_back(std::move(d));
  }
  return parsed;
}

}  // namespace

std::string render_report(const std::vector<SqmRecord>& records,
                          const std::vector<LabeledDeviation>& deviations,
                          ReportFormat format) {
  if (records.empty())
    throw ConfigError("report: empty record set");
  return format == ReportFormat::kCsv ? render_csv(records, deviations)
                                      : render_json(records, deviations);
}

void emit_report(const std::vector<SqmRecord>& records,
                 const std::vector<LabeledDeviation>& deviations,
                 ReportFormat format, const std::string& out_path) {
  const std::string text = render_report(records, deviations, format);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open report file: " + out_path);
  out << text;
  if (!out) throw IoError("write failed: " + out_path);
}

ParsedReport parse_report(const std::string& text, ReportFormat format) {
  return format == ReportFormat::kCsv ? parse_csv(text)
                                      : parse_json_report(text);
}

std::vector<ManifestRow> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  std::vector<ManifestRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    ManifestRow row;
    std::string source;
    if (!(ss >> row.labels.participant_id)) continue;
    if (!(ss >> row.labels.task_id >> source >> row.path))
      throw ParseError("manifest " + path + ":" + std::to_string(line_no) +
                       ": expected 'participant task source path'");
    row.labels.source = source_from_string(source);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace clip
