#include "clip/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "clip/errors.hpp"

namespace clip {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatIeeeFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct ByteReader {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;

  std::size_t remaining() const { return bytes.size() - pos; }

  void require(std::size_t n, const char* what) const {
    if (remaining() < n)
      throw ParseError(std::string("wav: truncated file while reading ") +
                       what);
  }

  std::uint32_t u32(const char* what) {
    require(4, what);
    std::uint32_t v = static_cast<std::uint32_t>(bytes[pos]) |
                      static_cast<std::uint32_t>(bytes[pos + 1]) << 8 |
                      static_cast<std::uint32_t>(bytes[pos + 2]) << 16 |
                      static_cast<std::uint32_t>(bytes[pos + 3]) << 24;
    pos += 4;
    return v;
  }

  std::uint16_t u16(const char* what) {
    require(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(
        bytes[pos] | static_cast<std::uint16_t>(bytes[pos + 1]) << 8);
    pos += 2;
    return v;
  }

  std::string tag() {
    require(4, "chunk id");
    std::string id(reinterpret_cast<const char*>(&bytes[pos]), 4);
    pos += 4;
    return id;
  }

  void skip(std::size_t n, const char* what) {
    require(n, what);
    pos += n;
  }
};

void append_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

void append_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

std::int32_t decode_sample(const std::uint8_t* p, int bits) {
  switch (bits) {
    case 8:
      // 8-bit PCM is unsigned, midpoint 128.
      return static_cast<std::int32_t>(p[0]) - 128;
    case 16:
      return static_cast<std::int16_t>(p[0] | (p[1] << 8));
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v;
    }
    default:
      throw FormatError("wav: unsupported bit depth");
  }
}

}  // namespace

std::pair<AudioBuffer, WavMetadata> parse_wav(
    const std::vector<std::uint8_t>& bytes) {
  ByteReader r{bytes};
  if (r.tag() != "RIFF") throw ParseError("wav: missing RIFF chunk id");
  r.u32("RIFF size");
  if (r.tag() != "WAVE") throw ParseError("wav: RIFF form is not WAVE");

  bool have_fmt = false;
  WavMetadata meta;
  std::size_t data_offset = 0;
  bool have_data = false;

  while (r.remaining() >= 8) {
    const std::string id = r.tag();
    const std::uint32_t size = r.u32("chunk size");
    if (id == "fmt ") {
      if (size < 16) throw ParseError("wav: fmt chunk shorter than 16 bytes");
      const std::size_t fmt_end = r.pos + size;
      const std::uint16_t format = r.u16("audio format");
      if (format == kFormatIeeeFloat)
        throw FormatError("wav: float PCM not supported, use integer PCM");
      if (format != kFormatPcm && format != kFormatExtensible)
        throw FormatError("wav: non-PCM codec (format tag " +
                          std::to_string(format) + ")");
      meta.channels = r.u16("channel count");
      meta.sample_rate_hz = static_cast<int>(r.u32("sample rate"));
      r.u32("byte rate");
      r.u16("block align");
      meta.bits_per_sample = r.u16("bits per sample");
      if (format == kFormatExtensible) {
        // Valid extensible headers carry a sub-format GUID; only the PCM
        // GUID (starting 0x0001) is accepted.
        if (size < 40) throw ParseError("wav: extensible fmt chunk too short");
        r.u16("extension size");
        r.u16("valid bits");
        r.u32("channel mask");
        const std::uint16_t sub = r.u16("sub-format");
        if (sub != kFormatPcm)
          throw FormatError("wav: extensible sub-format is not integer PCM");
      }
      if (meta.channels <= 0) throw ParseError("wav: zero channels in fmt");
      if (meta.sample_rate_hz <= 0)
        throw ParseError("wav: zero sample rate in fmt");
      if (meta.bits_per_sample != 8 && meta.bits_per_sample != 16 &&
          meta.bits_per_sample != 24)
        throw FormatError("wav: unsupported bit depth " +
                          std::to_string(meta.bits_per_sample) +
                          " (8/16/24-bit integer PCM only)");
      if (fmt_end < r.pos || fmt_end > bytes.size())
        throw ParseError("wav: fmt chunk overruns file");
      r.pos = fmt_end;
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt)
        throw ParseError("wav: data chunk before fmt chunk");
      if (size > r.remaining())
        throw ParseError("wav: data chunk truncated (header declares " +
                         std::to_string(size) + " bytes, " +
                         std::to_string(r.remaining()) + " present)");
      meta.data_byte_length = size;
      data_offset = r.pos;
      have_data = true;
      break;
    } else {
      // Unknown chunk: skip payload plus RIFF pad byte for odd sizes.
      const std::size_t skip = size + (size & 1);
      if (skip > r.remaining())
        throw ParseError("wav: chunk '" + id + "' overruns file");
      r.skip(skip, "chunk payload");
    }
    if ((size & 1) && id == "fmt " && r.remaining() > 0) r.skip(1, "pad byte");
  }
  if (!have_fmt) throw ParseError("wav: no fmt chunk found");
  if (!have_data) throw ParseError("wav: no data chunk found");

  const int frame_bytes = meta.bytes_per_frame();
  if (frame_bytes <= 0 || meta.data_byte_length % frame_bytes != 0)
    throw ParseError("wav: data length is not a whole number of frames");
  const std::size_t n_frames = meta.data_byte_length / frame_bytes;
  const int sample_bytes = meta.bits_per_sample / 8;
  const double scale = 1.0 / std::ldexp(1.0, meta.bits_per_sample - 1);

  AudioBuffer buffer;
  buffer.sample_rate_hz = meta.sample_rate_hz;
  buffer.channels.assign(meta.channels, std::vector<double>(n_frames));
  const std::uint8_t* p = bytes.data() + data_offset;
  for (std::size_t i = 0; i < n_frames; ++i) {
    for (int c = 0; c < meta.channels; ++c) {
      buffer.channels[c][i] =
          decode_sample(p, meta.bits_per_sample) * scale;
      p += sample_bytes;
    }
  }
  return {std::move(buffer), meta};
}

std::pair<AudioBuffer, WavMetadata> read_wav(const std::string& path) {
  return parse_wav(read_file_bytes(path));
}

std::vector<std::uint8_t> encode_pcm(const AudioBuffer& buffer,
                                     int bits_per_sample) {
  if (bits_per_sample != 16)
    throw FormatError("pcm encode: only 16-bit output is supported");
  const std::size_t n = buffer.num_samples();
  std::vector<std::uint8_t> out;
  out.reserve(n * buffer.num_channels() * 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& ch : buffer.channels) {
      const long q = std::lrint(ch[i] * 32768.0);
      const auto v = static_cast<std::int16_t>(
          std::clamp<long>(q, -32768, 32767));
      out.push_back(static_cast<std::uint8_t>(v & 0xFF));
      out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_wav_raw(
    const WavMetadata& meta, const std::vector<std::uint8_t>& data) {
  if (meta.data_byte_length != data.size())
    throw ConfigError("wav encode: metadata length disagrees with data");
  if (meta.bytes_per_frame() <= 0 ||
      data.size() % meta.bytes_per_frame() != 0)
    throw ConfigError("wav encode: data is not a whole number of frames");
  const auto block_align =
      static_cast<std::uint16_t>(meta.bytes_per_frame());
  const std::uint32_t byte_rate = static_cast<std::uint32_t>(
      meta.sample_rate_hz) * block_align;

  std::vector<std::uint8_t> out;
  out.reserve(44 + data.size());
  append_tag(out, "RIFF");
  append_u32(out, 36 + static_cast<std::uint32_t>(data.size()));
  append_tag(out, "WAVE");
  append_tag(out, "fmt ");
  append_u32(out, 16);
  append_u16(out, kFormatPcm);
  append_u16(out, static_cast<std::uint16_t>(meta.channels));
  append_u32(out, static_cast<std::uint32_t>(meta.sample_rate_hz));
  append_u32(out, byte_rate);
  append_u16(out, block_align);
  append_u16(out, static_cast<std::uint16_t>(meta.bits_per_sample));
  append_tag(out, "data");
  append_u32(out, static_cast<std::uint32_t>(data.size()));
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer) {
  validate(buffer);
  WavMetadata meta;
  meta.sample_rate_hz = buffer.sample_rate_hz;
  meta.bits_per_sample = 16;
  meta.channels = buffer.num_channels();
  const auto data = encode_pcm(buffer, 16);
  meta.data_byte_length = static_cast<std::uint32_t>(data.size());
  return encode_wav_raw(meta, data);
}

void write_wav(const AudioBuffer& buffer, const std::string& path) {
  write_file_bytes(path, encode_wav(buffer));
}

void write_wav_raw(const WavMetadata& meta,
                   const std::vector<std::uint8_t>& data,
                   const std::string& path) {
  write_file_bytes(path, encode_wav_raw(meta, data));
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::vector<std::uint8_t> bytes(
      (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  return bytes;
}

void write_file_bytes(const std::string& path,
                      const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace clip
