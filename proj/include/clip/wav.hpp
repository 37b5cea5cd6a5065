#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "clip/audio.hpp"

namespace clip {

// Header fields of a PCM WAV file, exactly as read from / written to disk.
struct WavMetadata {
  int sample_rate_hz = 0;
  int bits_per_sample = 0;
  int channels = 0;
  std::uint32_t data_byte_length = 0;

  int bytes_per_frame() const { return channels * (bits_per_sample / 8); }
};

// Parses a RIFF/WAVE file with integer PCM samples (8/16/24-bit) and scales
// them to [-1, 1] by 2^(bits-1). The fmt chunk must precede data; unknown
// chunks are skipped. Float and compressed codecs are rejected.
std::pair<AudioBuffer, WavMetadata> read_wav(const std::string& path);

// Same parser over an in-memory byte string (fuzz tests, relay fixtures).
std::pair<AudioBuffer, WavMetadata> parse_wav(
    const std::vector<std::uint8_t>& bytes);

// Writes a canonical 44-byte-header 16-bit PCM little-endian WAV.
void write_wav(const AudioBuffer& buffer, const std::string& path);

// Encodes the canonical 16-bit WAV to bytes (shared by write_wav and tests).
std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer);

// Prepends a canonical header described by `meta` to raw PCM data bytes.
// The data bytes are written verbatim; meta.data_byte_length must equal
// data.size() and be a whole number of sample frames.
std::vector<std::uint8_t> encode_wav_raw(const WavMetadata& meta,
                                         const std::vector<std::uint8_t>& data);
void write_wav_raw(const WavMetadata& meta,
                   const std::vector<std::uint8_t>& data,
                   const std::string& path);

// Raw little-endian PCM encoding of a buffer at the given bit depth
// (the byte stream a recorder would hand to the relay, headerless).
std::vector<std::uint8_t> encode_pcm(const AudioBuffer& buffer,
                                     int bits_per_sample = 16);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path,
                      const std::vector<std::uint8_t>& bytes);

}  // namespace clip
