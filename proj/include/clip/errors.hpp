#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace clip {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input container (bad RIFF chunk, truncated stream, ...).
struct ParseError : Error {
  using Error::Error;
};

// Structurally valid input in an encoding we do not handle (float WAV, ...).
struct FormatError : Error {
  using Error::Error;
};

// Filesystem-level failure.
struct IoError : Error {
  using Error::Error;
};

// Invalid settings or argument combination.
struct ConfigError : Error {
  using Error::Error;
};

// Argument outside its mathematical domain or permitted range.
struct DomainError : Error {
  using Error::Error;
};

// Operation attempted in the wrong state (e.g. finalizing an open session).
struct StateError : Error {
  using Error::Error;
};

// Two deliveries of the same sequence number disagreed on content.
struct IntegrityError : Error {
  using Error::Error;
};

// Session ended with sequence gaps; carries the absent numbers.
struct MissingChunksError : Error {
  explicit MissingChunksError(std::vector<std::uint32_t> seqs)
      : Error(format_message(seqs)), missing(std::move(seqs)) {}

  std::vector<std::uint32_t> missing;

 private:
  static std::string format_message(const std::vector<std::uint32_t>& seqs) {
    std::string msg = "session incomplete, missing chunk seq(s):";
    for (auto s : seqs) msg += " " + std::to_string(s);
    return msg;
  }
};

// Analysis cannot proceed on this signal (no voiced frames, empty signal,
// too little data for the requested operation).
struct PipelineError : Error {
  using Error::Error;
};

}  // namespace clip
