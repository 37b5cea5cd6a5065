#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clip/wav.hpp"

namespace clip {

// Transfer packet size: "2 kB" interpreted as 2 * 1024 bytes.
constexpr std::size_t kDefaultChunkPayload = 2048;

// One transfer packet. Sequence numbers are consecutive from 0 within a
// session; only the final packet may carry fewer than the nominal payload
// bytes, and it is flagged is_last.
struct Chunk {
  std::uint64_t session_id = 0;
  std::uint32_t seq = 0;
  bool is_last = false;
  std::vector<std::uint8_t> payload;
};

// Splits raw PCM into fixed-size packets. Concatenated payloads equal the
// input; chunk count is ceil(len / chunk_size).
std::vector<Chunk> chunk_stream(const std::vector<std::uint8_t>& pcm,
                                std::uint64_t session_id,
                                std::size_t chunk_size = kDefaultChunkPayload);

// Receiving side of the transfer. Single writer per session; chunks may
// arrive in any order, duplicates with identical bytes are ignored.
class RelaySession {
 public:
  enum class State { kOpen, kComplete, kFailed };

  explicit RelaySession(std::uint64_t session_id) : session_id_(session_id) {}

  // Appends a payload at its sequence position. Conflicting duplicate ->
  // IntegrityError and the session fails. Transitions to complete once the
  // is_last chunk has arrived and the sequence is gap-free.
  void ingest(const Chunk& chunk);

  State state() const { return state_; }
  std::uint64_t session_id() const { return session_id_; }

  // Sequence numbers absent below the announced last chunk (empty until an
  // is_last chunk has been seen).
  std::vector<std::uint32_t> missing_seqs() const;

  // Reassembled bytes; requires state() == kComplete, otherwise StateError
  // (or MissingChunksError naming the gaps when the end is known).
  std::vector<std::uint8_t> bytes() const;

  std::size_t chunks_received() const { return received_.size(); }

 private:
  void require_complete() const;

  std::uint64_t session_id_;
  State state_ = State::kOpen;
  std::map<std::uint32_t, std::vector<std::uint8_t>> received_;
  std::optional<std::uint32_t> last_seq_;
};

// Writes the reassembled session as a WAV file whose data chunk equals the
// received bytes exactly. meta.data_byte_length is taken from the session.
void finalize_session(const RelaySession& session, WavMetadata meta,
                      const std::string& out_path);

// Injectable transport faults for the in-process queue. Drops and
// duplications name sequence numbers; reordering is a seeded shuffle.
struct FaultPlan {
  std::vector<std::uint32_t> drop_seqs;
  std::vector<std::uint32_t> duplicate_seqs;
  bool reorder = false;
  std::uint64_t seed = 0;
};

std::vector<Chunk> apply_faults(std::vector<Chunk> chunks,
                                const FaultPlan& plan);

// Wire format for chunk fixture files, little-endian:
//   session_id: 8 bytes | seq: 4 bytes | flags: 1 byte | payload_len: 2 bytes
// followed by the payload. Flag bit 0 is is_last.
std::vector<std::uint8_t> serialize_chunk(const Chunk& chunk);
std::vector<std::uint8_t> serialize_chunks(const std::vector<Chunk>& chunks);
std::vector<Chunk> deserialize_chunks(const std::vector<std::uint8_t>& bytes);

}  // namespace clip
