#include "clip/relay.hpp"

#include <algorithm>
#include <random>

#include "clip/errors.hpp"

namespace clip {

namespace {
constexpr std::size_t kMaxPayload = 0xFFFF;  // payload_len is 2 bytes
}

std::vector<Chunk> chunk_stream(const std::vector<std::uint8_t>& pcm,
                                std::uint64_t session_id,
                                std::size_t chunk_size) {
  if (pcm.empty()) throw ConfigError("chunk_stream: empty payload");
  if (chunk_size == 0 || chunk_size > kMaxPayload)
    throw ConfigError("chunk_stream: chunk size must be in [1, 65535]");
  std::vector<Chunk> chunks;
  chunks.reserve((pcm.size() + chunk_size - 1) / chunk_size);
  for (std::size_t off = 0; off < pcm.size(); off += chunk_size) {
    const std::size_t len = std::min(chunk_size, pcm.size() - off);
    Chunk c;
    c.session_id = session_id;
    c.seq = static_cast<std::uint32_t>(chunks.size());
    c.is_last = off + len == pcm.size();
    c.payload.assign(pcm.begin() + static_cast<std::ptrdiff_t>(off),
                     pcm.begin() + static_cast<std::ptrdiff_t>(off + len));
    chunks.push_back(std::move(c));
  }
  return chunks;
}

void RelaySession::ingest(const Chunk& chunk) {
  if (state_ != State::kOpen)
    throw StateError("relay session: ingest after session closed");
  if (chunk.session_id != session_id_)
    throw StateError("relay session: chunk belongs to session " +
                     std::to_string(chunk.session_id));
  auto it = received_.find(chunk.seq);
  if (it != received_.end()) {
    if (it->second != chunk.payload) {
      state_ = State::kFailed;
      throw IntegrityError("relay session: duplicate seq " +
                           std::to_string(chunk.seq) +
                           " with differing payload");
    }
    return;  // idempotent redelivery
  }
  received_.emplace(chunk.seq, chunk.payload);
  if (chunk.is_last) last_seq_ = chunk.seq;
  if (last_seq_ && received_.size() ==
                       static_cast<std::size_t>(*last_seq_) + 1)
    state_ = State::kComplete;
}

std::vector<std::uint32_t> RelaySession::missing_seqs() const {
  std::vector<std::uint32_t> missing;
  if (!last_seq_) return missing;
  for (std::uint32_t s = 0; s <= *last_seq_; ++s)
    if (!received_.count(s)) missing.push_back(s);
  return missing;
}

void RelaySession::require_complete() const {
  if (state_ == State::kComplete) return;
  const auto missing = missing_seqs();
  if (!missing.empty()) throw MissingChunksError(missing);
  throw StateError("relay session: still open, no final chunk received");
}

std::vector<std::uint8_t> RelaySession::bytes() const {
  require_complete();
  std::vector<std::uint8_t> out;
  for (const auto& [seq, payload] : received_)
    out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

void finalize_session(const RelaySession& session, WavMetadata meta,
                      const std::string& out_path) {
  const auto data = session.bytes();
  meta.data_byte_length = static_cast<std::uint32_t>(data.size());
  write_wav_raw(meta, data, out_path);
}

std::vector<Chunk> apply_faults(std::vector<Chunk> chunks,
                                const FaultPlan& plan) {
  std::vector<Chunk> out;
  out.reserve(chunks.size() + plan.duplicate_seqs.size());
  for (auto& c : chunks) {
    const bool dropped =
        std::find(plan.drop_seqs.begin(), plan.drop_seqs.end(), c.seq) !=
        plan.drop_seqs.end();
    if (dropped) continue;
    const bool dup = std::find(plan.duplicate_seqs.begin(),
                               plan.duplicate_seqs.end(),
                               c.seq) != plan.duplicate_seqs.end();
    if (dup) out.push_back(c);
    out.push_back(std::move(c));
  }
  if (plan.reorder) {
    std::mt19937_64 rng(plan.seed);
    std::shuffle(out.begin(), out.end(), rng);
  }
  return out;
}

namespace {

void append_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i)
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint64_t read_le(const std::vector<std::uint8_t>& bytes,
                      std::size_t pos, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i)
    v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_chunk(const Chunk& chunk) {
  if (chunk.payload.size() > kMaxPayload)
    throw ConfigError("chunk serialize: payload exceeds 65535 bytes");
  std::vector<std::uint8_t> out;
  out.reserve(15 + chunk.payload.size());
  append_le(out, chunk.session_id, 8);
  append_le(out, chunk.seq, 4);
  append_le(out, chunk.is_last ? 1 : 0, 1);
  append_le(out, chunk.payload.size(), 2);
  out.insert(out.end(), chunk.payload.begin(), chunk.payload.end());
  return out;
}

std::vector<std::uint8_t> serialize_chunks(const std::vector<Chunk>& chunks) {
  std::vector<std::uint8_t> out;
  for (const auto& c : chunks) {
    auto one = serialize_chunk(c);
    out.insert(out.end(), one.begin(), one.end());
  }
  return out;
}

std::vector<Chunk> deserialize_chunks(const std::vector<std::uint8_t>& bytes) {
  std::vector<Chunk> chunks;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 15)
      throw ParseError("chunk stream: truncated header at byte " +
                       std::to_string(pos));
    Chunk c;
    c.session_id = read_le(bytes, pos, 8);
    c.seq = static_cast<std::uint32_t>(read_le(bytes, pos + 8, 4));
    const auto flags = static_cast<std::uint8_t>(read_le(bytes, pos + 12, 1));
    c.is_last = (flags & 1) != 0;
    const auto len = static_cast<std::size_t>(read_le(bytes, pos + 13, 2));
    pos += 15;
    if (bytes.size() - pos < len)
      throw ParseError("chunk stream: truncated payload for seq " +
                       std::to_string(c.seq));
    c.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                     bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
    chunks.push_back(std::move(c));
  }
  return chunks;
}

}  // namespace clip
