#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>

#include "clip/errors.hpp"
#include "clip/relay.hpp"
#include "clip/wav.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace clip;
namespace ts = clip::testsupport;

namespace {

std::vector<std::uint8_t> random_bytes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, 255);
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(dist(rng));
  return out;
}

std::vector<std::uint8_t> reassemble(const std::vector<Chunk>& chunks,
                                     std::uint64_t session_id) {
  RelaySession session(session_id);
  for (const auto& c : chunks) session.ingest(c);
  return session.bytes();
}

}  // namespace

TEST_CASE("chunk sizes follow integer division") {
  const auto pcm = random_bytes(5000, 7);
  const auto chunks = chunk_stream(pcm, 1);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[0].payload.size() == 2048);
  CHECK(chunks[1].payload.size() == 2048);
  CHECK(chunks[2].payload.size() == 904);
  CHECK(chunks[2].is_last);
  CHECK_FALSE(chunks[0].is_last);
}

TEST_CASE("exact-fit input yields one final chunk") {
  const auto chunks = chunk_stream(random_bytes(2048, 8), 1);
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].is_last);
  CHECK(chunks[0].payload.size() == 2048);
}

TEST_CASE("single byte input") {
  const auto chunks = chunk_stream({0x42}, 1);
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].payload.size() == 1);
  CHECK(chunks[0].is_last);
}

TEST_CASE("empty input rejected") {
  CHECK_THROWS_AS(chunk_stream({}, 1), ConfigError);
}

TEST_CASE("in-order delivery completes and preserves bytes") {
  const auto pcm = random_bytes(6000, 9);
  const auto chunks = chunk_stream(pcm, 42);
  RelaySession session(42);
  for (const auto& c : chunks) session.ingest(c);
  CHECK(session.state() == RelaySession::State::kComplete);
  CHECK(session.bytes() == pcm);
}

TEST_CASE("gap is named at finalization") {
  const auto chunks = chunk_stream(random_bytes(5000, 10), 1);
  RelaySession session(1);
  session.ingest(chunks[0]);
  session.ingest(chunks[2]);  // skip seq 1, deliver last
  CHECK(session.state() == RelaySession::State::kOpen);
  try {
    session.bytes();
    FAIL("expected MissingChunksError");
  } catch (const MissingChunksError& e) {
    REQUIRE(e.missing.size() == 1);
    CHECK(e.missing[0] == 1);
  }
}

TEST_CASE("identical duplicate is ignored, conflicting duplicate fails") {
  const auto pcm = random_bytes(5000, 11);
  const auto chunks = chunk_stream(pcm, 1);
  RelaySession session(1);
  session.ingest(chunks[0]);
  session.ingest(chunks[1]);
  session.ingest(chunks[1]);  // same bytes again
  session.ingest(chunks[2]);
  CHECK(session.state() == RelaySession::State::kComplete);
  CHECK(session.bytes() == pcm);

  RelaySession bad(1);
  bad.ingest(chunks[0]);
  Chunk tampered = chunks[0];
  tampered.payload[0] ^= 0xFF;
  CHECK_THROWS_AS(bad.ingest(tampered), IntegrityError);
  CHECK(bad.state() == RelaySession::State::kFailed);
}

TEST_CASE("reassembly is order-independent") {
  const auto pcm = random_bytes(100000, 12);
  auto chunks = chunk_stream(pcm, 5);
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(chunks.begin(), chunks.end(), rng);
    CHECK(reassemble(chunks, 5) == pcm);
  }
}

TEST_CASE("chunk count is ceil(len / 2048)") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> len_dist(1, 9000);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t len = len_dist(rng);
    const auto chunks = chunk_stream(random_bytes(len, trial), 1);
    CHECK(chunks.size() == (len + 2047) / 2048);
  }
}

TEST_CASE("finalize writes a wav whose data equals the stream") {
  const auto tone = ts::sine(440.0, 0.5, 1.0, 44100);
  const auto pcm = encode_pcm(tone);
  const auto chunks = chunk_stream(pcm, 77);
  RelaySession session(77);
  for (const auto& c : chunks) session.ingest(c);

  WavMetadata meta;
  meta.sample_rate_hz = 44100;
  meta.bits_per_sample = 16;
  meta.channels = 1;
  const auto path =
      (std::filesystem::temp_directory_path() / "clip_relay.wav").string();
  finalize_session(session, meta, path);

  const auto bytes = read_file_bytes(path);
  const auto [buffer, read_meta] = parse_wav(bytes);
  CHECK(read_meta.sample_rate_hz == 44100);
  CHECK(read_meta.bits_per_sample == 16);
  CHECK(read_meta.channels == 1);
  // data chunk is the reassembled bytes, bit-identical
  std::vector<std::uint8_t> data(bytes.end() - static_cast<std::ptrdiff_t>(pcm.size()),
                                 bytes.end());
  CHECK(data == pcm);
  std::remove(path.c_str());
}

TEST_CASE("finalize on an open session is a state error") {
  RelaySession session(3);
  Chunk c;
  c.session_id = 3;
  c.seq = 0;
  c.payload = {1, 2};
  session.ingest(c);  // no is_last seen
  WavMetadata meta{44100, 16, 1, 0};
  CHECK_THROWS_AS(finalize_session(session, meta, "/tmp/never.wav"),
                  StateError);
}

TEST_CASE("fault plan drops, duplicates and reorders") {
  const auto pcm = random_bytes(10000, 21);
  const auto chunks = chunk_stream(pcm, 9);

  FaultPlan drop_plan;
  drop_plan.drop_seqs = {2};
  const auto dropped = apply_faults(chunks, drop_plan);
  CHECK(dropped.size() == chunks.size() - 1);
  RelaySession session(9);
  for (const auto& c : dropped) session.ingest(c);
  const auto missing = session.missing_seqs();
  REQUIRE(missing.size() == 1);
  CHECK(missing[0] == 2);

  FaultPlan dup_reorder;
  dup_reorder.duplicate_seqs = {0, 1};
  dup_reorder.reorder = true;
  dup_reorder.seed = 4242;
  const auto shuffled = apply_faults(chunks, dup_reorder);
  CHECK(shuffled.size() == chunks.size() + 2);
  CHECK(reassemble(shuffled, 9) == pcm);
}

TEST_CASE("wire serialization round trip") {
  const auto pcm = random_bytes(5555, 31);
  const auto chunks = chunk_stream(pcm, 0x1122334455667788ULL, 1024);
  const auto wire = serialize_chunks(chunks);
  const auto parsed = deserialize_chunks(wire);
  REQUIRE(parsed.size() == chunks.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].session_id == chunks[i].session_id);
    CHECK(parsed[i].seq == chunks[i].seq);
    CHECK(parsed[i].is_last == chunks[i].is_last);
    CHECK(parsed[i].payload == chunks[i].payload);
  }

  auto truncated = wire;
  truncated.resize(wire.size() - 1);
  CHECK_THROWS_AS(deserialize_chunks(truncated), ParseError);
}

TEST_CASE("random payload property: chunk -> shuffle -> reassemble") {
  std::mt19937_64 rng(555);
  std::uniform_int_distribution<std::size_t> len_dist(1, 200000);
  for (int trial = 0; trial < 25; ++trial) {
    const auto pcm = random_bytes(len_dist(rng), 1000 + trial);
    auto chunks = chunk_stream(pcm, trial);
    std::shuffle(chunks.begin(), chunks.end(), rng);
    CHECK(reassemble(chunks, trial) == pcm);
  }
}
