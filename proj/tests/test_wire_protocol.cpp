/*
 * Copyright 2026 The secagg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <cmath>

#include "secagg/codec.hpp"
#include "secagg/protocol.hpp"
#include "secagg/wire.hpp"

using namespace secagg;

namespace {

const KeyPair& key512() {
  static const KeyPair kp = generate_keypair(512, derive_seed("protocol-test", 1));
  return kp;
}

const CodecConfig kCodec{40, 64, 65536.0};

JobId test_job() { return job_id_from_string("protocol-test-job"); }

// Drives one round of any protocol through an in-memory message router.
struct RoundHarness {
  std::size_t parties;
  Protocol protocol;
  std::vector<std::vector<double>> inputs;
  std::vector<Contribution> contributions;
  std::vector<std::unique_ptr<SeededRandom>> rngs;
  std::vector<std::unique_ptr<RoundSession>> sessions;
  std::vector<AggregateMessage> submissions;
  std::size_t messages = 0;

  RoundHarness(Protocol proto, std::vector<std::vector<double>> in,
               std::vector<Contribution> contrib = {})
      : parties(in.size()), protocol(proto), inputs(std::move(in)), contributions(std::move(contrib)) {
    contributions.resize(parties);
    for (std::size_t r = 1; r <= parties; ++r) {
      rngs.push_back(std::make_unique<SeededRandom>(derive_seed("harness", r)));
      RoundContext ctx{test_job(), 7, r, parties, protocol};
      sessions.push_back(make_session(ctx, key512().public_key,
                                      encode(kCodec, key512().public_key, inputs[r - 1]),
                                      *rngs.back(), contributions[r - 1]));
    }
  }

  void run() {
    std::vector<std::pair<std::size_t, AggregateMessage>> queue;
    for (auto& s : sessions) {
      for (auto& o : s->start()) queue.emplace_back(o.to_rank, std::move(o.message));
    }
    while (!queue.empty()) {
      auto [to, msg] = std::move(queue.front());
      queue.erase(queue.begin());
      ++messages;
      if (to == kDecryptorRank) {
        submissions.push_back(std::move(msg));
        continue;
      }
      for (auto& o : sessions[to - 1]->on_message(msg)) {
        queue.emplace_back(o.to_rank, std::move(o.message));
      }
    }
  }

  // Decoded average of the full aggregate, assembled like the decryptor does.
  std::vector<double> decoded() const {
    CiphertextVector agg;
    if (protocol == Protocol::kAllReduce) {
      std::vector<const AggregateMessage*> by_chunk(parties);
      for (const auto& m : submissions) by_chunk[m.chunk_index - 1] = &m;
      for (auto* m : by_chunk) agg.insert(agg.end(), m->ciphertexts.begin(), m->ciphertexts.end());
    } else {
      agg = submissions.back().ciphertexts;
    }
    auto residues = decrypt_vector(key512().private_key, agg);
    return decode_sum(kCodec, key512().public_key.n(), residues, static_cast<unsigned>(parties));
  }
};

}  // namespace

TEST_SUITE("wire") {
  TEST_CASE("frame header layout") {
    Frame f;
    f.type = MessageType::kHeartbeat;
    f.job_id = test_job();
    f.token.fill(0x5A);
    f.payload = encode(HeartbeatPayload{9});
    Bytes b = encode_frame(f);
    REQUIRE(b.size() == kFrameHeaderBytes + 8);
    CHECK(b[0] == 0);
    CHECK(b[3] == 8);
    CHECK(b[4] == 0x07);
    CHECK(std::equal(f.job_id.begin(), f.job_id.end(), b.begin() + 5));
    CHECK(b[21] == 0x5A);
    Frame g = decode_frame(b);
    CHECK(g.type == f.type);
    CHECK(g.job_id == f.job_id);
    CHECK(g.token == f.token);
    CHECK(decode_heartbeat(g.payload).sequence == 9);
  }

  TEST_CASE("frame reader splits a byte stream") {
    Frame a{MessageType::kPause, test_job(), {}, encode(PausePayload{3, "slow"})};
    Frame b{MessageType::kError, test_job(), {}, encode(ErrorPayload{ErrorCode::kRedFlag, "x"})};
    Bytes stream = encode_frame(a);
    Bytes second = encode_frame(b);
    stream.insert(stream.end(), second.begin(), second.end());
    FrameReader reader;
    reader.feed(ByteView(stream).first(10));
    CHECK_FALSE(reader.next().has_value());
    reader.feed(ByteView(stream).subspan(10));
    auto f1 = reader.next();
    auto f2 = reader.next();
    REQUIRE(f1);
    REQUIRE(f2);
    CHECK(decode_pause(f1->payload).reason == "slow");
    CHECK(decode_error(f2->payload).code == ErrorCode::kRedFlag);
    CHECK_FALSE(reader.next().has_value());
  }

  TEST_CASE("malformed frames are rejected") {
    Bytes short_frame(10, 0);
    CHECK_THROWS_AS(decode_frame(short_frame), Error);
    Frame f{MessageType::kResume, test_job(), {}, encode(ResumePayload{1, 1, 1})};
    Bytes b = encode_frame(f);
    b[3] += 1;  // length claims one more byte than present
    CHECK_THROWS_AS(decode_frame(b), Error);
    b = encode_frame(f);
    b[4] = 0x0B;
    CHECK_THROWS_AS(decode_frame(b), Error);
  }

  TEST_CASE("aggregate message layout") {
    const auto& pk = key512().public_key;
    SeededRandom rng(derive_seed("wire", 1));
    AggregateMessage m;
    m.round = 0x01020304;
    m.sender_rank = 3;
    m.kind = PayloadKind::kChunk;
    m.chunk_index = 2;
    m.step = 1;
    m.ciphertexts = {encrypt(pk, 5, rng), encrypt(pk, 6, rng)};
    Bytes b = encode(m, pk);
    CHECK(b.size() == kAggregateHeaderBytes + 2 * 128);
    CHECK(b[0] == 1);
    CHECK(b[3] == 4);
    CHECK(b[5] == 3);
    CHECK(b[6] == 1);
    CHECK(b[8] == 2);
    CHECK(b[10] == 1);
    CHECK(b[14] == 2);
    AggregateMessage d = decode_aggregate(b, pk);
    CHECK(d.round == m.round);
    CHECK(d.ciphertexts == m.ciphertexts);
    CHECK(peek_aggregate_header(b).step == 1);
    b.pop_back();
    CHECK_THROWS_AS(decode_aggregate(b, pk), Error);
  }

  TEST_CASE("submission carries the key fingerprint") {
    const auto& pk = key512().public_key;
    SeededRandom rng(derive_seed("wire", 2));
    AggregateSubmission s{pk.fingerprint(), {}};
    s.message.round = 1;
    s.message.sender_rank = 2;
    s.message.ciphertexts = {encrypt(pk, 1, rng)};
    Bytes b = encode(s, pk);
    CHECK(peek_submission_key(b) == pk.fingerprint());
    CHECK(decode_submission(b, pk).message.ciphertexts == s.message.ciphertexts);
    KeyPair other = keypair_from_primes(11, 13);
    CHECK_THROWS_AS(decode_submission(b, other.public_key), Error);
  }

  TEST_CASE("control payload round-trips") {
    Participant p{"alice", std::string("eu"), "10.0.0.1:7000"};
    CHECK(decode_register(encode(RegisterPayload{p})).participant == p);

    TopologyAssignPayload t;
    t.protocol = Protocol::kAllReduce;
    t.strategy = RingStrategy::kConsistentHash;
    t.your_rank = 2;
    t.codec = CodecConfig{30, 16, 1024.0};
    t.total_rounds = 12;
    t.members = {TopologyMember{p, {}}, TopologyMember{{"bob", std::nullopt, "b:1"}, {}}};
    t.members[1].token_digest.fill(9);
    TopologyAssignPayload u = decode_topology_assign(encode(t));
    CHECK(u.protocol == t.protocol);
    CHECK(u.strategy == t.strategy);
    CHECK(u.your_rank == 2);
    CHECK(u.codec == t.codec);
    CHECK(u.total_rounds == 12);
    REQUIRE(u.members.size() == 2);
    CHECK(u.members[1].participant.name == "bob");
    CHECK(u.members[1].token_digest == t.members[1].token_digest);

    ResultPayload r{4, 2, {1.5, -0.25}};
    Bytes rb = encode(r);
    CHECK(rb.size() == 12 + 16);
    CHECK(decode_result(rb).average == r.average);

    ResumePayload res{5, 3, 2};
    ResumePayload back = decode_resume(encode(res));
    CHECK(back.round == 5);
    CHECK(back.training_round == 3);
    CHECK(back.epoch == 2);

    PubkeyPayload pkp{3, key512().public_key.serialize()};
    CHECK(decode_pubkey(encode(pkp)).public_key == pkp.public_key);
  }

  TEST_CASE("ids and protocols") {
    JobId id = job_id_from_string("00112233445566778899aabbccddeeff");
    CHECK(id[0] == 0x00);
    CHECK(id[15] == 0xff);
    CHECK(job_id_to_string(id) == "00112233445566778899aabbccddeeff");
    CHECK(parse_protocol("All-Reduce") == Protocol::kAllReduce);
    CHECK(parse_protocol("BROADCAST") == Protocol::kBroadcast);
    CHECK_THROWS_AS(parse_protocol("mesh"), Error);
  }
}

TEST_SUITE("protocol") {
  TEST_CASE("phase transitions") {
    CHECK(RoundState::allowed(Phase::kIdle, Phase::kAggregating));
    CHECK(RoundState::allowed(Phase::kAggregating, Phase::kPaused));
    CHECK(RoundState::allowed(Phase::kPaused, Phase::kAggregating));
    CHECK(RoundState::allowed(Phase::kAggregating, Phase::kAwaitingDecryption));
    CHECK(RoundState::allowed(Phase::kAwaitingDecryption, Phase::kDone));
    CHECK(RoundState::allowed(Phase::kPaused, Phase::kFailed));
    CHECK_FALSE(RoundState::allowed(Phase::kIdle, Phase::kDone));
    CHECK_FALSE(RoundState::allowed(Phase::kFailed, Phase::kAggregating));
    CHECK_FALSE(RoundState::allowed(Phase::kDone, Phase::kFailed));
    CHECK_FALSE(RoundState::allowed(Phase::kAwaitingDecryption, Phase::kPaused));
    RoundState s(test_job(), 1, Protocol::kRing);
    CHECK_THROWS_AS(s.transition(Phase::kDone), Error);
  }

  TEST_CASE("ring P=2") {
    RoundHarness h(Protocol::kRing, {{1.0}, {2.0}});
    h.run();
    REQUIRE(h.submissions.size() == 1);
    CHECK(h.submissions[0].sender_rank == 2);
    CHECK(h.decoded() == std::vector<double>{1.5});
    CHECK(h.messages == 2);
  }

  TEST_CASE("ring P=3 zero vectors") {
    RoundHarness h(Protocol::kRing, {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}});
    h.run();
    CHECK(h.decoded() == std::vector<double>{0.0, 0.0});
  }

  TEST_CASE("ring rejects a message for another round") {
    RoundHarness h(Protocol::kRing, {{1.0}, {2.0}, {3.0}});
    auto out = h.sessions[0]->start();
    h.sessions[1]->start();
    AggregateMessage msg = out[0].message;
    msg.round = 8;
    CHECK_THROWS_AS(h.sessions[1]->on_message(msg), Error);
    CHECK(h.sessions[1]->phase() == Phase::kFailed);
  }

  TEST_CASE("ring rejects wrong sender, length and key") {
    RoundHarness h(Protocol::kRing, {{1.0, 2.0}, {2.0, 3.0}, {3.0, 4.0}});
    auto out = h.sessions[0]->start();
    for (std::size_t i = 1; i < 3; ++i) h.sessions[i]->start();
    AggregateMessage wrong_sender = out[0].message;
    CHECK_THROWS_AS(h.sessions[2]->on_message(wrong_sender), Error);

    RoundHarness h2(Protocol::kRing, {{1.0, 2.0}, {2.0, 3.0}});
    auto o2 = h2.sessions[0]->start();
    h2.sessions[1]->start();
    AggregateMessage short_msg = o2[0].message;
    short_msg.ciphertexts.pop_back();
    CHECK_THROWS_AS(h2.sessions[1]->on_message(short_msg), Error);

    RoundHarness h3(Protocol::kRing, {{1.0}, {2.0}});
    auto o3 = h3.sessions[0]->start();
    h3.sessions[1]->start();
    KeyPair other = generate_keypair(512, derive_seed("other", 1));
    SeededRandom rng(derive_seed("other", 2));
    AggregateMessage foreign = o3[0].message;
    foreign.ciphertexts = {encrypt(other.public_key, 1, rng)};
    CHECK_THROWS_AS(h3.sessions[1]->on_message(foreign), Error);
  }

  TEST_CASE("broadcast P=3") {
    RoundHarness h(Protocol::kBroadcast, {{1.0}, {2.0}, {3.0}});
    h.run();
    REQUIRE(h.submissions.size() == 3);
    for (const auto& s : h.submissions) {
      auto residues = decrypt_vector(key512().private_key, s.ciphertexts);
      CHECK(decode_sum(kCodec, key512().public_key.n(), residues, 1) == std::vector<double>{6.0});
    }
  }

  TEST_CASE("broadcast P=2 receives exactly one peer vector") {
    RoundHarness h(Protocol::kBroadcast, {{1.0}, {2.0}});
    auto out = h.sessions[0]->start();
    CHECK(out.size() == 1);
    CHECK(out[0].to_rank == 2);
  }

  TEST_CASE("duplicate detection") {
    const auto& pk = key512().public_key;
    SeededRandom rng(derive_seed("dup", 1));
    CiphertextVector a{encrypt(pk, 1, rng)}, b{encrypt(pk, 1, rng)};
    CHECK_FALSE(detect_duplicates({{1, a}, {2, b}}, pk).flagged());
    DuplicateReport r = detect_duplicates({{1, a}, {2, b}, {3, a}}, pk);
    CHECK(r.flagged());
    CHECK(r.ranks() == std::vector<std::size_t>{1, 3});
    CHECK(r.describe() == "identical ciphertext vectors from ranks 1,3");
  }

  TEST_CASE("broadcast red flag on planted duplicates") {
    Contribution colluder;
    colluder.add_own = false;
    colluder.shared_nonce_seed = derive_seed("collusion", 1);
    RoundHarness h(Protocol::kBroadcast, {{1.0}, {2.0}, {3.0}, {4.0}},
                   {Contribution{}, colluder, colluder, Contribution{}});
    bool flagged = false;
    try {
      h.run();
    } catch (const Error& e) {
      flagged = e.code() == ErrorCode::kRedFlag;
    }
    CHECK(flagged);
    auto* first_honest = dynamic_cast<BroadcastSession*>(h.sessions[0].get());
    auto* last_honest = dynamic_cast<BroadcastSession*>(h.sessions[3].get());
    bool named = (first_honest->red_flag() &&
                  first_honest->red_flag()->ranks() == std::vector<std::size_t>{2, 3}) ||
                 (last_honest->red_flag() &&
                  last_honest->red_flag()->ranks() == std::vector<std::size_t>{2, 3});
    CHECK(named);
  }

  TEST_CASE("all-reduce P=3") {
    RoundHarness h(Protocol::kAllReduce, {{1, 1, 1}, {2, 2, 2}, {3, 3, 3}});
    h.run();
    CHECK(h.submissions.size() == 3);
    CHECK(h.decoded() == std::vector<double>{2.0, 2.0, 2.0});
    for (auto& s : h.sessions) {
      auto* ar = dynamic_cast<AllReduceSession*>(s.get());
      CHECK(ar->chunk_messages_sent() == 2);
    }
  }

  TEST_CASE("all-reduce P=2 submits one chunk each") {
    RoundHarness h(Protocol::kAllReduce, {{1.0, -2.0}, {3.0, 5.0}});
    h.run();
    CHECK(h.submissions.size() == 2);
    CHECK(h.decoded() == std::vector<double>{2.0, 1.5});
  }

  TEST_CASE("all-reduce rejects out-of-order chunks") {
    RoundHarness h(Protocol::kAllReduce, {{1, 2, 3, 4}, {1, 2, 3, 4}, {1, 2, 3, 4}});
    std::vector<std::vector<Outbound>> starts;
    for (auto& s : h.sessions) starts.push_back(s->start());
    AggregateMessage m = starts[0][0].message;  // rank 1 -> rank 2, step 1
    m.step = 2;
    CHECK_THROWS_AS(h.sessions[1]->on_message(m), Error);
  }

  TEST_CASE("protocols agree bitwise on P=4, length 10") {
    SeededRandom rng(derive_seed("equivalence", 1));
    std::vector<std::vector<double>> inputs(4, std::vector<double>(10));
    for (auto& v : inputs) {
      for (double& x : v) x = static_cast<double>(rng.next_u64() % 2000001) / 1000.0 - 1000.0;
    }
    RoundHarness ring(Protocol::kRing, inputs), bc(Protocol::kBroadcast, inputs),
        ar(Protocol::kAllReduce, inputs);
    ring.run();
    bc.run();
    ar.run();
    CHECK(ring.decoded() == bc.decoded());
    CHECK(ring.decoded() == ar.decoded());
  }

  TEST_CASE("pause and resume") {
    RoundHarness h(Protocol::kRing, {{1.0}, {2.0}});
    h.sessions[1]->start();
    h.sessions[1]->pause();
    CHECK(h.sessions[1]->phase() == Phase::kPaused);
    h.sessions[1]->resume();
    CHECK(h.sessions[1]->phase() == Phase::kAggregating);
  }
}
