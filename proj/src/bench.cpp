#include "claimchain/bench.hpp"

#include <chrono>

#include "claimchain/merkle.hpp"

namespace claimchain::bench {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

Bytes random_bytes(size_t n) {
  Bytes b(n);
  crypto::rng::fill(b);
  return b;
}

}  // namespace

ClaimTimings measure_claim_ops(size_t iterations) {
  ClaimTimings out;
  out.iterations = iterations;
  if (iterations == 0) return out;

  auto vrf = crypto::vrf_keygen();
  auto owner_dh = crypto::dh_keygen();
  auto reader_dh = crypto::dh_keygen();

  std::vector<Bytes> labels(iterations);
  std::vector<Bytes> bodies(iterations);
  std::vector<core::BlockNonce> nonces(iterations);
  for (size_t i = 0; i < iterations; ++i) {
    labels[i] = random_bytes(12);
    bodies[i] = core::pad_claim_body(random_bytes(300));
    crypto::rng::fill(nonces[i]);
  }

  std::vector<core::EncClaimResult> claims;
  claims.reserve(iterations);
  auto t0 = Clock::now();
  for (size_t i = 0; i < iterations; ++i)
    claims.push_back(core::enc_claim(vrf.sk, labels[i], bodies[i], nonces[i]));
  auto t1 = Clock::now();
  out.encode_ms = ms_between(t0, t1) / static_cast<double>(iterations);

  t0 = Clock::now();
  for (size_t i = 0; i < iterations; ++i) {
    auto dec = core::dec_claim(vrf.pk, labels[i], claims[i].secrets.h, claims[i].secrets.k,
                               claims[i].secrets.t, claims[i].encoded.map_value(), nonces[i]);
    if (dec.status != core::DecodeStatus::Ok) throw std::runtime_error("bench decode failed");
  }
  t1 = Clock::now();
  out.decode_ms = ms_between(t0, t1) / static_cast<double>(iterations);

  std::vector<core::CapabilityEntry> caps;
  caps.reserve(iterations);
  t0 = Clock::now();
  for (size_t i = 0; i < iterations; ++i)
    caps.push_back(core::enc_cap(owner_dh.sk, reader_dh.pk, labels[i], claims[i].secrets,
                                 nonces[i]));
  t1 = Clock::now();
  out.cap_encode_ms = ms_between(t0, t1) / static_cast<double>(iterations);

  t0 = Clock::now();
  for (size_t i = 0; i < iterations; ++i) {
    auto dec = core::dec_cap(reader_dh.sk, owner_dh.pk, labels[i], caps[i].ciphertext,
                             nonces[i]);
    if (!dec.ok) throw std::runtime_error("bench capability decode failed");
  }
  t1 = Clock::now();
  out.cap_decode_ms = ms_between(t0, t1) / static_cast<double>(iterations);
  return out;
}

TreeStats measure_tree(size_t entries, size_t probes) {
  TreeStats out;
  out.entries = entries;
  if (entries == 0) return out;

  std::vector<std::pair<Bytes, Bytes>> kv;
  kv.reserve(entries);
  for (size_t i = 0; i < entries; ++i) kv.emplace_back(random_bytes(8), random_bytes(700));

  store::ContentStore s;
  auto t0 = Clock::now();
  merkle::MapRoot root = merkle::build_tree(kv, s);
  auto t1 = Clock::now();
  out.build_seconds = ms_between(t0, t1) / 1000.0;

  size_t node_total = 0;
  size_t n_probes = std::min(probes, entries);
  for (size_t i = 0; i < n_probes; ++i) {
    const Bytes& key = kv[(i * 7919) % entries].first;
    merkle::ResolutionPath path = merkle::get_path(root, key, s);
    node_total += path.nodes.size();
    out.max_path_nodes = std::max(out.max_path_nodes, path.nodes.size());
    out.max_proof_bytes = std::max(out.max_proof_bytes, path.encode().size());
  }
  out.mean_path_nodes = n_probes ? static_cast<double>(node_total) / n_probes : 0.0;
  return out;
}

BlockStats measure_block_size(size_t low, size_t high) {
  auto block_bytes = [](size_t n_claims) {
    store::ContentStore s;
    core::KeyRing keys = core::keyring_generate();
    std::vector<core::Claim> claims;
    for (size_t i = 0; i < n_claims; ++i)
      claims.push_back({random_bytes(12), random_bytes(300)});
    auto res = core::extend_chain(random_bytes(32), claims, {}, keys, std::nullopt, s);
    return res.block.encode().size();
  };
  BlockStats out;
  out.claims_low = low;
  out.bytes_low = block_bytes(low);
  out.claims_high = high;
  out.bytes_high = block_bytes(high);
  return out;
}

}  // namespace claimchain::bench
