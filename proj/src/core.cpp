#include "claimchain/core.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace claimchain::core {

namespace {

constexpr std::uint8_t kBlockVersion = 1;

// Hash family indices for the four key derivations.
constexpr std::uint64_t kClaimLookupIndex = 1;
constexpr std::uint64_t kClaimKeyIndex = 2;
constexpr std::uint64_t kCapLookupIndex = 3;
constexpr std::uint64_t kCapKeyIndex = 4;

LookupKey truncate8(const Hash256& h) {
  LookupKey out;
  std::copy_n(h.begin(), out.size(), out.begin());
  return out;
}

crypto::SymmetricKey truncate16(const Hash256& h) {
  crypto::SymmetricKey out;
  std::copy_n(h.begin(), out.size(), out.begin());
  return out;
}

Bytes vrf_input(BytesView label, const BlockNonce& nonce) {
  wire::Writer w;
  w.bytes(label);
  w.raw(nonce);
  return w.take();
}

Bytes cap_derivation_input(BytesView shared_secret, BytesView label, const BlockNonce& nonce) {
  wire::Writer w;
  w.bytes(shared_secret);
  w.bytes(label);
  w.raw(nonce);
  return w.take();
}

}  // namespace

// --- key material ------------------------------------------------------

KeyRing keyring_generate() {
  KeyRing kr{crypto::sig_keygen(), crypto::vrf_keygen(), crypto::dh_keygen(), crypto::Scalar()};
  kr.prev_sig_sk = kr.sig.sk;
  return kr;
}

// --- blocks ------------------------------------------------------------

Bytes Block::signing_preimage() const {
  wire::Writer w;
  w.u8(kBlockVersion);
  w.u64(payload.index);
  w.raw(payload.nonce);
  w.bytes(payload.pk_sig);
  w.bytes(payload.pk_vrf);
  w.bytes(payload.pk_dh);
  w.bytes(payload.public_data);
  w.raw(payload.map_root);
  w.raw(ptr);
  return w.take();
}

Bytes Block::encode() const {
  wire::Writer w;
  w.raw(signing_preimage());
  w.bytes(sigma);
  return w.take();
}

std::optional<Block> Block::decode(BytesView b) {
  wire::Reader r(b);
  Block blk;
  std::uint8_t version = r.u8();
  if (version != kBlockVersion) return std::nullopt;
  blk.payload.index = r.u64();
  blk.payload.nonce = r.fixed<kBlockNonceSize>();
  BytesView ps = r.bytes();
  blk.payload.pk_sig.assign(ps.begin(), ps.end());
  BytesView pv = r.bytes();
  blk.payload.pk_vrf.assign(pv.begin(), pv.end());
  BytesView pd = r.bytes();
  blk.payload.pk_dh.assign(pd.begin(), pd.end());
  BytesView pub = r.bytes();
  blk.payload.public_data.assign(pub.begin(), pub.end());
  blk.payload.map_root = r.fixed<32>();
  blk.ptr = r.fixed<32>();
  BytesView sg = r.bytes();
  blk.sigma.assign(sg.begin(), sg.end());
  if (!r.ok() || !r.at_end()) return std::nullopt;
  return blk;
}

Hash256 Block::hash() const { return crypto::hash(encode()); }

// --- claim bodies ------------------------------------------------------

Bytes pad_claim_body(BytesView raw, size_t envelope_size) {
  if (raw.size() + 4 > envelope_size)
    throw ClaimBodyTooLarge("claim body of " + std::to_string(raw.size()) +
                            " bytes exceeds the " + std::to_string(envelope_size) +
                            "-byte envelope");
  Bytes out(envelope_size, 0);
  std::uint32_t len = static_cast<std::uint32_t>(raw.size());
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(len >> (8 * i));
  std::copy(raw.begin(), raw.end(), out.begin() + 4);
  return out;
}

std::optional<Bytes> unpad_claim_body(BytesView padded) {
  if (padded.size() < 4) return std::nullopt;
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(padded[i]) << (8 * i);
  if (static_cast<size_t>(len) + 4 > padded.size()) return std::nullopt;
  for (size_t i = 4 + len; i < padded.size(); ++i) {
    if (padded[i] != 0) return std::nullopt;
  }
  return Bytes(padded.begin() + 4, padded.begin() + 4 + len);
}

// --- encrypted claims --------------------------------------------------

Bytes EncodedClaim::map_value() const {
  wire::Writer w;
  w.bytes(ciphertext);
  w.bytes(commitment.encode());
  return w.take();
}

std::optional<EncodedClaim> EncodedClaim::from_map_value(const LookupKey& key, BytesView value) {
  wire::Reader r(value);
  EncodedClaim c;
  c.lookup_key = key;
  BytesView ct = r.bytes();
  c.ciphertext.assign(ct.begin(), ct.end());
  BytesView com = r.bytes();
  if (!r.ok() || !r.at_end()) return std::nullopt;
  auto pt = crypto::GroupElement::from_encoded(com);
  if (!pt || pt->is_identity()) return std::nullopt;
  c.commitment = *pt;
  return c;
}

LookupKey claim_lookup_key(const crypto::GroupElement& h) {
  return truncate8(crypto::hash_family(kClaimLookupIndex, h.encode()));
}

LookupKey cap_lookup_key(BytesView shared_secret, BytesView label, const BlockNonce& nonce) {
  return truncate8(
      crypto::hash_family(kCapLookupIndex, cap_derivation_input(shared_secret, label, nonce)));
}

crypto::SymmetricKey cap_encryption_key(BytesView shared_secret, BytesView label,
                                        const BlockNonce& nonce) {
  return truncate16(
      crypto::hash_family(kCapKeyIndex, cap_derivation_input(shared_secret, label, nonce)));
}

EncClaimResult enc_claim(const crypto::Scalar& sk_vrf, BytesView label, BytesView padded_body,
                         const BlockNonce& nonce) {
  EncClaimResult out;
  Bytes input = vrf_input(label, nonce);
  crypto::GroupElement base = crypto::hash_to_group(input);
  out.secrets.h = base.mul(sk_vrf);
  out.secrets.r = crypto::Scalar::random();
  crypto::rng::fill(out.secrets.t);
  out.secrets.k = truncate16(crypto::hash_family(kClaimKeyIndex, out.secrets.h.encode()));

  crypto::Scalar digest = crypto::hash_to_scalar(padded_body);
  crypto::GroupElement com = crypto::pedersen_commit(out.secrets.r, digest);

  crypto::ClaimStatement st{crypto::GroupElement::base_mul(sk_vrf), input, out.secrets.h, com,
                            digest};
  crypto::SpkTranscript proof = crypto::claim_proof_prove(sk_vrf, out.secrets.r, st,
                                                          out.secrets.t);

  wire::Writer pt;
  pt.bytes(proof.encode());
  pt.raw(padded_body);
  out.encoded.lookup_key = claim_lookup_key(out.secrets.h);
  out.encoded.ciphertext = crypto::aead_encrypt(out.secrets.k, pt.data());
  out.encoded.commitment = com;
  return out;
}

DecClaimResult dec_claim(const crypto::GroupElement& pk_vrf, BytesView label,
                         const crypto::GroupElement& h, const crypto::SymmetricKey& k,
                         const ProofKey& t, BytesView claim_map_value,
                         const BlockNonce& nonce) {
  DecClaimResult out;
  auto parsed = EncodedClaim::from_map_value(LookupKey{}, claim_map_value);
  if (!parsed) return out;
  auto plain = crypto::aead_decrypt(k, parsed->ciphertext);
  if (!plain) return out;

  wire::Reader r(*plain);
  BytesView proof_bytes = r.bytes();
  if (!r.ok()) return out;
  auto proof = crypto::SpkTranscript::decode(proof_bytes);
  if (!proof) return out;
  BytesView rest = r.raw(r.remaining());
  Bytes padded(rest.begin(), rest.end());

  crypto::Scalar digest = crypto::hash_to_scalar(padded);
  crypto::ClaimStatement st{pk_vrf, vrf_input(label, nonce), h, parsed->commitment, digest};
  if (!crypto::claim_proof_verify(st, t, *proof)) return out;

  out.status = DecodeStatus::Ok;
  out.padded_body = std::move(padded);
  return out;
}

// --- capabilities ------------------------------------------------------

CapabilityEntry enc_cap(const crypto::Scalar& sk_dh_owner,
                        const crypto::GroupElement& pk_dh_reader, BytesView label,
                        const ClaimSecrets& secrets, const BlockNonce& nonce) {
  Bytes s = crypto::dh_shared_secret(sk_dh_owner, pk_dh_reader);
  CapabilityEntry entry;
  entry.lookup_key = cap_lookup_key(s, label, nonce);
  crypto::SymmetricKey k_cap = cap_encryption_key(s, label, nonce);

  wire::Writer pt;
  pt.raw(secrets.h.encode());  // 33 bytes
  pt.raw(secrets.k);
  pt.raw(secrets.t);
  entry.ciphertext = crypto::aead_encrypt(k_cap, pt.data());
  return entry;
}

DecCapResult dec_cap(const crypto::Scalar& sk_dh_reader,
                     const crypto::GroupElement& pk_dh_owner, BytesView label,
                     BytesView cap_map_value, const BlockNonce& nonce) {
  DecCapResult out;
  Bytes s = crypto::dh_shared_secret(sk_dh_reader, pk_dh_owner);
  crypto::SymmetricKey k_cap = cap_encryption_key(s, label, nonce);
  auto plain = crypto::aead_decrypt(k_cap, cap_map_value);
  if (!plain) return out;
  if (plain->size() != 33 + crypto::kSymmetricKeySize + kProofKeySize) return out;

  auto h = crypto::GroupElement::from_encoded(BytesView(plain->data(), 33));
  if (!h || h->is_identity()) return out;
  out.h = *h;
  std::copy_n(plain->begin() + 33, out.k.size(), out.k.begin());
  std::copy_n(plain->begin() + 33 + out.k.size(), out.t.size(), out.t.begin());
  out.ok = true;
  return out;
}

// --- chain extension ---------------------------------------------------

ExtendResult extend_chain(BytesView public_data, const std::vector<Claim>& claims,
                          const std::vector<Grant>& grants, const KeyRing& keyring,
                          const std::optional<Hash256>& prev, store::ContentStore& s,
                          size_t body_envelope_size) {
  ExtendResult result;
  Block& blk = result.block;

  const crypto::Scalar* signer = nullptr;
  if (prev) {
    auto prev_bytes = s.get(*prev);
    if (!prev_bytes) throw CoreError("previous head not in store");
    auto prev_blk = Block::decode(*prev_bytes);
    if (!prev_blk) throw CoreError("previous head undecodable");
    Bytes announced = crypto::GroupElement::base_mul(keyring.prev_sig_sk).encode();
    if (announced != prev_blk->payload.pk_sig)
      throw KeyMismatchError("signing key does not match the previous block's announcement");
    blk.payload.index = prev_blk->payload.index + 1;
    blk.ptr = *prev;
    signer = &keyring.prev_sig_sk;
  } else {
    blk.payload.index = 0;
    blk.ptr.fill(0);
    signer = &keyring.sig.sk;
  }

  crypto::rng::fill(blk.payload.nonce);
  blk.payload.pk_sig = keyring.sig.pk.encode();
  blk.payload.pk_vrf = keyring.vrf.pk.encode();
  blk.payload.pk_dh = keyring.dh.pk.encode();
  blk.payload.public_data.assign(public_data.begin(), public_data.end());

  std::vector<std::pair<Bytes, Bytes>> entries;
  entries.reserve(claims.size() + grants.size());
  std::map<Bytes, ClaimSecrets> secrets_by_label;

  for (const Claim& c : claims) {
    Bytes padded = pad_claim_body(c.body, body_envelope_size);
    EncClaimResult enc = enc_claim(keyring.vrf.sk, c.label, padded, blk.payload.nonce);
    entries.emplace_back(Bytes(enc.encoded.lookup_key.begin(), enc.encoded.lookup_key.end()),
                         enc.encoded.map_value());
    ClaimRecord rec;
    rec.label = c.label;
    rec.padded_body = std::move(padded);
    rec.r = enc.secrets.r;
    rec.h = enc.secrets.h;
    rec.k = enc.secrets.k;
    rec.t = enc.secrets.t;
    rec.block_index = blk.payload.index;
    result.records.push_back(std::move(rec));
    secrets_by_label[c.label] = enc.secrets;
  }

  for (const Grant& g : grants) {
    auto it = secrets_by_label.find(g.label);
    if (it == secrets_by_label.end())
      throw MissingClaimForGrant("grant for label without a claim in this block: " +
                                 hex_encode(g.label));
    CapabilityEntry cap =
        enc_cap(keyring.dh.sk, g.reader_pk_dh, g.label, it->second, blk.payload.nonce);
    entries.emplace_back(Bytes(cap.lookup_key.begin(), cap.lookup_key.end()),
                         std::move(cap.ciphertext));
  }

  blk.payload.map_root = entries.empty() ? merkle::kEmptyRoot : merkle::build_tree(entries, s);
  blk.sigma = crypto::sign(*signer, blk.signing_preimage());
  result.head = s.put(blk.encode());
  return result;
}

// --- validation --------------------------------------------------------

namespace {

std::optional<crypto::GroupElement> decode_point(BytesView b) {
  auto p = crypto::GroupElement::from_encoded(b);
  if (!p || p->is_identity()) return std::nullopt;
  return p;
}

}  // namespace

ValidationReport validate_blocks(std::span<const Block> chain) {
  ValidationReport report;
  if (chain.empty()) return report;

  if (chain[0].is_genesis()) {
    const Block& g = chain[0];
    Hash256 zero{};
    if (g.ptr != zero) return {false, 0, "genesis pointer not zero"};
    auto pk = decode_point(g.payload.pk_sig);
    if (!pk) return {false, 0, "genesis signature key undecodable"};
    if (!crypto::verify(*pk, g.signing_preimage(), g.sigma))
      return {false, 0, "genesis self-signature invalid"};
  }

  for (size_t i = 1; i < chain.size(); ++i) {
    const Block& prev = chain[i - 1];
    const Block& cur = chain[i];
    auto pk = decode_point(prev.payload.pk_sig);
    if (!pk) return {false, i, "predecessor signature key undecodable"};
    if (!crypto::verify(*pk, cur.signing_preimage(), cur.sigma))
      return {false, i, "signature invalid"};
    if (cur.ptr != prev.hash()) return {false, i, "pointer does not match predecessor hash"};
    if (cur.payload.index != prev.payload.index + 1)
      return {false, i, "index does not increment by one"};
  }
  return report;
}

// --- claim retrieval ---------------------------------------------------

GetClaimResult get_claim(const crypto::Scalar& sk_dh_reader, BytesView label,
                         const Hash256& head, const store::ContentStore& s) {
  GetClaimResult out;
  auto head_bytes = s.get(head);
  if (!head_bytes) return out;  // NotFound
  auto blk = Block::decode(*head_bytes);
  if (!blk) {
    out.status = GetClaimStatus::Rejected;
    return out;
  }
  auto pk_dh = decode_point(blk->payload.pk_dh);
  auto pk_vrf = decode_point(blk->payload.pk_vrf);
  if (!pk_dh || !pk_vrf) {
    out.status = GetClaimStatus::Rejected;
    return out;
  }

  Bytes secret = crypto::dh_shared_secret(sk_dh_reader, *pk_dh);
  LookupKey cap_key = cap_lookup_key(secret, label, blk->payload.nonce);
  merkle::QueryResult cap = merkle::query_tree(blk->payload.map_root, cap_key, s);
  if (cap.status != merkle::QueryStatus::Found) return out;  // NotFound

  DecCapResult opened = dec_cap(sk_dh_reader, *pk_dh, label, cap.value, blk->payload.nonce);
  if (!opened.ok) {
    out.status = GetClaimStatus::Rejected;
    return out;
  }

  LookupKey ckey = claim_lookup_key(opened.h);
  merkle::QueryResult claim = merkle::query_tree(blk->payload.map_root, ckey, s);
  if (claim.status != merkle::QueryStatus::Found) return out;  // NotFound

  DecClaimResult dec = dec_claim(*pk_vrf, label, opened.h, opened.k, opened.t, claim.value,
                                 blk->payload.nonce);
  if (dec.status != DecodeStatus::Ok) {
    out.status = GetClaimStatus::Rejected;
    return out;
  }
  auto body = unpad_claim_body(dec.padded_body);
  if (!body) {
    out.status = GetClaimStatus::Rejected;
    return out;
  }
  out.status = GetClaimStatus::Found;
  out.body = std::move(*body);
  return out;
}

// --- cross-reference consistency ---------------------------------------

crypto::Scalar reference_digest(BytesView block_bytes, size_t body_envelope_size) {
  return crypto::hash_to_scalar(pad_claim_body(block_bytes, body_envelope_size));
}

Bytes ConsistencyProof::encode() const {
  wire::Writer w;
  w.u32(static_cast<std::uint32_t>(entries.size()));
  for (const ConsistencyEntry& e : entries) {
    w.u64(e.block_index);
    w.bytes(e.h.encode());
    w.bytes(e.vrf_proof.encode());
    w.u8(e.has_claim ? 1 : 0);
    if (e.has_claim) {
      w.bytes(e.membership_proof.encode());
      w.bytes(e.claim_map_value);
    }
    w.bytes(e.path.encode());
  }
  return w.take();
}

std::optional<ConsistencyProof> ConsistencyProof::decode(BytesView b) {
  wire::Reader r(b);
  std::uint32_t n = r.u32();
  if (!r.ok() || n > 100000) return std::nullopt;
  ConsistencyProof p;
  p.entries.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    ConsistencyEntry e;
    e.block_index = r.u64();
    auto h = crypto::GroupElement::from_encoded(r.bytes());
    if (!h || h->is_identity()) return std::nullopt;
    e.h = *h;
    auto vp = crypto::SpkTranscript::decode(r.bytes());
    if (!vp) return std::nullopt;
    e.vrf_proof = *vp;
    e.has_claim = r.u8() == 1;
    if (e.has_claim) {
      auto mp = crypto::SpkTranscript::decode(r.bytes());
      if (!mp) return std::nullopt;
      e.membership_proof = *mp;
      BytesView cv = r.bytes();
      e.claim_map_value.assign(cv.begin(), cv.end());
    }
    auto path = merkle::ResolutionPath::decode(r.bytes());
    if (!r.ok() || !path) return std::nullopt;
    e.path = *path;
    p.entries.push_back(std::move(e));
  }
  if (!r.at_end()) return std::nullopt;
  return p;
}

ConsistencyProof prove_consistency(const KeyRing& keyring, BytesView label,
                                   std::span<const Block> own_blocks,
                                   std::span<const Bytes> allowed_blocks,
                                   std::span<const ClaimRecord> records,
                                   const store::ContentStore& s,
                                   size_t body_envelope_size) {
  std::vector<crypto::Scalar> allowed;
  allowed.reserve(allowed_blocks.size());
  for (const Bytes& bb : allowed_blocks)
    allowed.push_back(reference_digest(bb, body_envelope_size));

  ConsistencyProof proof;
  for (const Block& blk : own_blocks) {
    if (crypto::GroupElement::base_mul(keyring.vrf.sk).encode() != blk.payload.pk_vrf)
      throw CoreError("VRF key does not match the block's announcement");

    ConsistencyEntry e;
    e.block_index = blk.payload.index;
    Bytes input = vrf_input(label, blk.payload.nonce);
    crypto::VrfOutput vrf = crypto::vrf_eval(keyring.vrf.sk, input);
    e.h = vrf.h;
    e.vrf_proof = vrf.proof;

    LookupKey ckey = claim_lookup_key(vrf.h);
    const ClaimRecord* rec = nullptr;
    for (const ClaimRecord& cr : records) {
      if (cr.block_index == blk.payload.index && cr.label.size() == label.size() &&
          std::equal(label.begin(), label.end(), cr.label.begin())) {
        rec = &cr;
        break;
      }
    }

    e.path = merkle::get_path(blk.payload.map_root, ckey, s);

    if (rec) {
      e.has_claim = true;
      crypto::Scalar digest = crypto::hash_to_scalar(rec->padded_body);
      bool inside = false;
      for (const crypto::Scalar& a : allowed) {
        if (a == digest) {
          inside = true;
          break;
        }
      }
      if (!inside)
        throw CannotProveError("claim at block " + std::to_string(blk.payload.index) +
                               " commits to a value outside the allowed set");
      crypto::GroupElement com = crypto::pedersen_commit(rec->r, digest);
      e.membership_proof = crypto::membership_prove(rec->r, digest, com, allowed);

      merkle::QueryResult q = merkle::query_tree(blk.payload.map_root, ckey, s);
      if (q.status != merkle::QueryStatus::Found)
        throw CoreError("recorded claim not resolvable in own block map");
      auto parsed = EncodedClaim::from_map_value(ckey, q.value);
      if (!parsed || !(parsed->commitment == com))
        throw CoreError("claim records out of sync with the block map");
      e.claim_map_value = std::move(q.value);
    }
    proof.entries.push_back(std::move(e));
  }
  return proof;
}

ConsistencyVerdict check_consistency(BytesView label, std::span<const Block> own_blocks,
                                     std::span<const Bytes> allowed_blocks,
                                     const ConsistencyProof& proof,
                                     size_t body_envelope_size) {
  if (proof.entries.size() != own_blocks.size())
    return {false, 0, "proof does not cover the requested blocks"};

  std::vector<crypto::Scalar> allowed;
  allowed.reserve(allowed_blocks.size());
  for (const Bytes& bb : allowed_blocks)
    allowed.push_back(reference_digest(bb, body_envelope_size));

  for (size_t i = 0; i < own_blocks.size(); ++i) {
    const Block& blk = own_blocks[i];
    const ConsistencyEntry& e = proof.entries[i];
    std::uint64_t idx = blk.payload.index;
    if (e.block_index != idx) return {false, idx, "entry index mismatch"};

    auto pk_vrf = decode_point(blk.payload.pk_vrf);
    if (!pk_vrf) return {false, idx, "block VRF key undecodable"};
    Bytes input = vrf_input(label, blk.payload.nonce);
    if (!crypto::vrf_verify(*pk_vrf, input, {e.h, e.vrf_proof}))
      return {false, idx, "VRF proof invalid"};

    LookupKey ckey = claim_lookup_key(e.h);
    merkle::PathVerdict pv = merkle::verify_path(blk.payload.map_root, ckey, e.path);
    switch (pv.kind) {
      case merkle::PathVerdict::Kind::Invalid:
        return {false, idx, "resolution path invalid"};
      case merkle::PathVerdict::Kind::Absent:
        if (e.has_claim) return {false, idx, "proof claims presence but path shows absence"};
        break;
      case merkle::PathVerdict::Kind::Value: {
        if (!e.has_claim) return {false, idx, "claim present in map but not disclosed"};
        if (crypto::hash(e.claim_map_value) != pv.value_hash)
          return {false, idx, "claim bytes do not match the map"};
        auto parsed = EncodedClaim::from_map_value(ckey, e.claim_map_value);
        if (!parsed) return {false, idx, "claim bytes undecodable"};
        if (!crypto::membership_verify(parsed->commitment, allowed, e.membership_proof))
          return {false, idx, "membership proof invalid"};
        break;
      }
    }
  }
  return {};
}

// --- latest-block resolution -------------------------------------------

ResolveOutcome resolve_latest(const std::vector<Block>& evidence,
                              const store::ContentStore& s) {
  ResolveOutcome out;

  // Dedupe by block hash.
  std::map<Hash256, Block> unique;
  for (const Block& b : evidence) unique.emplace(b.hash(), b);
  out.diversity = unique.size();
  if (unique.empty()) return out;

  // Ancestry of each evidence block, as far as the store can resolve:
  // a map from index to block hash, including the block itself.
  struct Lineage {
    Hash256 self;
    const Block* block;
    std::map<std::uint64_t, Hash256> by_index;
  };
  std::vector<Lineage> lines;
  Hash256 zero{};
  for (const auto& [h, b] : unique) {
    Lineage ln;
    ln.self = h;
    ln.block = &b;
    ln.by_index[b.payload.index] = h;
    Hash256 cursor = b.ptr;
    std::uint64_t expect = b.payload.index;
    while (cursor != zero && expect > 0) {
      auto bytes = s.get(cursor);
      if (!bytes) break;
      auto parent = Block::decode(*bytes);
      if (!parent) break;
      ln.by_index[parent->payload.index] = cursor;
      cursor = parent->ptr;
      expect = parent->payload.index;
    }
    lines.push_back(std::move(ln));
  }

  auto descends = [](const Lineage& a, const Lineage& b) {
    auto it = a.by_index.find(b.block->payload.index);
    return it != a.by_index.end() && it->second == b.self;
  };

  // Keep blocks not strictly below another evidence block.
  std::vector<const Lineage*> candidates;
  for (const Lineage& a : lines) {
    bool dominated = false;
    for (const Lineage& b : lines) {
      if (&a == &b) continue;
      if (descends(b, a) && !(descends(a, b))) {
        dominated = true;
        break;
      }
    }
    if (!dominated) candidates.push_back(&a);
  }

  if (candidates.size() == 1) {
    out.kind = ResolveOutcome::Kind::Chosen;
    out.chosen = *candidates[0]->block;
    return out;
  }

  out.kind = ResolveOutcome::Kind::Conflict;
  for (size_t i = 0; i < candidates.size(); ++i) {
    for (size_t j = i + 1; j < candidates.size(); ++j) {
      const Lineage& a = *candidates[i];
      const Lineage& b = *candidates[j];
      // Lowest index where both lineages are known and disagree.
      ForkEvidence fe;
      bool found = false;
      for (const auto& [idx, ha] : a.by_index) {
        auto it = b.by_index.find(idx);
        if (it != b.by_index.end() && it->second != ha) {
          fe = {ha, it->second, idx};
          found = true;
          break;
        }
      }
      if (!found) fe = {a.self, b.self, std::min(a.block->payload.index, b.block->payload.index)};
      out.forks.push_back(fe);
    }
  }
  return out;
}

}  // namespace claimchain::core
