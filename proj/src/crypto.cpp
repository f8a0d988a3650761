#include "claimchain/crypto.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/obj_mac.h>
#include <openssl/rand.h>

#include <cassert>
#include <cstring>
#include <mutex>

namespace claimchain::crypto {

namespace {

// Shared curve context.  The group is created once and never mutated
// afterwards, which makes concurrent reads safe.  BN_CTX is not
// thread-safe, so each thread gets its own.
struct Curve {
  EC_GROUP* group;
  const BIGNUM* order;
  BIGNUM* p;  // field prime

  Curve() {
    group = EC_GROUP_new_by_curve_name(NID_secp256k1);
    if (!group) throw CryptoError("secp256k1 unavailable");
    order = EC_GROUP_get0_order(group);
    p = BN_new();
    BN_CTX* ctx = BN_CTX_new();
    if (!EC_GROUP_get_curve(group, p, nullptr, nullptr, ctx))
      throw CryptoError("curve parameters unavailable");
    BN_CTX_free(ctx);
  }
};

const Curve& curve() {
  static Curve c;
  return c;
}

BN_CTX* bn_ctx() {
  static thread_local BN_CTX* ctx = BN_CTX_new();
  return ctx;
}

BIGNUM* bn(void* h) { return static_cast<BIGNUM*>(h); }

EC_POINT* new_point() {
  EC_POINT* p = EC_POINT_new(curve().group);
  if (!p) throw CryptoError("EC_POINT_new failed");
  return p;
}

}  // namespace

// --- rng ---------------------------------------------------------------

namespace rng {

namespace {

// Counter-mode SHA-256 stream for reproducible test runs.
struct TestStream {
  std::array<std::uint8_t, 32> state{};
  std::uint64_t counter = 0;
  Bytes pool;
  size_t pos = 0;
};

thread_local std::unique_ptr<TestStream> t_stream;

}  // namespace

void fill(std::span<std::uint8_t> out) {
  if (t_stream) {
    TestStream& s = *t_stream;
    for (size_t i = 0; i < out.size(); ++i) {
      if (s.pos == s.pool.size()) {
        wire::Writer w;
        w.raw(s.state);
        w.u64(s.counter++);
        Hash256 block = hash(w.data());
        s.pool.assign(block.begin(), block.end());
        s.pos = 0;
      }
      out[i] = s.pool[s.pos++];
    }
    return;
  }
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
    throw CryptoError("RAND_bytes failed");
}

void seed_for_testing(std::uint64_t seed) {
  auto s = std::make_unique<TestStream>();
  wire::Writer w;
  w.bytes(std::string("claimchain/test-rng"));
  w.u64(seed);
  s->state = hash(w.data());
  t_stream = std::move(s);
}

void use_system() { t_stream.reset(); }

}  // namespace rng

// --- Scalar ------------------------------------------------------------

Scalar::Scalar() : n_(BN_new()) {
  if (!n_) throw CryptoError("BN_new failed");
  BN_zero(bn(n_));
}

Scalar::Scalar(const Scalar& other) : n_(BN_dup(bn(other.n_))) {
  if (!n_) throw CryptoError("BN_dup failed");
}

Scalar::Scalar(Scalar&& other) noexcept : n_(other.n_) { other.n_ = nullptr; }

Scalar& Scalar::operator=(const Scalar& other) {
  if (this != &other) {
    if (!BN_copy(bn(n_), bn(other.n_))) throw CryptoError("BN_copy failed");
  }
  return *this;
}

Scalar& Scalar::operator=(Scalar&& other) noexcept {
  if (this != &other) {
    if (n_) BN_free(bn(n_));
    n_ = other.n_;
    other.n_ = nullptr;
  }
  return *this;
}

Scalar::~Scalar() {
  if (n_) BN_free(bn(n_));
}

Scalar Scalar::from_u64(std::uint64_t v) {
  Scalar s;
  if (!BN_set_word(bn(s.n_), v)) throw CryptoError("BN_set_word failed");
  // Reduce for uniformity of the type's invariant; u64 < q always, but
  // keep the invariant explicit.
  BN_nnmod(bn(s.n_), bn(s.n_), curve().order, bn_ctx());
  return s;
}

Scalar Scalar::random() {
  std::array<std::uint8_t, 32> buf;
  rng::fill(buf);
  return reduce_from_bytes(buf);
}

std::optional<Scalar> Scalar::from_be32(BytesView b) {
  if (b.size() != 32) return std::nullopt;
  Scalar s;
  if (!BN_bin2bn(b.data(), 32, bn(s.n_))) return std::nullopt;
  if (BN_cmp(bn(s.n_), curve().order) >= 0) return std::nullopt;
  return s;
}

Scalar Scalar::reduce_from_bytes(BytesView b) {
  Scalar s;
  BIGNUM* wide = BN_new();
  if (!wide || !BN_bin2bn(b.data(), static_cast<int>(b.size()), wide)) {
    BN_free(wide);
    throw CryptoError("BN_bin2bn failed");
  }
  BN_nnmod(bn(s.n_), wide, curve().order, bn_ctx());
  BN_free(wide);
  return s;
}

std::array<std::uint8_t, 32> Scalar::to_be32() const {
  std::array<std::uint8_t, 32> out{};
  if (BN_bn2binpad(bn(n_), out.data(), 32) != 32) throw CryptoError("BN_bn2binpad failed");
  return out;
}

Scalar Scalar::add(const Scalar& other) const {
  Scalar r;
  if (!BN_mod_add(bn(r.n_), bn(n_), bn(other.n_), curve().order, bn_ctx()))
    throw CryptoError("BN_mod_add failed");
  return r;
}

Scalar Scalar::sub(const Scalar& other) const {
  Scalar r;
  if (!BN_mod_sub(bn(r.n_), bn(n_), bn(other.n_), curve().order, bn_ctx()))
    throw CryptoError("BN_mod_sub failed");
  return r;
}

Scalar Scalar::mul(const Scalar& other) const {
  Scalar r;
  if (!BN_mod_mul(bn(r.n_), bn(n_), bn(other.n_), curve().order, bn_ctx()))
    throw CryptoError("BN_mod_mul failed");
  return r;
}

Scalar Scalar::neg() const {
  Scalar zero;
  return zero.sub(*this);
}

Scalar Scalar::invert() const {
  if (is_zero()) throw CryptoError("inverse of zero");
  Scalar r;
  if (!BN_mod_inverse(bn(r.n_), bn(n_), curve().order, bn_ctx()))
    throw CryptoError("BN_mod_inverse failed");
  return r;
}

bool Scalar::is_zero() const { return BN_is_zero(bn(n_)); }

bool Scalar::operator==(const Scalar& other) const {
  return BN_cmp(bn(n_), bn(other.n_)) == 0;
}

// --- GroupElement ------------------------------------------------------

GroupElement::GroupElement() : p_(new_point()) {
  EC_POINT_set_to_infinity(curve().group, static_cast<EC_POINT*>(p_));
}

GroupElement::GroupElement(const GroupElement& other)
    : p_(EC_POINT_dup(static_cast<const EC_POINT*>(other.p_), curve().group)) {
  if (!p_) throw CryptoError("EC_POINT_dup failed");
}

GroupElement::GroupElement(GroupElement&& other) noexcept : p_(other.p_) {
  other.p_ = nullptr;
}

GroupElement& GroupElement::operator=(const GroupElement& other) {
  if (this != &other) {
    if (!EC_POINT_copy(static_cast<EC_POINT*>(p_), static_cast<const EC_POINT*>(other.p_)))
      throw CryptoError("EC_POINT_copy failed");
  }
  return *this;
}

GroupElement& GroupElement::operator=(GroupElement&& other) noexcept {
  if (this != &other) {
    if (p_) EC_POINT_free(static_cast<EC_POINT*>(p_));
    p_ = other.p_;
    other.p_ = nullptr;
  }
  return *this;
}

GroupElement::~GroupElement() {
  if (p_) EC_POINT_free(static_cast<EC_POINT*>(p_));
}

GroupElement GroupElement::generator() {
  GroupElement g;
  if (!EC_POINT_copy(static_cast<EC_POINT*>(g.p_), EC_GROUP_get0_generator(curve().group)))
    throw CryptoError("generator copy failed");
  return g;
}

GroupElement GroupElement::base_mul(const Scalar& k) {
  GroupElement r;
  if (!EC_POINT_mul(curve().group, static_cast<EC_POINT*>(r.p_), bn(k.n_), nullptr,
                    nullptr, bn_ctx()))
    throw CryptoError("EC_POINT_mul failed");
  return r;
}

std::optional<GroupElement> GroupElement::from_encoded(BytesView b) {
  if (b.empty()) return std::nullopt;
  GroupElement r;
  if (!EC_POINT_oct2point(curve().group, static_cast<EC_POINT*>(r.p_), b.data(), b.size(),
                          bn_ctx())) {
    ERR_clear_error();
    return std::nullopt;
  }
  // Canonical form only: identity encodes as one zero byte, everything
  // else as 33 compressed bytes.
  if (b.size() == 1 && b[0] == 0x00) return r;
  if (b.size() != 33 || (b[0] != 0x02 && b[0] != 0x03)) return std::nullopt;
  return r;
}

Bytes GroupElement::encode() const {
  size_t len = EC_POINT_point2oct(curve().group, static_cast<const EC_POINT*>(p_),
                                  POINT_CONVERSION_COMPRESSED, nullptr, 0, bn_ctx());
  if (len == 0) throw CryptoError("point2oct sizing failed");
  Bytes out(len);
  if (EC_POINT_point2oct(curve().group, static_cast<const EC_POINT*>(p_),
                         POINT_CONVERSION_COMPRESSED, out.data(), len, bn_ctx()) != len)
    throw CryptoError("point2oct failed");
  return out;
}

GroupElement GroupElement::add(const GroupElement& other) const {
  GroupElement r;
  if (!EC_POINT_add(curve().group, static_cast<EC_POINT*>(r.p_),
                    static_cast<const EC_POINT*>(p_),
                    static_cast<const EC_POINT*>(other.p_), bn_ctx()))
    throw CryptoError("EC_POINT_add failed");
  return r;
}

GroupElement GroupElement::mul(const Scalar& k) const {
  GroupElement r;
  if (!EC_POINT_mul(curve().group, static_cast<EC_POINT*>(r.p_), nullptr,
                    static_cast<const EC_POINT*>(p_), bn(k.n_), bn_ctx()))
    throw CryptoError("EC_POINT_mul failed");
  return r;
}

GroupElement GroupElement::neg() const {
  GroupElement r(*this);
  if (!EC_POINT_invert(curve().group, static_cast<EC_POINT*>(r.p_), bn_ctx()))
    throw CryptoError("EC_POINT_invert failed");
  return r;
}

bool GroupElement::is_identity() const {
  return EC_POINT_is_at_infinity(curve().group, static_cast<const EC_POINT*>(p_)) == 1;
}

bool GroupElement::operator==(const GroupElement& other) const {
  return EC_POINT_cmp(curve().group, static_cast<const EC_POINT*>(p_),
                      static_cast<const EC_POINT*>(other.p_), bn_ctx()) == 0;
}

// --- hash family -------------------------------------------------------

Hash256 hash(BytesView data) {
  Hash256 out;
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) ||
      len != 32)
    throw CryptoError("SHA-256 failed");
  return out;
}

Hash256 hash_family(std::uint64_t index, BytesView data) {
  wire::Writer w;
  w.u64(index);
  w.raw(data);
  return hash(w.data());
}

namespace {
const char kScalarDomain[] = "claimchain/hash-to-scalar";
const char kGroupDomain[] = "claimchain/hash-to-group";
}  // namespace

Scalar hash_to_scalar(BytesView data) {
  wire::Writer w;
  w.raw(BytesView(reinterpret_cast<const std::uint8_t*>(kScalarDomain), sizeof(kScalarDomain) - 1));
  w.raw(data);
  Hash256 d = hash(w.data());
  return Scalar::reduce_from_bytes(d);
}

GroupElement hash_to_group(BytesView data) {
  for (unsigned counter = 0; counter < 256; ++counter) {
    wire::Writer w;
    w.raw(BytesView(reinterpret_cast<const std::uint8_t*>(kGroupDomain), sizeof(kGroupDomain) - 1));
    w.raw(data);
    w.u8(static_cast<std::uint8_t>(counter));
    Hash256 d = hash(w.data());

    BIGNUM* x = BN_bin2bn(d.data(), 32, nullptr);
    if (!x) throw CryptoError("BN_bin2bn failed");
    if (BN_cmp(x, curve().p) >= 0) {
      BN_free(x);
      continue;
    }
    EC_POINT* raw = EC_POINT_new(curve().group);
    int ok = EC_POINT_set_compressed_coordinates(curve().group, raw, x, 0, bn_ctx());
    BN_free(x);
    if (ok == 1) {
      unsigned char buf[33];
      size_t n = EC_POINT_point2oct(curve().group, raw, POINT_CONVERSION_COMPRESSED, buf,
                                    sizeof buf, bn_ctx());
      EC_POINT_free(raw);
      if (n != 33) throw CryptoError("unexpected point encoding size");
      std::optional<GroupElement> out = GroupElement::from_encoded(BytesView(buf, n));
      if (!out) throw CryptoError("point roundtrip failed");
      return *out;
    }
    EC_POINT_free(raw);
    ERR_clear_error();
  }
  throw CryptoError("hash_to_group exhausted counter space");
}

// --- Pedersen ----------------------------------------------------------

const GroupElement& pedersen_g1() {
  static GroupElement g1 = hash_to_group(to_bytes("claimchain/pedersen/g1"));
  return g1;
}

const GroupElement& pedersen_g2() {
  static GroupElement g2 = hash_to_group(to_bytes("claimchain/pedersen/g2"));
  return g2;
}

GroupElement pedersen_commit(const Scalar& r, const Scalar& m) {
  return pedersen_g1().mul(r).add(pedersen_g2().mul(m));
}

// --- transcripts -------------------------------------------------------

Bytes SpkTranscript::encode() const {
  wire::Writer w;
  w.bytes(statement_tag);
  w.raw(challenge.to_be32());
  w.u32(static_cast<std::uint32_t>(responses.size()));
  for (const Scalar& s : responses) w.raw(s.to_be32());
  return w.take();
}

std::optional<SpkTranscript> SpkTranscript::decode(BytesView b) {
  wire::Reader r(b);
  SpkTranscript t;
  BytesView tag = r.bytes();
  t.statement_tag.assign(tag.begin(), tag.end());
  auto c = Scalar::from_be32(r.raw(32));
  if (!r.ok() || !c) return std::nullopt;
  t.challenge = *c;
  std::uint32_t n = r.u32();
  if (!r.ok() || n > 4096) return std::nullopt;
  t.responses.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto s = Scalar::from_be32(r.raw(32));
    if (!r.ok() || !s) return std::nullopt;
    t.responses.push_back(*s);
  }
  if (!r.at_end()) return std::nullopt;
  return t;
}

bool SpkTranscript::operator==(const SpkTranscript& other) const {
  return statement_tag == other.statement_tag && challenge == other.challenge &&
         responses == other.responses;
}

namespace {

const char kVrfTag[] = "claimchain/spk/vrf";
const char kClaimTag[] = "claimchain/spk/claim";
const char kMembershipTag[] = "claimchain/spk/membership";

Bytes tag_bytes(const char* tag) { return to_bytes(tag); }

}  // namespace

// --- VRF ---------------------------------------------------------------

VrfKeyPair vrf_keygen() {
  Scalar sk = Scalar::random();
  while (sk.is_zero()) sk = Scalar::random();
  return {sk, GroupElement::base_mul(sk)};
}

namespace {

// Challenge for the two-relation discrete-log equality statement
// pk = g^sk, h = B^sk.
Scalar vrf_challenge(const GroupElement& B, const GroupElement& pk, const GroupElement& h,
                     const GroupElement& R_pk, const GroupElement& R_h, BytesView context) {
  wire::Writer w;
  w.bytes(tag_bytes(kVrfTag));
  w.bytes(GroupElement::generator().encode());
  w.bytes(B.encode());
  w.bytes(pk.encode());
  w.bytes(h.encode());
  w.bytes(R_pk.encode());
  w.bytes(R_h.encode());
  w.bytes(context);
  return hash_to_scalar(w.data());
}

}  // namespace

VrfOutput vrf_eval(const Scalar& sk, BytesView m) {
  GroupElement B = hash_to_group(m);
  GroupElement h = B.mul(sk);
  GroupElement pk = GroupElement::base_mul(sk);

  Scalar r = Scalar::random();
  GroupElement R_pk = GroupElement::base_mul(r);
  GroupElement R_h = B.mul(r);
  Scalar c = vrf_challenge(B, pk, h, R_pk, R_h, {});
  Scalar s = r.add(c.mul(sk));

  SpkTranscript t;
  t.statement_tag = tag_bytes(kVrfTag);
  t.challenge = c;
  t.responses = {s};
  return {h, t};
}

bool vrf_verify(const GroupElement& pk, BytesView m, const VrfOutput& out) {
  if (out.proof.statement_tag != tag_bytes(kVrfTag)) return false;
  if (out.proof.responses.size() != 1) return false;
  if (out.h.is_identity() || pk.is_identity()) return false;
  GroupElement B = hash_to_group(m);
  const Scalar& c = out.proof.challenge;
  const Scalar& s = out.proof.responses[0];
  GroupElement R_pk = GroupElement::base_mul(s).add(pk.mul(c).neg());
  GroupElement R_h = B.mul(s).add(out.h.mul(c).neg());
  return vrf_challenge(B, pk, out.h, R_pk, R_h, {}) == c;
}

// --- claim proof -------------------------------------------------------

namespace {

// The commitment conjunct reduces to knowledge of r in
// com * g2^{-digest} = g1^r, proved alongside the two VRF relations
// under one challenge.
Scalar claim_challenge(const ClaimStatement& st, const GroupElement& R_pk,
                       const GroupElement& R_h, const GroupElement& R_com,
                       BytesView context) {
  GroupElement B = hash_to_group(st.vrf_input);
  wire::Writer w;
  w.bytes(tag_bytes(kClaimTag));
  w.bytes(GroupElement::generator().encode());
  w.bytes(B.encode());
  w.bytes(pedersen_g1().encode());
  w.bytes(pedersen_g2().encode());
  w.bytes(st.pk.encode());
  w.bytes(st.h.encode());
  w.bytes(st.com.encode());
  w.raw(st.content_digest.to_be32());
  w.bytes(R_pk.encode());
  w.bytes(R_h.encode());
  w.bytes(R_com.encode());
  w.bytes(context);
  return hash_to_scalar(w.data());
}

}  // namespace

SpkTranscript claim_proof_prove(const Scalar& sk, const Scalar& r,
                                const ClaimStatement& st, BytesView context) {
  GroupElement B = hash_to_group(st.vrf_input);
  Scalar r_sk = Scalar::random();
  Scalar r_r = Scalar::random();
  GroupElement R_pk = GroupElement::base_mul(r_sk);
  GroupElement R_h = B.mul(r_sk);
  GroupElement R_com = pedersen_g1().mul(r_r);
  Scalar c = claim_challenge(st, R_pk, R_h, R_com, context);

  SpkTranscript t;
  t.statement_tag = tag_bytes(kClaimTag);
  t.challenge = c;
  t.responses = {r_sk.add(c.mul(sk)), r_r.add(c.mul(r))};
  return t;
}

bool claim_proof_verify(const ClaimStatement& st, BytesView context,
                        const SpkTranscript& proof) {
  if (proof.statement_tag != tag_bytes(kClaimTag)) return false;
  if (proof.responses.size() != 2) return false;
  if (st.pk.is_identity() || st.h.is_identity()) return false;
  GroupElement B = hash_to_group(st.vrf_input);
  const Scalar& c = proof.challenge;
  const Scalar& s_sk = proof.responses[0];
  const Scalar& s_r = proof.responses[1];

  GroupElement D = st.com.add(pedersen_g2().mul(st.content_digest).neg());
  GroupElement R_pk = GroupElement::base_mul(s_sk).add(st.pk.mul(c).neg());
  GroupElement R_h = B.mul(s_sk).add(st.h.mul(c).neg());
  GroupElement R_com = pedersen_g1().mul(s_r).add(D.mul(c).neg());
  return claim_challenge(st, R_pk, R_h, R_com, context) == c;
}

// --- membership proof --------------------------------------------------

namespace {

Scalar membership_challenge(const GroupElement& com, std::span<const Scalar> allowed,
                            std::span<const GroupElement> commitments) {
  wire::Writer w;
  w.bytes(tag_bytes(kMembershipTag));
  w.bytes(pedersen_g1().encode());
  w.bytes(pedersen_g2().encode());
  w.bytes(com.encode());
  w.u32(static_cast<std::uint32_t>(allowed.size()));
  for (const Scalar& a : allowed) w.raw(a.to_be32());
  for (const GroupElement& R : commitments) w.bytes(R.encode());
  return hash_to_scalar(w.data());
}

GroupElement branch_base(const GroupElement& com, const Scalar& a) {
  // com * g2^{-a}; the branch statement is that this equals g1^r.
  return com.add(pedersen_g2().mul(a).neg());
}

}  // namespace

SpkTranscript membership_prove(const Scalar& r, const Scalar& m, const GroupElement& com,
                               std::span<const Scalar> allowed) {
  size_t n = allowed.size();
  if (n == 0) throw CryptoError("membership proof over empty set");
  size_t witness = n;
  for (size_t j = 0; j < n; ++j) {
    if (allowed[j] == m) {
      witness = j;
      break;
    }
  }
  if (witness == n) throw CryptoError("committed value outside allowed set");

  std::vector<Scalar> cs(n), ss(n);
  std::vector<GroupElement> Rs(n);
  // Simulate every branch except the witness: pick the challenge and
  // response first, then solve for the nonce commitment.
  for (size_t j = 0; j < n; ++j) {
    if (j == witness) continue;
    cs[j] = Scalar::random();
    ss[j] = Scalar::random();
    Rs[j] = pedersen_g1().mul(ss[j]).add(branch_base(com, allowed[j]).mul(cs[j]).neg());
  }
  Scalar rw = Scalar::random();
  Rs[witness] = pedersen_g1().mul(rw);

  Scalar c = membership_challenge(com, allowed, Rs);
  Scalar acc;
  for (size_t j = 0; j < n; ++j) {
    if (j != witness) acc = acc.add(cs[j]);
  }
  cs[witness] = c.sub(acc);
  ss[witness] = rw.add(cs[witness].mul(r));

  SpkTranscript t;
  t.statement_tag = tag_bytes(kMembershipTag);
  t.challenge = c;
  t.responses.reserve(2 * n);
  for (size_t j = 0; j < n; ++j) t.responses.push_back(cs[j]);
  for (size_t j = 0; j < n; ++j) t.responses.push_back(ss[j]);
  return t;
}

bool membership_verify(const GroupElement& com, std::span<const Scalar> allowed,
                       const SpkTranscript& proof) {
  size_t n = allowed.size();
  if (n == 0) return false;
  if (proof.statement_tag != tag_bytes(kMembershipTag)) return false;
  if (proof.responses.size() != 2 * n) return false;

  std::vector<GroupElement> Rs(n);
  Scalar sum;
  for (size_t j = 0; j < n; ++j) {
    const Scalar& cj = proof.responses[j];
    const Scalar& sj = proof.responses[n + j];
    Rs[j] = pedersen_g1().mul(sj).add(branch_base(com, allowed[j]).mul(cj).neg());
    sum = sum.add(cj);
  }
  if (sum != proof.challenge) return false;
  return membership_challenge(com, allowed, Rs) == proof.challenge;
}

// --- AEAD --------------------------------------------------------------

SymmetricKey aead_keygen() {
  SymmetricKey k;
  rng::fill(k);
  return k;
}

Bytes aead_encrypt(const SymmetricKey& key, BytesView plaintext) {
  Bytes out(kAeadNonceSize + plaintext.size() + kAeadTagSize);
  rng::fill(std::span<std::uint8_t>(out.data(), kAeadNonceSize));

  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx) throw CryptoError("cipher ctx alloc failed");
  int len = 0;
  bool ok = EVP_EncryptInit_ex(ctx, EVP_aes_128_gcm(), nullptr, key.data(), out.data()) == 1 &&
            (plaintext.empty() ||
             EVP_EncryptUpdate(ctx, out.data() + kAeadNonceSize, &len, plaintext.data(),
                               static_cast<int>(plaintext.size())) == 1);
  int fin = 0;
  ok = ok && EVP_EncryptFinal_ex(ctx, out.data() + kAeadNonceSize + len, &fin) == 1;
  ok = ok && EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_GET_TAG, kAeadTagSize,
                                 out.data() + kAeadNonceSize + plaintext.size()) == 1;
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) throw CryptoError("AES-GCM encrypt failed");
  return out;
}

std::optional<Bytes> aead_decrypt(const SymmetricKey& key, BytesView box) {
  if (box.size() < kAeadOverhead) return std::nullopt;
  size_t ct_len = box.size() - kAeadOverhead;
  Bytes out(ct_len);

  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx) throw CryptoError("cipher ctx alloc failed");
  int len = 0;
  bool ok = EVP_DecryptInit_ex(ctx, EVP_aes_128_gcm(), nullptr, key.data(), box.data()) == 1 &&
            (ct_len == 0 ||
             EVP_DecryptUpdate(ctx, out.data(), &len, box.data() + kAeadNonceSize,
                               static_cast<int>(ct_len)) == 1);
  std::uint8_t tag[kAeadTagSize];
  std::memcpy(tag, box.data() + kAeadNonceSize + ct_len, kAeadTagSize);
  ok = ok && EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_TAG, kAeadTagSize, tag) == 1;
  int fin = 0;
  ok = ok && EVP_DecryptFinal_ex(ctx, out.data() + len, &fin) == 1;
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) return std::nullopt;
  return out;
}

// --- signatures --------------------------------------------------------

namespace {
const char kSigTag[] = "claimchain/schnorr-sig";

Scalar sig_challenge(const GroupElement& pk, const GroupElement& R, BytesView msg) {
  wire::Writer w;
  w.bytes(tag_bytes(kSigTag));
  w.bytes(GroupElement::generator().encode());
  w.bytes(pk.encode());
  w.bytes(R.encode());
  w.bytes(msg);
  return hash_to_scalar(w.data());
}
}  // namespace

SigKeyPair sig_keygen() {
  Scalar sk = Scalar::random();
  while (sk.is_zero()) sk = Scalar::random();
  return {sk, GroupElement::base_mul(sk)};
}

Bytes sign(const Scalar& sk, BytesView msg) {
  GroupElement pk = GroupElement::base_mul(sk);
  Scalar r = Scalar::random();
  GroupElement R = GroupElement::base_mul(r);
  Scalar c = sig_challenge(pk, R, msg);
  Scalar s = r.add(c.mul(sk));
  Bytes out;
  out.reserve(kSignatureSize);
  auto cb = c.to_be32();
  auto sb = s.to_be32();
  out.insert(out.end(), cb.begin(), cb.end());
  out.insert(out.end(), sb.begin(), sb.end());
  return out;
}

bool verify(const GroupElement& pk, BytesView msg, BytesView sig) {
  if (sig.size() != kSignatureSize) return false;
  if (pk.is_identity()) return false;
  auto c = Scalar::from_be32(sig.subspan(0, 32));
  auto s = Scalar::from_be32(sig.subspan(32, 32));
  if (!c || !s) return false;
  GroupElement R = GroupElement::base_mul(*s).add(pk.mul(*c).neg());
  return sig_challenge(pk, R, msg) == *c;
}

// --- DH ----------------------------------------------------------------

DhKeyPair dh_keygen() {
  Scalar sk = Scalar::random();
  while (sk.is_zero()) sk = Scalar::random();
  return {sk, GroupElement::base_mul(sk)};
}

Bytes dh_shared_secret(const Scalar& sk, const GroupElement& peer) {
  if (peer.is_identity()) throw CryptoError("DH with identity point");
  return peer.mul(sk).encode();
}

}  // namespace claimchain::crypto
