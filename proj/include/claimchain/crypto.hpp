#pragma once

#include <array>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "claimchain/bytes.hpp"

// Cryptographic primitives over secp256k1: group and scalar arithmetic,
// the indexed hash family, Pedersen commitments, a VRF with a discrete-log
// equality proof, the three-relation claim proof, an OR-composition
// membership proof, AES-128-GCM, Schnorr signatures and static DH.
//
// Group elements serialize as 33-byte SEC1 compressed points, scalars as
// 32-byte big-endian integers.  Fiat-Shamir challenges hash a transcript
// built from length-prefixed fields in a fixed order: statement tag,
// generators, statement bases, public points, nonce commitments, context.

namespace claimchain::crypto {

struct CryptoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic randomness hook.  Production code draws from the system
// CSPRNG; tests and the simulator can install a seeded stream so whole
// runs replay bit-for-bit.  The engine is thread-local.
namespace rng {
void fill(std::span<std::uint8_t> out);
void seed_for_testing(std::uint64_t seed);
void use_system();
}  // namespace rng

class Scalar {
 public:
  Scalar();                      // zero
  Scalar(const Scalar& other);
  Scalar(Scalar&& other) noexcept;
  Scalar& operator=(const Scalar& other);
  Scalar& operator=(Scalar&& other) noexcept;
  ~Scalar();

  static Scalar from_u64(std::uint64_t v);
  static Scalar random();       // uniform nonzero excluded? zero allowed, uniform mod q
  // Strict decode: rejects values >= q.
  static std::optional<Scalar> from_be32(BytesView b);
  // Wide reduction of arbitrary bytes mod q.
  static Scalar reduce_from_bytes(BytesView b);

  std::array<std::uint8_t, 32> to_be32() const;

  Scalar add(const Scalar& other) const;
  Scalar sub(const Scalar& other) const;
  Scalar mul(const Scalar& other) const;
  Scalar neg() const;
  Scalar invert() const;        // throws CryptoError on zero
  bool is_zero() const;
  bool operator==(const Scalar& other) const;
  bool operator!=(const Scalar& other) const { return !(*this == other); }

  // Opaque handle used by GroupElement; BIGNUM under the hood.
  void* handle() const { return n_; }

 private:
  explicit Scalar(void* n) : n_(n) {}
  void* n_;
  friend class GroupElement;
};

class GroupElement {
 public:
  GroupElement();               // identity
  GroupElement(const GroupElement& other);
  GroupElement(GroupElement&& other) noexcept;
  GroupElement& operator=(const GroupElement& other);
  GroupElement& operator=(GroupElement&& other) noexcept;
  ~GroupElement();

  static GroupElement generator();
  static GroupElement base_mul(const Scalar& k);     // g^k
  static std::optional<GroupElement> from_encoded(BytesView b);

  Bytes encode() const;         // 33 bytes compressed (1 byte 0x00 for identity)
  GroupElement add(const GroupElement& other) const;
  GroupElement mul(const Scalar& k) const;           // this^k
  GroupElement neg() const;
  bool is_identity() const;
  bool operator==(const GroupElement& other) const;
  bool operator!=(const GroupElement& other) const { return !(*this == other); }

 private:
  explicit GroupElement(void* p) : p_(p) {}
  void* p_;
};

// --- hash family ------------------------------------------------------

// Base hash, SHA-256.  Used for content-store keys and block hashes.
Hash256 hash(BytesView data);

// Indexed family H_i(x) = SHA-256(index as 8-byte little-endian || x).
// Index 1 derives claim lookup keys, 2 claim encryption keys, 3 capability
// lookup keys, 4 capability encryption keys.
Hash256 hash_family(std::uint64_t index, BytesView data);

// Hash onto scalars: SHA-256 with a domain prefix, reduced mod the group
// order.  The reduction bias is below 2^-127 for this curve.
Scalar hash_to_scalar(BytesView data);

// Hash onto the group by try-and-increment: a one-byte counter is appended
// to the input until the digest is the x-coordinate of a curve point (the
// even-y point is taken).  Never returns the identity.
GroupElement hash_to_group(BytesView data);

// --- Pedersen commitments ---------------------------------------------

// Fixed generators derived by hashing the strings
// "claimchain/pedersen/g1" and "claimchain/pedersen/g2" onto the curve,
// so nobody knows their relative discrete logarithm.
const GroupElement& pedersen_g1();
const GroupElement& pedersen_g2();

// Com(r, m) = g1^r * g2^m
GroupElement pedersen_commit(const Scalar& r, const Scalar& m);

// --- proof transcripts -------------------------------------------------

// Non-interactive sigma-protocol transcript: the statement tag names the
// proved relation and is bound into the challenge hash.
struct SpkTranscript {
  Bytes statement_tag;
  Scalar challenge;
  std::vector<Scalar> responses;

  Bytes encode() const;
  static std::optional<SpkTranscript> decode(BytesView b);
  bool operator==(const SpkTranscript& other) const;
};

// --- VRF ---------------------------------------------------------------

struct VrfKeyPair {
  Scalar sk;
  GroupElement pk;
};

VrfKeyPair vrf_keygen();

struct VrfOutput {
  GroupElement h;               // H_G(m)^sk
  SpkTranscript proof;          // knowledge of sk with pk = g^sk and h = H_G(m)^sk
};

VrfOutput vrf_eval(const Scalar& sk, BytesView m);
bool vrf_verify(const GroupElement& pk, BytesView m, const VrfOutput& out);

// --- claim proof -------------------------------------------------------

// Statement proved when a claim is encoded: the claim's VRF value was
// computed under the chain owner's key, and the commitment in the clear
// opens to the hash of the encrypted content.  Witnesses are the VRF
// secret key and the commitment randomness.
struct ClaimStatement {
  GroupElement pk;              // VRF public key
  Bytes vrf_input;              // label || nonce
  GroupElement h;               // VRF value
  GroupElement com;             // Pedersen commitment
  Scalar content_digest;        // committed scalar
};

SpkTranscript claim_proof_prove(const Scalar& sk, const Scalar& r,
                                const ClaimStatement& st, BytesView context);
bool claim_proof_verify(const ClaimStatement& st, BytesView context,
                        const SpkTranscript& proof);

// --- membership proof --------------------------------------------------

// OR-composition proving a commitment opens to one of the listed scalars
// without revealing which.  Transcript responses hold the per-branch
// challenges followed by the per-branch responses.
SpkTranscript membership_prove(const Scalar& r, const Scalar& m,
                               const GroupElement& com,
                               std::span<const Scalar> allowed);
bool membership_verify(const GroupElement& com, std::span<const Scalar> allowed,
                       const SpkTranscript& proof);

// --- authenticated encryption -----------------------------------------

constexpr size_t kSymmetricKeySize = 16;
constexpr size_t kAeadNonceSize = 12;
constexpr size_t kAeadTagSize = 16;
constexpr size_t kAeadOverhead = kAeadNonceSize + kAeadTagSize;

using SymmetricKey = std::array<std::uint8_t, kSymmetricKeySize>;

SymmetricKey aead_keygen();
// Output layout: nonce || ciphertext || tag.  Length = plaintext + 28.
Bytes aead_encrypt(const SymmetricKey& key, BytesView plaintext);
// Authentication failure is a value, not an exception.
std::optional<Bytes> aead_decrypt(const SymmetricKey& key, BytesView box);

// --- signatures --------------------------------------------------------

struct SigKeyPair {
  Scalar sk;
  GroupElement pk;
};

SigKeyPair sig_keygen();
// Schnorr over the same group; signature is challenge || response, 64 bytes.
Bytes sign(const Scalar& sk, BytesView msg);
bool verify(const GroupElement& pk, BytesView msg, BytesView sig);

constexpr size_t kSignatureSize = 64;

// --- Diffie-Hellman ----------------------------------------------------

struct DhKeyPair {
  Scalar sk;
  GroupElement pk;
};

DhKeyPair dh_keygen();
// Compressed encoding of peer^sk; both sides derive the same 33 bytes.
Bytes dh_shared_secret(const Scalar& sk, const GroupElement& peer);

}  // namespace claimchain::crypto
