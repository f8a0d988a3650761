#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "claimchain/bytes.hpp"
#include "claimchain/crypto.hpp"
#include "claimchain/merkle.hpp"
#include "claimchain/store.hpp"

// Chain data structures and high-level operations: blocks, encrypted
// claims and capabilities, chain extension and validation, claim
// retrieval by an authorized reader, cross-reference consistency proofs
// and latest-block resolution over gossip evidence.

namespace claimchain::core {

constexpr size_t kBlockNonceSize = 16;
constexpr size_t kLookupKeySize = 8;
constexpr size_t kProofKeySize = 32;
constexpr size_t kDefaultClaimBodySize = 512;

using LookupKey = std::array<std::uint8_t, kLookupKeySize>;
using ProofKey = std::array<std::uint8_t, kProofKeySize>;
using BlockNonce = std::array<std::uint8_t, kBlockNonceSize>;

struct CoreError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ClaimBodyTooLarge : CoreError {
  using CoreError::CoreError;
};
struct MissingClaimForGrant : CoreError {
  using CoreError::CoreError;
};
struct KeyMismatchError : CoreError {
  using CoreError::CoreError;
};
struct CannotProveError : CoreError {
  using CoreError::CoreError;
};

// --- key material ------------------------------------------------------

// A user's long-term secrets.  prev_sig_sk always matches the signature
// key published in the latest block, so the next block can be
// authenticated even after the signing key rotates.
struct KeyRing {
  crypto::SigKeyPair sig;
  crypto::VrfKeyPair vrf;
  crypto::DhKeyPair dh;
  crypto::Scalar prev_sig_sk;
};

KeyRing keyring_generate();

// --- blocks ------------------------------------------------------------

struct BlockPayload {
  std::uint64_t index = 0;
  BlockNonce nonce{};
  Bytes pk_sig;       // encoded group elements
  Bytes pk_vrf;
  Bytes pk_dh;
  Bytes public_data;  // owner's application payload, e.g. an encryption key
  merkle::MapRoot map_root{};
};

struct Block {
  BlockPayload payload;
  Hash256 ptr{};  // hash of the previous block, zero for genesis
  Bytes sigma;

  Bytes encode() const;
  static std::optional<Block> decode(BytesView b);
  // Preimage covered by the signature: payload and pointer, not sigma.
  Bytes signing_preimage() const;
  Hash256 hash() const;
  bool is_genesis() const { return payload.index == 0; }
};

// --- claim bodies ------------------------------------------------------

// Bodies are padded to a fixed envelope before encryption so ciphertext
// length reveals nothing about content.
Bytes pad_claim_body(BytesView raw, size_t envelope_size = kDefaultClaimBodySize);
std::optional<Bytes> unpad_claim_body(BytesView padded);

// --- encrypted claims --------------------------------------------------

struct ClaimSecrets {
  crypto::Scalar r;          // commitment randomness
  crypto::GroupElement h;    // VRF value for label under the block nonce
  crypto::SymmetricKey k;    // content encryption key
  ProofKey t;                // proof context key
};

struct EncodedClaim {
  LookupKey lookup_key{};
  Bytes ciphertext;                 // AEAD box over proof || padded body
  crypto::GroupElement commitment;  // opens to the hash of the ciphertext-bound content

  // Serialized map value: ciphertext and commitment.
  Bytes map_value() const;
  static std::optional<EncodedClaim> from_map_value(const LookupKey& key, BytesView value);
};

struct EncClaimResult {
  ClaimSecrets secrets;
  EncodedClaim encoded;
};

// Encrypts one claim body under fresh randomness.  The body must already
// be padded to the common envelope size.
EncClaimResult enc_claim(const crypto::Scalar& sk_vrf, BytesView label, BytesView padded_body,
                         const BlockNonce& nonce);

enum class DecodeStatus { Ok, Reject };

struct DecClaimResult {
  DecodeStatus status = DecodeStatus::Reject;
  Bytes padded_body;
};

// Decrypts and verifies a claim found in a block map.  Any verification
// failure (bad AEAD tag, bad proof, commitment mismatch) yields Reject.
DecClaimResult dec_claim(const crypto::GroupElement& pk_vrf, BytesView label,
                         const crypto::GroupElement& h, const crypto::SymmetricKey& k,
                         const ProofKey& t, BytesView claim_map_value,
                         const BlockNonce& nonce);

// --- capabilities ------------------------------------------------------

struct CapabilityEntry {
  LookupKey lookup_key{};
  Bytes ciphertext;
};

CapabilityEntry enc_cap(const crypto::Scalar& sk_dh_owner,
                        const crypto::GroupElement& pk_dh_reader, BytesView label,
                        const ClaimSecrets& secrets, const BlockNonce& nonce);

struct DecCapResult {
  bool ok = false;
  crypto::GroupElement h;
  crypto::SymmetricKey k{};
  ProofKey t{};
};

DecCapResult dec_cap(const crypto::Scalar& sk_dh_reader,
                     const crypto::GroupElement& pk_dh_owner, BytesView label,
                     BytesView cap_map_value, const BlockNonce& nonce);

// Lookup key derivations, exposed for direct map queries.
LookupKey claim_lookup_key(const crypto::GroupElement& h);
LookupKey cap_lookup_key(BytesView shared_secret, BytesView label, const BlockNonce& nonce);
crypto::SymmetricKey cap_encryption_key(BytesView shared_secret, BytesView label,
                                        const BlockNonce& nonce);

// --- chain extension ---------------------------------------------------

struct Claim {
  Bytes label;
  Bytes body;  // raw, padded internally
};

struct Grant {
  crypto::GroupElement reader_pk_dh;
  Bytes label;
};

// Secrets retained by the owner for every claim she has encoded, keyed by
// label and block index.  Needed later to prove consistency.
struct ClaimRecord {
  Bytes label;
  Bytes padded_body;
  crypto::Scalar r;
  crypto::GroupElement h;
  crypto::SymmetricKey k{};
  ProofKey t{};
  std::uint64_t block_index = 0;
};

struct ExtendResult {
  Hash256 head{};
  Block block;
  std::vector<ClaimRecord> records;
};

// Builds, signs and stores the next block.  prev is the current head
// (nullopt for genesis).  The keyring's prev_sig_sk must match the
// signature key announced in the previous block; on success the caller
// should advance prev_sig_sk to the signing key just announced.
ExtendResult extend_chain(BytesView public_data, const std::vector<Claim>& claims,
                          const std::vector<Grant>& grants, const KeyRing& keyring,
                          const std::optional<Hash256>& prev, store::ContentStore& s,
                          size_t body_envelope_size = kDefaultClaimBodySize);

// --- validation --------------------------------------------------------

struct ValidationReport {
  bool ok = true;
  size_t failed_pos = 0;  // position in the input span
  std::string reason;
};

// Checks a contiguous chain segment.  The first block is the caller's
// trust anchor; if it is a genesis block its self-signature is checked
// too.  Each later block must be signed by the key announced in its
// predecessor, point at the predecessor's hash, and increment the index
// by exactly one.
ValidationReport validate_blocks(std::span<const Block> chain);

// --- claim retrieval ---------------------------------------------------

enum class GetClaimStatus {
  Found,     // body returned
  NotFound,  // some lookup missed: no capability, no claim, missing data
  Rejected   // data present but verification failed
};

struct GetClaimResult {
  GetClaimStatus status = GetClaimStatus::NotFound;
  Bytes body;  // raw body, envelope stripped
};

GetClaimResult get_claim(const crypto::Scalar& sk_dh_reader, BytesView label,
                         const Hash256& head, const store::ContentStore& s);

// --- cross-reference consistency ---------------------------------------

struct ConsistencyEntry {
  std::uint64_t block_index = 0;
  crypto::GroupElement h;
  crypto::SpkTranscript vrf_proof;
  bool has_claim = false;
  // present when has_claim
  crypto::SpkTranscript membership_proof;
  Bytes claim_map_value;
  // resolution path for the claim lookup key in that block's map
  merkle::ResolutionPath path;
};

struct ConsistencyProof {
  std::vector<ConsistencyEntry> entries;

  Bytes encode() const;
  static std::optional<ConsistencyProof> decode(BytesView b);
  size_t byte_size() const { return encode().size(); }
};

// Scalar committed for a claim whose body is the serialized block bytes;
// prover and verifier both derive allowed-set digests with this.
crypto::Scalar reference_digest(BytesView block_bytes,
                                size_t body_envelope_size = kDefaultClaimBodySize);

// Proves that every claim under the label in the given own blocks opens
// to one of the allowed serialized blocks, revealing neither which one
// nor, for blocks without the claim, anything at all.  Throws
// CannotProveError when some committed body is outside the allowed set.
ConsistencyProof prove_consistency(const KeyRing& keyring, BytesView label,
                                   std::span<const Block> own_blocks,
                                   std::span<const Bytes> allowed_blocks,
                                   std::span<const ClaimRecord> records,
                                   const store::ContentStore& s,
                                   size_t body_envelope_size = kDefaultClaimBodySize);

struct ConsistencyVerdict {
  bool ok = true;
  std::uint64_t failed_index = 0;
  std::string reason;
};

ConsistencyVerdict check_consistency(BytesView label, std::span<const Block> own_blocks,
                                     std::span<const Bytes> allowed_blocks,
                                     const ConsistencyProof& proof,
                                     size_t body_envelope_size = kDefaultClaimBodySize);

// --- latest-block resolution -------------------------------------------

struct ForkEvidence {
  Hash256 a{};
  Hash256 b{};
  std::uint64_t index = 0;
};

struct ResolveOutcome {
  enum class Kind { Empty, Chosen, Conflict };
  Kind kind = Kind::Empty;
  std::optional<Block> chosen;
  size_t diversity = 0;  // distinct evidence blocks considered
  std::vector<ForkEvidence> forks;
};

// Picks the highest-index block when all evidence lies on one chain;
// reports a conflict when two blocks provably fork or cannot be related
// through the store.
ResolveOutcome resolve_latest(const std::vector<Block>& evidence,
                              const store::ContentStore& s);

}  // namespace claimchain::core
