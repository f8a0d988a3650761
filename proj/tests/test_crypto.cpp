#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "claimchain/crypto.hpp"

using namespace claimchain;
using namespace claimchain::crypto;

namespace {

std::string hex_of(BytesView b) { return hex_encode(b); }

}  // namespace

// Expected values below were computed with an independent big-integer
// implementation of the curve and hash constructions.

TEST_CASE("indexed hash family matches reference values") {
  CHECK(hex_of(hash_family(1, to_bytes("abc"))) ==
        "22a5c7045bc36a32e64f063ff4e7946d8a663238bf27e4f5b32713d987ec51ac");
  CHECK(hex_of(hash_family(2, to_bytes("abc"))) ==
        "6d38234db36d6dcc6ff6702b434e13bcdad84fa7a0aed399b15b83a5fe49d721");
  CHECK(hex_of(hash_family(1, {})) ==
        "7c9fa136d4413fa6173637e883b6998d32e1d675f88cddff9dcbcf331820f4b8");
  CHECK(hex_of(hash_family(4, to_bytes("claimchain"))) ==
        "6682956df304b15d5365573235e8448b4a0eb11d9840c4edf2568d693b857ccd");
}

TEST_CASE("hash family indices separate domains") {
  Bytes data = to_bytes("same input");
  std::set<std::string> outs;
  for (std::uint64_t i = 1; i <= 4; ++i) outs.insert(hex_of(hash_family(i, data)));
  CHECK(outs.size() == 4);
}

TEST_CASE("hash_to_scalar matches reference values and stays in range") {
  auto s1 = hash_to_scalar(to_bytes("abc"));
  CHECK(hex_of(s1.to_be32()) ==
        "3709ac49495341793465da177ec5905e67b868a24b606daa87afa0c8dba463ec");
  auto s2 = hash_to_scalar({});
  CHECK(hex_of(s2.to_be32()) ==
        "27043a1d71b3bc3add6784304fd29833602194425e56e54710fff3fd06a9d899");
  // from_be32 accepts every produced value, so they are all below the order
  for (int i = 0; i < 200; ++i) {
    Bytes in = {static_cast<std::uint8_t>(i), 0x55};
    auto s = hash_to_scalar(in);
    CHECK(Scalar::from_be32(s.to_be32()).has_value());
  }
}

TEST_CASE("hash_to_group matches reference values") {
  CHECK(hex_of(hash_to_group(to_bytes("claimchain/pedersen/g1")).encode()) ==
        "02963892e110765ce4b00272f15db2ad26f491ed9f1e03d872de2809a9a0dfd90f");
  CHECK(hex_of(hash_to_group(to_bytes("claimchain/pedersen/g2")).encode()) ==
        "02b41c950881b98040554ac63e38124937f4df06936f019f589a4eef4ae2fc6060");
  CHECK(hex_of(hash_to_group(to_bytes("abc")).encode()) ==
        "023f8bb523ffef0960eaeaa36fbe2e9674d326dc7a1a4e9215aab491d07d2f353a");
  // needs two increments before hitting the curve
  CHECK(hex_of(hash_to_group(to_bytes("hello world")).encode()) ==
        "02d045a59ec9a1f7cd4b4906824fc93b90e454d1d9c2fc90cf44efc9688038e7b1");
}

TEST_CASE("hash_to_group never yields identity and rarely collides") {
  std::set<std::string> seen;
  for (int i = 0; i < 10000; ++i) {
    wire::Writer w;
    w.u32(static_cast<std::uint32_t>(i));
    GroupElement g = hash_to_group(w.data());
    CHECK_FALSE(g.is_identity());
    seen.insert(hex_of(g.encode()));
  }
  CHECK(seen.size() == 10000);
}

TEST_CASE("scalar arithmetic behaves like integers mod the order") {
  Scalar a = Scalar::from_u64(123456789);
  Scalar b = Scalar::from_u64(987654321);
  CHECK(a.add(b) == b.add(a));
  CHECK(a.mul(b) == b.mul(a));
  CHECK(a.sub(a).is_zero());
  CHECK(a.add(a.neg()).is_zero());
  Scalar inv = b.invert();
  CHECK(b.mul(inv) == Scalar::from_u64(1));
  CHECK_THROWS_AS(Scalar().invert(), CryptoError);
}

TEST_CASE("scalar strict decode rejects out-of-range values") {
  Bytes all_ff(32, 0xff);
  CHECK_FALSE(Scalar::from_be32(all_ff).has_value());
  Bytes zero(32, 0x00);
  auto z = Scalar::from_be32(zero);
  REQUIRE(z.has_value());
  CHECK(z->is_zero());
  CHECK_FALSE(Scalar::from_be32(Bytes(31, 0)).has_value());
}

TEST_CASE("group exponent laws hold") {
  Scalar a = Scalar::from_u64(1234);
  Scalar b = Scalar::from_u64(5678);
  GroupElement ga = GroupElement::base_mul(a);
  GroupElement gb = GroupElement::base_mul(b);
  CHECK(ga.add(gb) == GroupElement::base_mul(a.add(b)));
  CHECK(ga.mul(b) == GroupElement::base_mul(a.mul(b)));
  CHECK(ga.add(ga.neg()).is_identity());
}

TEST_CASE("group element encoding round trips") {
  Scalar k = Scalar::random();
  GroupElement g = GroupElement::base_mul(k);
  Bytes enc = g.encode();
  CHECK(enc.size() == 33);
  auto back = GroupElement::from_encoded(enc);
  REQUIRE(back.has_value());
  CHECK(*back == g);

  GroupElement id;
  Bytes idb = id.encode();
  CHECK(idb.size() == 1);
  auto idback = GroupElement::from_encoded(idb);
  REQUIRE(idback.has_value());
  CHECK(idback->is_identity());

  Bytes junk(33, 0xAB);
  CHECK_FALSE(GroupElement::from_encoded(junk).has_value());
}

TEST_CASE("pedersen commitment matches reference value") {
  GroupElement com = pedersen_commit(Scalar::from_u64(3), Scalar::from_u64(5));
  CHECK(hex_of(com.encode()) ==
        "0207ed940109414d39339f31623404359d332bdb8cee53d5daa30895c2984e36d2");
}

TEST_CASE("pedersen commitment of zeros is the identity") {
  CHECK(pedersen_commit(Scalar(), Scalar()).is_identity());
}

TEST_CASE("pedersen commitments are homomorphic") {
  Scalar r1 = Scalar::random(), m1 = Scalar::random();
  Scalar r2 = Scalar::random(), m2 = Scalar::random();
  CHECK(pedersen_commit(r1, m1).add(pedersen_commit(r2, m2)) ==
        pedersen_commit(r1.add(r2), m1.add(m2)));
}

TEST_CASE("randomized search finds no second opening") {
  // 10^4 random openings, bucketed by encoded commitment; any collision
  // with different (r, m) would break binding.
  std::map<std::string, std::pair<std::string, std::string>> seen;
  for (int i = 0; i < 10000; ++i) {
    Scalar r = Scalar::random();
    Scalar m = Scalar::random();
    std::string key = hex_of(pedersen_commit(r, m).encode());
    std::string rs = hex_of(r.to_be32());
    std::string ms = hex_of(m.to_be32());
    auto it = seen.find(key);
    if (it != seen.end()) {
      CHECK(it->second.first == rs);
      CHECK(it->second.second == ms);
    }
    seen[key] = {rs, ms};
  }
  CHECK(seen.size() == 10000);
}

TEST_CASE("vrf value is deterministic and matches reference") {
  Scalar sk = Scalar::from_u64(7);
  VrfOutput a = vrf_eval(sk, to_bytes("vrf input"));
  VrfOutput b = vrf_eval(sk, to_bytes("vrf input"));
  CHECK(a.h == b.h);
  CHECK(hex_of(a.h.encode()) ==
        "02253083c480aff1ed335cc091ead1e69665ef5b4f2978e63680dc44d5f5e354c9");
  // proofs use fresh randomness but both verify
  GroupElement pk = GroupElement::base_mul(sk);
  CHECK(vrf_verify(pk, to_bytes("vrf input"), a));
  CHECK(vrf_verify(pk, to_bytes("vrf input"), b));
}

TEST_CASE("vrf rejects wrong key, wrong input and mutated transcripts") {
  VrfKeyPair kp = vrf_keygen();
  Bytes m = to_bytes("label|nonce");
  VrfOutput out = vrf_eval(kp.sk, m);
  REQUIRE(vrf_verify(kp.pk, m, out));

  VrfKeyPair other = vrf_keygen();
  CHECK_FALSE(vrf_verify(other.pk, m, out));
  CHECK_FALSE(vrf_verify(kp.pk, to_bytes("label|nonce2"), out));

  VrfOutput bad_h = out;
  bad_h.h = out.h.add(GroupElement::generator());
  CHECK_FALSE(vrf_verify(kp.pk, m, bad_h));

  VrfOutput bad_c = out;
  bad_c.proof.challenge = out.proof.challenge.add(Scalar::from_u64(1));
  CHECK_FALSE(vrf_verify(kp.pk, m, bad_c));

  VrfOutput bad_s = out;
  bad_s.proof.responses[0] = out.proof.responses[0].add(Scalar::from_u64(1));
  CHECK_FALSE(vrf_verify(kp.pk, m, bad_s));

  VrfOutput bad_tag = out;
  bad_tag.proof.statement_tag = to_bytes("claimchain/spk/other");
  CHECK_FALSE(vrf_verify(kp.pk, m, bad_tag));
}

TEST_CASE("vrf values for distinct inputs differ") {
  VrfKeyPair kp = vrf_keygen();
  std::set<std::string> hs;
  for (int i = 0; i < 64; ++i) {
    wire::Writer w;
    w.u32(static_cast<std::uint32_t>(i));
    hs.insert(hex_of(vrf_eval(kp.sk, w.data()).h.encode()));
  }
  CHECK(hs.size() == 64);
}

TEST_CASE("claim proof verifies and resists tampering of every input") {
  VrfKeyPair kp = vrf_keygen();
  Bytes input = to_bytes("some-label|some-nonce");
  GroupElement h = hash_to_group(input).mul(kp.sk);
  Scalar r = Scalar::random();
  Scalar digest = hash_to_scalar(to_bytes("content"));
  GroupElement com = pedersen_commit(r, digest);
  Bytes ctx = to_bytes("proof context key");

  ClaimStatement st{kp.pk, input, h, com, digest};
  SpkTranscript proof = claim_proof_prove(kp.sk, r, st, ctx);
  CHECK(claim_proof_verify(st, ctx, proof));

  ClaimStatement wrong_pk = st;
  wrong_pk.pk = vrf_keygen().pk;
  CHECK_FALSE(claim_proof_verify(wrong_pk, ctx, proof));

  ClaimStatement wrong_h = st;
  wrong_h.h = h.add(GroupElement::generator());
  CHECK_FALSE(claim_proof_verify(wrong_h, ctx, proof));

  ClaimStatement wrong_com = st;
  wrong_com.com = com.add(GroupElement::generator());
  CHECK_FALSE(claim_proof_verify(wrong_com, ctx, proof));

  ClaimStatement wrong_digest = st;
  wrong_digest.content_digest = digest.add(Scalar::from_u64(1));
  CHECK_FALSE(claim_proof_verify(wrong_digest, ctx, proof));

  ClaimStatement wrong_input = st;
  wrong_input.vrf_input = to_bytes("other-label|some-nonce");
  CHECK_FALSE(claim_proof_verify(wrong_input, ctx, proof));

  CHECK_FALSE(claim_proof_verify(st, to_bytes("other context"), proof));

  SpkTranscript mutated = proof;
  mutated.responses[1] = proof.responses[1].add(Scalar::from_u64(1));
  CHECK_FALSE(claim_proof_verify(st, ctx, mutated));
}

TEST_CASE("membership proof works for every witness position") {
  Scalar r = Scalar::random();
  std::vector<Scalar> allowed;
  for (int i = 0; i < 5; ++i) {
    Bytes one = {static_cast<std::uint8_t>(i)};
    allowed.push_back(hash_to_scalar(one));
  }

  for (size_t w = 0; w < allowed.size(); ++w) {
    GroupElement com = pedersen_commit(r, allowed[w]);
    SpkTranscript proof = membership_prove(r, allowed[w], com, allowed);
    CHECK(proof.responses.size() == 2 * allowed.size());
    CHECK(membership_verify(com, allowed, proof));
  }
}

TEST_CASE("membership proof over a singleton set") {
  Scalar r = Scalar::random();
  Scalar m = hash_to_scalar(to_bytes("only"));
  std::vector<Scalar> allowed = {m};
  GroupElement com = pedersen_commit(r, m);
  SpkTranscript proof = membership_prove(r, m, com, allowed);
  CHECK(membership_verify(com, allowed, proof));
}

TEST_CASE("membership prover refuses values outside the set") {
  Scalar r = Scalar::random();
  Scalar m = hash_to_scalar(to_bytes("outsider"));
  std::vector<Scalar> allowed = {hash_to_scalar(to_bytes("a")), hash_to_scalar(to_bytes("b"))};
  GroupElement com = pedersen_commit(r, m);
  CHECK_THROWS_AS(membership_prove(r, m, com, allowed), CryptoError);
}

TEST_CASE("membership verification rejects tampering") {
  Scalar r = Scalar::random();
  std::vector<Scalar> allowed = {hash_to_scalar(to_bytes("a")), hash_to_scalar(to_bytes("b")),
                                 hash_to_scalar(to_bytes("c"))};
  GroupElement com = pedersen_commit(r, allowed[1]);
  SpkTranscript proof = membership_prove(r, allowed[1], com, allowed);
  REQUIRE(membership_verify(com, allowed, proof));

  // commitment to a value outside the allowed set, proof replayed
  GroupElement other = pedersen_commit(r, hash_to_scalar(to_bytes("z")));
  CHECK_FALSE(membership_verify(other, allowed, proof));

  // shrunk allowed set changes the statement
  std::vector<Scalar> shrunk = {allowed[0], allowed[1]};
  CHECK_FALSE(membership_verify(com, shrunk, proof));

  // flipped branch challenge breaks the challenge sum
  SpkTranscript bad = proof;
  bad.responses[0] = bad.responses[0].add(Scalar::from_u64(1));
  CHECK_FALSE(membership_verify(com, allowed, bad));

  // flipped branch response breaks the branch equation
  SpkTranscript bad2 = proof;
  bad2.responses[3] = bad2.responses[3].add(Scalar::from_u64(1));
  CHECK_FALSE(membership_verify(com, allowed, bad2));

  CHECK_FALSE(membership_verify(com, {}, proof));
}

TEST_CASE("spk transcripts round trip through their encoding") {
  SpkTranscript t;
  t.statement_tag = to_bytes("claimchain/spk/vrf");
  t.challenge = Scalar::random();
  t.responses = {Scalar::random(), Scalar::random()};
  Bytes enc = t.encode();
  auto back = SpkTranscript::decode(enc);
  REQUIRE(back.has_value());
  CHECK(*back == t);

  Bytes truncated(enc.begin(), enc.end() - 1);
  CHECK_FALSE(SpkTranscript::decode(truncated).has_value());
  Bytes extended = enc;
  extended.push_back(0);
  CHECK_FALSE(SpkTranscript::decode(extended).has_value());
}

TEST_CASE("aead round trips and rejects tampering") {
  SymmetricKey k = aead_keygen();
  Bytes msg = to_bytes("the quick brown fox");
  Bytes box = aead_encrypt(k, msg);
  CHECK(box.size() == msg.size() + kAeadOverhead);

  auto open = aead_decrypt(k, box);
  REQUIRE(open.has_value());
  CHECK(*open == msg);

  for (size_t i = 0; i < box.size(); i += 7) {
    Bytes dam = box;
    dam[i] ^= 0x01;
    CHECK_FALSE(aead_decrypt(k, dam).has_value());
  }

  SymmetricKey other = aead_keygen();
  CHECK_FALSE(aead_decrypt(other, box).has_value());
  CHECK_FALSE(aead_decrypt(k, Bytes(10, 0)).has_value());
}

TEST_CASE("aead hides plaintext length only up to padding") {
  SymmetricKey k = aead_keygen();
  Bytes a = aead_encrypt(k, Bytes(512, 0x00));
  Bytes b = aead_encrypt(k, Bytes(512, 0xff));
  CHECK(a.size() == b.size());
  CHECK(a != b);  // fresh nonce
}

TEST_CASE("signature vector derived from the seeded generator") {
  rng::seed_for_testing(42);
  SigKeyPair kp = sig_keygen();
  CHECK(hex_of(kp.sk.to_be32()) ==
        "be9549d771ed685ad1dc6205fc66e4e0fd8be67974497f83530d5fd36a287288");
  CHECK(hex_of(kp.pk.encode()) ==
        "038d2870c7ffb51bbcdb1e2363398c3677c961dc21cd9010a67254038ebd928188");
  Bytes sig = sign(kp.sk, to_bytes("claimchain test message"));
  CHECK(hex_of(sig) ==
        "3371c0765b44f83a975f7e9d59b6fc0905ec7ccf6446da82025f09cfe7ac7652"
        "c9cbd87f1644c05eb0503d8a569f2b6f99b9cda3594c5cd38fb932b6ad15c387");
  CHECK(verify(kp.pk, to_bytes("claimchain test message"), sig));
  rng::use_system();
}

TEST_CASE("seeded generator replays the same stream") {
  rng::seed_for_testing(7);
  std::array<std::uint8_t, 16> a{};
  rng::fill(a);
  CHECK(hex_of(a) == "3e5ac1b5ddd49e14441d5ebd38ed37f4");
  rng::seed_for_testing(7);
  std::array<std::uint8_t, 16> b{};
  rng::fill(b);
  CHECK(a == b);
  rng::use_system();
}

TEST_CASE("signatures verify and tampering is caught") {
  SigKeyPair kp = sig_keygen();
  Bytes msg = to_bytes("message to sign");
  Bytes sig = sign(kp.sk, msg);
  CHECK(sig.size() == kSignatureSize);
  CHECK(verify(kp.pk, msg, sig));

  Bytes other = to_bytes("message to sing");
  CHECK_FALSE(verify(kp.pk, other, sig));

  for (size_t i = 0; i < sig.size(); i += 5) {
    Bytes dam = sig;
    dam[i] ^= 0x01;
    CHECK_FALSE(verify(kp.pk, msg, dam));
  }
  CHECK_FALSE(verify(sig_keygen().pk, msg, sig));
  CHECK_FALSE(verify(kp.pk, msg, Bytes(10, 0)));
}

TEST_CASE("dh shared secrets agree and match the reference") {
  Scalar a = Scalar::from_u64(11);
  Scalar b = Scalar::from_u64(13);
  GroupElement A = GroupElement::base_mul(a);
  GroupElement B = GroupElement::base_mul(b);
  Bytes s1 = dh_shared_secret(a, B);
  Bytes s2 = dh_shared_secret(b, A);
  CHECK(s1 == s2);
  CHECK(hex_of(s1) == "02a0b1cae06b0a847a3fea6e671aaf8adfdfe58ca2f768105c8082b2e449fce252");

  DhKeyPair x = dh_keygen();
  DhKeyPair y = dh_keygen();
  CHECK(dh_shared_secret(x.sk, y.pk) == dh_shared_secret(y.sk, x.pk));
  CHECK(dh_shared_secret(x.sk, y.pk) != dh_shared_secret(x.sk, dh_keygen().pk));
}
