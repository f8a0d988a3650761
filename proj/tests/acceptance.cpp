#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "claimchain/bench.hpp"
#include "claimchain/core.hpp"
#include "claimchain/crypto.hpp"
#include "claimchain/merkle.hpp"
#include "claimchain/sim.hpp"
#include "claimchain/store.hpp"

// Release gate.  Each criterion prints exactly one [PASS]/[FAIL] line
// with its measured numbers; the process exits 0 only when every
// selected criterion passes.  Thresholds are pinned here as constants.
//
//   ./acceptance          run all nine
//   ./acceptance 3 8      run a subset

namespace cc = claimchain;
namespace fs = std::filesystem;
using cc::Bytes;
using cc::BytesView;
using cc::Hash256;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Bytes random_bytes(std::mt19937_64& g, size_t n) {
  Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(g());
  return b;
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

// --- criterion 1: unique resolution under adversarial stores -----------

constexpr size_t kC1Mutations = 10000;
constexpr double kC1BudgetSeconds = 120.0;

bool c1_unique_resolution(std::string& detail) {
  cc::crypto::rng::seed_for_testing(0xC1);
  std::mt19937_64 var(101);
  auto t0 = Clock::now();

  size_t mutations = 0, violations = 0;
  while (mutations < kC1Mutations) {
    size_t n = static_cast<size_t>(
        std::exp(std::uniform_real_distribution<double>(0.0, std::log(1000.0))(var)));
    n = std::clamp<size_t>(n, 1, 1000);

    cc::store::ContentStore honest;
    std::vector<std::pair<Bytes, Bytes>> entries;
    std::map<Bytes, Bytes> truth;
    for (size_t i = 0; i < n; ++i) {
      Bytes key = random_bytes(var, 8);
      if (truth.count(key)) continue;
      Bytes value = random_bytes(var, 16 + var() % 48);
      truth[key] = value;
      entries.emplace_back(key, value);
    }
    cc::merkle::MapRoot root = cc::merkle::build_tree(entries, honest);

    std::vector<Hash256> store_keys;
    std::vector<Bytes> store_values;
    honest.for_each([&](const Hash256& h, const Bytes& v) {
      store_keys.push_back(h);
      store_values.push_back(v);
    });

    for (int k = 0; k < 10 && mutations < kC1Mutations; ++k, ++mutations) {
      cc::store::ContentStore s;
      honest.clone_into(s);

      size_t strategy = var() % 5;
      size_t pick = store_keys.empty() ? 0 : var() % store_keys.size();
      switch (strategy) {
        case 0: {  // flip one byte of a stored entry in place
          if (store_keys.empty()) break;
          Bytes bad = store_values[pick];
          bad[var() % bad.size()] ^= 1;
          s.insert_unchecked(store_keys[pick], bad);
          break;
        }
        case 1: {  // drop an entry
          if (store_keys.empty()) break;
          s.erase(store_keys[pick]);
          break;
        }
        case 2: {  // decoy tree: same keys, different values, same store
          std::vector<std::pair<Bytes, Bytes>> decoy;
          for (const auto& [key, value] : truth)
            decoy.emplace_back(key, random_bytes(var, value.size()));
          cc::merkle::build_tree(decoy, s);
          break;
        }
        case 3: {  // forged leaf claiming the probe key binds elsewhere
          cc::merkle::Node leaf;
          leaf.leaf = true;
          leaf.key = entries[var() % entries.size()].first;
          Bytes attacker_value = random_bytes(var, 32);
          leaf.value_hash = s.put(attacker_value);
          Bytes enc = leaf.encode();
          s.put(enc);
          if (!store_keys.empty()) s.insert_unchecked(store_keys[pick], enc);
          break;
        }
        case 4: {  // swap the bytes of two entries under each other's keys
          if (store_keys.size() < 2) break;
          size_t a = var() % store_keys.size();
          size_t b = var() % store_keys.size();
          if (a == b) b = (b + 1) % store_keys.size();
          s.insert_unchecked(store_keys[a], store_values[b]);
          s.insert_unchecked(store_keys[b], store_values[a]);
          break;
        }
      }

      bool probe_present = (var() % 5) != 0 && !entries.empty();
      Bytes probe = probe_present ? entries[var() % entries.size()].first
                                  : random_bytes(var, 8);
      if (!probe_present && truth.count(probe)) probe_present = true;

      auto q = cc::merkle::query_tree(root, probe, s);
      if (q.status == cc::merkle::QueryStatus::Found) {
        if (!probe_present || q.value != truth[probe]) ++violations;
      }

      try {
        auto path = cc::merkle::get_path(root, probe, s);
        auto verdict = cc::merkle::verify_path(root, probe, path);
        if (verdict.kind == cc::merkle::PathVerdict::Kind::Value) {
          if (!probe_present || verdict.value_hash != cc::crypto::hash(truth[probe]))
            ++violations;
        }
      } catch (const cc::merkle::MissingNodeError&) {
      }
    }
  }

  double dt = seconds_since(t0);
  detail = fmt("%zu mutations, %zu double resolutions, %.1fs (budget %.0fs)", mutations,
               violations, dt, kC1BudgetSeconds);
  return violations == 0 && dt < kC1BudgetSeconds;
}

// --- criterion 2: one label, one head, never two accepted bodies -------

constexpr size_t kC2Trials = 10000;
constexpr double kC2BudgetSeconds = 300.0;

bool c2_intra_block(std::string& detail) {
  cc::crypto::rng::seed_for_testing(0xC2);
  std::mt19937_64 var(202);
  auto t0 = Clock::now();

  size_t trials = 0, violations = 0, double_found = 0;
  while (trials < kC2Trials) {
    cc::core::KeyRing owner = cc::core::keyring_generate();
    cc::core::KeyRing r1 = cc::core::keyring_generate();
    cc::core::KeyRing r2 = cc::core::keyring_generate();

    Bytes label = random_bytes(var, 6 + var() % 6);
    Bytes body = random_bytes(var, 40 + var() % 200);
    std::vector<cc::core::Claim> claims{{label, body}};
    std::vector<cc::core::Grant> grants{{r1.dh.pk, label}, {r2.dh.pk, label}};

    cc::store::ContentStore honest;
    auto ext = cc::core::extend_chain(random_bytes(var, 32), claims, grants, owner,
                                      std::nullopt, honest);

    std::vector<Hash256> store_keys;
    std::vector<Bytes> store_values;
    honest.for_each([&](const Hash256& h, const Bytes& v) {
      store_keys.push_back(h);
      store_values.push_back(v);
    });

    for (int k = 0; k < 50 && trials < kC2Trials; ++k, ++trials) {
      cc::store::ContentStore s;
      honest.clone_into(s);

      size_t strategy = var() % 6;
      size_t pick = var() % store_keys.size();
      switch (strategy) {
        case 0:  // untouched control, must round trip for both readers
          break;
        case 1: {
          Bytes bad = store_values[pick];
          bad[var() % bad.size()] ^= static_cast<std::uint8_t>(1 + var() % 255);
          s.insert_unchecked(store_keys[pick], bad);
          break;
        }
        case 2:
          s.erase(store_keys[pick]);
          break;
        case 3: {
          size_t a = var() % store_keys.size();
          size_t b = var() % store_keys.size();
          if (a == b) b = (b + 1) % store_keys.size();
          s.insert_unchecked(store_keys[a], store_values[b]);
          s.insert_unchecked(store_keys[b], store_values[a]);
          break;
        }
        case 4: {  // splice one entry's bytes over another, both directions
          size_t a = var() % store_keys.size();
          s.insert_unchecked(store_keys[pick], store_values[a]);
          break;
        }
        case 5: {  // inject garbage under a fresh and an existing key
          Bytes garbage = random_bytes(var, 8 + var() % 120);
          s.put(garbage);
          s.insert_unchecked(store_keys[pick], random_bytes(var, store_values[pick].size()));
          break;
        }
      }

      auto g1 = cc::core::get_claim(r1.dh.sk, label, ext.head, s);
      auto g2 = cc::core::get_claim(r2.dh.sk, label, ext.head, s);
      bool f1 = g1.status == cc::core::GetClaimStatus::Found;
      bool f2 = g2.status == cc::core::GetClaimStatus::Found;
      if (f1 && f2) {
        ++double_found;
        if (g1.body != g2.body) ++violations;
      }
      if (strategy == 0 && (!f1 || !f2 || g1.body != body || g2.body != body)) ++violations;
    }
  }

  double dt = seconds_since(t0);
  detail = fmt("%zu trials, %zu with both readers decoding, %zu disagreements, %.1fs "
               "(budget %.0fs)",
               trials, double_found, violations, dt, kC2BudgetSeconds);
  return violations == 0 && dt < kC2BudgetSeconds;
}

// --- criterion 3: inter-block equivocation always caught ---------------

constexpr size_t kC3Variants = 100;
constexpr double kC3BudgetSeconds = 120.0;

bool c3_equivocation(std::string& detail) {
  auto t0 = Clock::now();
  size_t detected = 0, honest_ok = 0;
  for (size_t seed = 0; seed < kC3Variants; ++seed) {
    auto out = cc::sim::run_equivocation_scenario(seed, false);
    if (out.prover_refused && out.forged_rejected && out.detections == out.readers)
      ++detected;
  }
  for (size_t seed = 0; seed < kC3Variants; ++seed) {
    auto out = cc::sim::run_equivocation_scenario(1000 + seed, true);
    if (out.honest_accepted && out.detections == 0) ++honest_ok;
  }
  double dt = seconds_since(t0);
  detail = fmt("%zu/%zu attack variants detected, %zu/%zu honest controls clean, %.1fs "
               "(budget %.0fs)",
               detected, kC3Variants, honest_ok, kC3Variants, dt, kC3BudgetSeconds);
  return detected == kC3Variants && honest_ok == kC3Variants && dt < kC3BudgetSeconds;
}

// --- criterion 4: privacy smoke ----------------------------------------

constexpr size_t kC4Blocks = 1000;
constexpr double kC4AccuracyLow = 0.45;
constexpr double kC4AccuracyHigh = 0.55;
constexpr double kC4BudgetSeconds = 120.0;

bool c4_privacy(std::string& detail) {
  cc::crypto::rng::seed_for_testing(0xC4);
  std::mt19937_64 var(404);
  auto t0 = Clock::now();

  cc::core::KeyRing owner = cc::core::keyring_generate();
  Bytes label = cc::to_bytes("alice");
  Bytes body_a(64, 0xAA);
  Bytes body_b(64, 0x55);
  Bytes padded_a = cc::core::pad_claim_body(body_a);
  Bytes padded_b = cc::core::pad_claim_body(body_b);

  std::set<cc::core::LookupKey> seen;
  size_t repeats = 0;
  std::set<size_t> ct_lengths;
  size_t correct = 0;

  for (size_t i = 0; i < kC4Blocks; ++i) {
    cc::core::BlockNonce nonce;
    cc::crypto::rng::fill(nonce);

    bool coin = (var() & 1) != 0;
    auto enc = cc::core::enc_claim(owner.vrf.sk, label, coin ? padded_a : padded_b, nonce);
    if (!seen.insert(enc.encoded.lookup_key).second) ++repeats;
    ct_lengths.insert(enc.encoded.ciphertext.size());

    // non-reader distinguisher: parity of the serialized map value
    Bytes wire = enc.encoded.map_value();
    unsigned sum = 0;
    for (auto b : wire) sum += b;
    bool guess = (sum & 1) != 0;
    if (guess == coin) ++correct;
  }

  double accuracy = static_cast<double>(correct) / kC4Blocks;
  double dt = seconds_since(t0);
  detail = fmt("%zu blocks, %zu lookup key repeats, %zu ciphertext lengths, distinguisher "
               "%.3f (bounds %.2f..%.2f), %.1fs",
               kC4Blocks, repeats, ct_lengths.size(), accuracy, kC4AccuracyLow,
               kC4AccuracyHigh, dt);
  return repeats == 0 && ct_lengths.size() == 1 && accuracy >= kC4AccuracyLow &&
         accuracy <= kC4AccuracyHigh && dt < kC4BudgetSeconds;
}

// --- criterion 5: claim and capability operation latency ---------------

constexpr double kC5EncodeMsMax = 25.0;
constexpr double kC5DecodeMsMax = 30.0;
constexpr double kC5CapMsMax = 3.0;

bool c5_latency(std::string& detail) {
  cc::crypto::rng::use_system();
  auto t = cc::bench::measure_claim_ops(50);
  detail = fmt("claim encode %.2fms (max %.0f), decode %.2fms (max %.0f), cap %.2f/%.2fms "
               "(max %.0f)",
               t.encode_ms, kC5EncodeMsMax, t.decode_ms, kC5DecodeMsMax, t.cap_encode_ms,
               t.cap_decode_ms, kC5CapMsMax);
  return t.encode_ms <= kC5EncodeMsMax && t.decode_ms <= kC5DecodeMsMax &&
         t.cap_encode_ms <= kC5CapMsMax && t.cap_decode_ms <= kC5CapMsMax;
}

// --- criterion 6: map scaling at 5000 entries --------------------------

constexpr double kC6BuildSecondsMax = 3.0;
constexpr double kC6PathNodesMin = 13.0;
constexpr double kC6PathNodesMax = 40.0;
constexpr size_t kC6ProofBytesMax = 4096;

bool c6_tree_scaling(std::string& detail) {
  cc::crypto::rng::seed_for_testing(0xC6);
  auto t = cc::bench::measure_tree(5000);
  detail = fmt("5000 entries: build %.3fs (max %.0f), mean path %.1f nodes (%.0f..%.0f), "
               "proof %zuB (max %zu)",
               t.build_seconds, kC6BuildSecondsMax, t.mean_path_nodes, kC6PathNodesMin,
               kC6PathNodesMax, t.max_proof_bytes, kC6ProofBytesMax);
  return t.build_seconds <= kC6BuildSecondsMax && t.mean_path_nodes >= kC6PathNodesMin &&
         t.mean_path_nodes <= kC6PathNodesMax && t.max_proof_bytes <= kC6ProofBytesMax;
}

// --- criterion 7: block stays small and constant -----------------------

constexpr size_t kC7BlockBytesMax = 1000;

bool c7_block_size(std::string& detail) {
  cc::crypto::rng::seed_for_testing(0xC7);
  auto t = cc::bench::measure_block_size(2, 40);
  detail = fmt("%zuB at %zu claims, %zuB at %zu claims (max %zu)", t.bytes_low, t.claims_low,
               t.bytes_high, t.claims_high, kC7BlockBytesMax);
  return t.bytes_low == t.bytes_high && t.bytes_low <= kC7BlockBytesMax;
}

// --- criterion 8: simulated key distribution orderings -----------------

constexpr std::uint64_t kC8Seed = 42;
constexpr size_t kC8Users = 150;
constexpr size_t kC8Events = 10000;
constexpr size_t kC8Window = 1000;
constexpr size_t kC8AttachedBytesMax = 30 * 1024;
constexpr double kC8BudgetSeconds = 600.0;

bool c8_simulation(std::string& detail) {
  auto t0 = Clock::now();
  auto trace = cc::sim::synth_trace(kC8Users, kC8Events, cc::sim::Topology::Dense, kC8Seed);

  cc::sim::SimConfig cfg;
  cfg.seed = kC8Seed;
  cfg.window = kC8Window;
  cfg.keep_event_log = true;

  cfg.mode = cc::sim::Mode::Private;
  auto priv = cc::sim::run(trace, cfg);
  cfg.mode = cc::sim::Mode::Public;
  auto pub = cc::sim::run(trace, cfg);

  bool final_order = !priv.windows.empty() && !pub.windows.empty() &&
                     pub.windows.back().encryption_rate >=
                         priv.windows.back().encryption_rate;

  auto non_decreasing_3 = [](const cc::sim::RunResult& r) {
    if (r.windows.size() < 3) return false;
    return r.windows[0].encryption_rate <= r.windows[1].encryption_rate &&
           r.windows[1].encryption_rate <= r.windows[2].encryption_rate;
  };
  bool warmup = non_decreasing_3(priv) && non_decreasing_3(pub);

  bool diversity_order = priv.windows.size() == pub.windows.size();
  for (size_t i = 0; diversity_order && i < priv.windows.size(); ++i)
    if (pub.windows[i].mean_diversity < priv.windows[i].mean_diversity)
      diversity_order = false;

  size_t last_attached = priv.event_log.empty() ? 0 : priv.event_log.back().attached_bytes;
  size_t final_window_max =
      priv.windows.empty() ? 0 : priv.windows.back().max_attached_bytes;
  bool attached_ok =
      last_attached <= kC8AttachedBytesMax && final_window_max <= kC8AttachedBytesMax;

  double dt = seconds_since(t0);
  detail = fmt("final rate pub %.3f vs priv %.3f, warmup %s, diversity order %s, "
               "attachment at last event %zuB / last window max %zuB (cap %zu), %.0fs "
               "(budget %.0f)",
               pub.windows.empty() ? 0.0 : pub.windows.back().encryption_rate,
               priv.windows.empty() ? 0.0 : priv.windows.back().encryption_rate,
               warmup ? "monotone" : "BROKEN", diversity_order ? "holds" : "BROKEN",
               last_attached, final_window_max, kC8AttachedBytesMax, dt, kC8BudgetSeconds);
  return final_order && warmup && diversity_order && attached_ok && dt < kC8BudgetSeconds;
}

// --- criterion 9: byte-exact round trip across processes ---------------

struct CmdResult {
  int exit_code = -1;
  std::string out;
};

CmdResult run_cli(const std::string& args) {
  std::string cmd = std::string(CLI_BIN) + " --format jsonl " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  CmdResult res;
  if (!pipe) return res;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) res.out.append(buf, n);
  int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string json_field(const std::string& line, const std::string& key) {
  // minimal extraction for "key":"value"
  std::string needle = "\"" + key + "\":\"";
  auto pos = line.find(needle);
  if (pos == std::string::npos) return {};
  pos += needle.size();
  auto end = line.find('"', pos);
  return line.substr(pos, end - pos);
}

bool c9_round_trip(std::string& detail) {
  fs::path data = DATA_DIR;
  fs::path work = fs::temp_directory_path() / ("cc_accept_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work / "owner");
  fs::create_directories(work / "reader");
  fs::copy_file(data / "owner_identity.json", work / "owner" / "identity.json");
  fs::copy_file(data / "owner_chain.json", work / "owner" / "chain.json");
  fs::copy_file(data / "reader_identity.json", work / "reader" / "identity.json");
  fs::copy_file(data / "reader_chain.json", work / "reader" / "chain.json");

  std::string owner = (work / "owner").string();
  std::string reader = (work / "reader").string();
  std::string expected_head = slurp(data / "expected_head.txt");

  auto ext = run_cli("extend --state " + owner + " --seed 99 --claims " +
                     (data / "claims.json").string() + " --acl " +
                     (data / "acl.json").string() + " --public-data " +
                     (data / "public_data.bin").string());
  std::string head = json_field(ext.out, "head");
  bool head_ok = ext.exit_code == 0 && head == expected_head;

  std::string frag = (work / "frag.bin").string();
  bool frag_ok = run_cli("export --state " + owner + " --out " + frag).exit_code == 0 &&
                 slurp(frag) == slurp(data / "golden_fragment.bin");

  bool import_ok = run_cli("import --state " + reader + " --in " + frag).exit_code == 0;
  bool validate_ok =
      run_cli("validate --state " + reader + " --head " + head).exit_code == 0;

  std::string body_file = (work / "body.bin").string();
  bool get_ok = run_cli("get --state " + reader + " --head " + head +
                        " --label reader --out " + body_file)
                    .exit_code == 0;
  std::string body = slurp(body_file);
  std::string golden_body = slurp(data / "claim_body.bin");
  bool body_ok = get_ok && !body.empty() && body == golden_body;

  fs::remove_all(work);
  detail = fmt("head %s, fragment %s, import %s, validate %s, body %s (%zuB)",
               head_ok ? "matches golden" : "MISMATCH", frag_ok ? "byte-exact" : "MISMATCH",
               import_ok ? "ok" : "FAILED", validate_ok ? "ok" : "FAILED",
               body_ok ? "byte-exact" : "MISMATCH", golden_body.size());
  return head_ok && frag_ok && import_ok && validate_ok && body_ok;
}

struct Criterion {
  int id;
  const char* name;
  bool (*fn)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "unique resolution under adversarial stores", c1_unique_resolution},
    {2, "no intra-block equivocation across readers", c2_intra_block},
    {3, "inter-block equivocation detection", c3_equivocation},
    {4, "lookup and ciphertext privacy", c4_privacy},
    {5, "claim and capability latency", c5_latency},
    {6, "map scaling at 5000 entries", c6_tree_scaling},
    {7, "block size small and constant", c7_block_size},
    {8, "simulated key distribution orderings", c8_simulation},
    {9, "cross-process byte-exact round trip", c9_round_trip},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : kCriteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] C%d %s: %s\n", ok ? "PASS" : "FAIL", c.id, c.name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
