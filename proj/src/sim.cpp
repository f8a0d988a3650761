#include "claimchain/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "claimchain/merkle.hpp"

namespace claimchain::sim {

// --- traces ------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string iso_timestamp(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  return buf;
}

Bytes to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

}  // namespace

std::vector<TraceEvent> parse_trace(const std::string& text) {
  std::vector<TraceEvent> out;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != 3)
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected timestamp,sender,recipient[;recipient...]");
    TraceEvent ev;
    ev.seq = out.size();
    ev.timestamp = fields[0];
    ev.sender = fields[1];
    for (auto& r : split(fields[2], ';'))
      if (!r.empty()) ev.recipients.push_back(r);
    if (ev.sender.empty()) throw ParseError("line " + std::to_string(lineno) + ": empty sender");
    if (ev.recipients.empty())
      throw ParseError("line " + std::to_string(lineno) + ": no recipients");
    out.push_back(std::move(ev));
  }

  auto key_less = [](const TraceEvent& a, const TraceEvent& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    if (a.sender != b.sender) return a.sender < b.sender;
    return a.recipients < b.recipients;
  };
  std::stable_sort(out.begin(), out.end(), key_less);
  auto dup = [](const TraceEvent& a, const TraceEvent& b) {
    return a.timestamp == b.timestamp && a.sender == b.sender && a.recipients == b.recipients;
  };
  out.erase(std::unique(out.begin(), out.end(), dup), out.end());
  for (size_t i = 0; i < out.size(); ++i) out[i].seq = i;
  return out;
}

std::vector<TraceEvent> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open trace file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str());
}

std::vector<TraceEvent> synth_trace(size_t users, size_t events, Topology topology,
                                    std::uint64_t seed) {
  std::mt19937_64 g(seed);
  // dense: sizable communities with global spillover, so contact graphs
  // grow rich; sparse: small isolated cliques that rarely reach outside
  const size_t community = topology == Topology::Dense ? 10 : 3;
  const double p_intra = topology == Topology::Dense ? 0.8 : 0.95;
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<std::string> ids(users);
  for (size_t i = 0; i < users; ++i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "u%03zu", i);
    ids[i] = buf;
  }

  auto pick_recipient = [&](size_t sender) {
    if (users < 2) return sender;
    if (coin(g) < p_intra) {
      size_t base = (sender / community) * community;
      size_t span = std::min(community, users - base);
      if (span > 1) {
        size_t r = base + g() % span;
        if (r != sender) return r;
      }
    }
    size_t r = g() % users;
    while (r == sender) r = g() % users;
    return r;
  };

  if (users < 2) return {};

  const std::time_t base_time = 988675200;  // 2001-05-01T00:00:00Z
  std::vector<TraceEvent> out;
  out.reserve(events);
  for (size_t i = 0; i < events; ++i) {
    TraceEvent ev;
    ev.seq = i;
    ev.timestamp = iso_timestamp(base_time + static_cast<std::time_t>(60 * i));
    size_t sender = g() % users;
    ev.sender = ids[sender];

    double d = coin(g);
    size_t n;
    if (topology == Topology::Dense)
      n = d < 0.6 ? 1 : (d < 0.9 ? 2 : 3);
    else
      n = d < 0.85 ? 1 : 2;

    std::set<size_t> chosen;
    while (chosen.empty()) {
      for (size_t k = 0; k < n && chosen.size() + 1 < users; ++k) {
        size_t r = pick_recipient(sender);
        for (int tries = 0; chosen.count(r) && tries < 16; ++tries) r = pick_recipient(sender);
        if (r != sender && !chosen.count(r)) chosen.insert(r);
      }
    }
    for (size_t r : chosen) ev.recipients.push_back(ids[r]);
    out.push_back(std::move(ev));
  }
  return out;
}

// --- world -------------------------------------------------------------

namespace {

Bytes fresh_key_bytes() {
  Bytes b(32);
  crypto::rng::fill(b);
  return b;
}

// Chain-mode participant: own chain plus everything learned from others.
struct PrivAgent {
  std::string id;
  Bytes label;
  core::KeyRing keys;
  Bytes enc_key;
  std::optional<Hash256> head;
  std::vector<core::Block> blocks;
  store::ContentStore self_store;
  store::ContentStore gossip;
  std::vector<core::ClaimRecord> head_records;

  // (reader, subject) pairs this owner keeps granting; a capability for
  // each pair goes into every new block as long as it stays encodable
  std::set<std::pair<std::string, std::string>> grants;
  std::set<std::pair<std::string, std::string>> caps_in_head;
  std::set<std::string> claims_in_head;

  // beliefs about other users
  std::map<std::string, Bytes> view_bytes;          // subject -> latest block bytes
  std::map<std::string, std::uint64_t> view_index;  // subject -> that block's index
  std::map<std::string, Hash256> peer_head;         // validated heads of contacts
  std::map<std::string, core::Block> peer_head_block;
  std::map<std::string, crypto::GroupElement> peer_dh_pk;
  std::map<std::string, crypto::GroupElement> peer_vrf_pk;
  std::map<std::string, Bytes> dh_secret;

  // claim lookups against a contact's current head, memoized until the
  // head changes
  struct ReadCache {
    std::map<std::string, std::optional<Bytes>> by_subject;
  };
  std::map<std::string, ReadCache> reads;

  // delivery ledger per peer
  std::map<std::string, size_t> sent_blocks;
  std::map<std::string, Hash256> paths_sent_for_head;

  size_t participation = 0;
  size_t rotations = 0;
};

// Web-of-trust baseline participant: everybody relays every binding they
// know in the clear, vouching for what they pass along.
struct PubAgent {
  std::string id;
  std::uint64_t version = 1;
  Bytes key;
  struct Binding {
    std::uint64_t version = 0;
    Bytes key;
  };
  std::map<std::string, Binding> book;
  std::map<std::string, std::set<std::string>> vouch;
  size_t participation = 0;
  size_t rotations = 0;
};

}  // namespace

struct World::Impl {
  SimConfig cfg;
  std::map<std::string, std::unique_ptr<PrivAgent>> priv;
  std::map<std::string, std::unique_ptr<PubAgent>> pub;
  size_t detections = 0;
  size_t quarantined = 0;
  std::uint64_t scenario_counter = 0;

  explicit Impl(const SimConfig& c) : cfg(c) { crypto::rng::seed_for_testing(cfg.seed); }

  PrivAgent& priv_agent(const std::string& id) {
    auto it = priv.find(id);
    if (it != priv.end()) return *it->second;
    auto agent = std::make_unique<PrivAgent>();
    agent->id = id;
    agent->label = to_bytes(id);
    agent->keys = core::keyring_generate();
    agent->enc_key = fresh_key_bytes();
    auto res = core::extend_chain(agent->enc_key, {}, {}, agent->keys, std::nullopt,
                                  agent->self_store, cfg.body_envelope);
    agent->head = res.head;
    agent->blocks.push_back(res.block);
    agent->keys.prev_sig_sk = agent->keys.sig.sk;
    auto& ref = *agent;
    priv.emplace(id, std::move(agent));
    return ref;
  }

  PubAgent& pub_agent(const std::string& id) {
    auto it = pub.find(id);
    if (it != pub.end()) return *it->second;
    auto agent = std::make_unique<PubAgent>();
    agent->id = id;
    agent->key = fresh_key_bytes();
    agent->book[id] = {agent->version, agent->key};
    auto& ref = *agent;
    pub.emplace(id, std::move(agent));
    return ref;
  }

  static std::vector<std::string> dedup_recipients(const TraceEvent& ev) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& r : ev.recipients)
      if (r != ev.sender && seen.insert(r).second) out.push_back(r);
    return out;
  }

  const Bytes& shared_secret(PrivAgent& a, const std::string& peer) {
    auto it = a.dh_secret.find(peer);
    if (it != a.dh_secret.end()) return it->second;
    Bytes s = crypto::dh_shared_secret(a.keys.dh.sk, a.peer_dh_pk.at(peer));
    return a.dh_secret.emplace(peer, std::move(s)).first->second;
  }

  void extend(PrivAgent& a, bool rotate) {
    if (rotate) {
      // the old key signs the block that announces its successor
      a.keys.sig = crypto::sig_keygen();
      a.enc_key = fresh_key_bytes();
    }
    std::vector<core::Claim> claims;
    claims.reserve(a.view_bytes.size());
    for (const auto& [subject, bytes] : a.view_bytes)
      claims.push_back({to_bytes(subject), bytes});

    std::vector<core::Grant> grant_list;
    std::set<std::pair<std::string, std::string>> encoded;
    for (const auto& [reader, subject] : a.grants) {
      if (!a.peer_dh_pk.count(reader) || !a.view_bytes.count(subject)) continue;
      grant_list.push_back({a.peer_dh_pk.at(reader), to_bytes(subject)});
      encoded.insert({reader, subject});
    }

    auto res = core::extend_chain(a.enc_key, claims, grant_list, a.keys, a.head, a.self_store,
                                  cfg.body_envelope);
    a.head = res.head;
    a.blocks.push_back(res.block);
    a.head_records = std::move(res.records);
    a.keys.prev_sig_sk = a.keys.sig.sk;
    a.caps_in_head = std::move(encoded);
    a.claims_in_head.clear();
    for (const auto& [subject, bytes] : a.view_bytes) a.claims_in_head.insert(subject);
    if (rotate) a.rotations = a.participation / cfg.rotation_period;
  }

  bool extension_needed(PrivAgent& a, const std::vector<std::string>& recipients) const {
    for (const auto& r : recipients) {
      if (!a.peer_dh_pk.count(r)) continue;  // cannot grant to an unknown key
      auto it = a.grants.lower_bound({r, std::string()});
      for (; it != a.grants.end() && it->first == r; ++it) {
        const std::string& subject = it->second;
        if (!a.view_bytes.count(subject)) continue;
        if (!a.caps_in_head.count(*it) || !a.claims_in_head.count(subject)) return true;
      }
    }
    return false;
  }

  // Store keys for the path nodes and entry values a reader needs to
  // resolve her readable pairs in the owner's head block.
  void collect_readable_keys(PrivAgent& a, const std::string& reader, std::set<Hash256>& keys) {
    const core::Block& head_blk = a.blocks.back();
    const merkle::MapRoot& root = head_blk.payload.map_root;
    if (!a.peer_dh_pk.count(reader)) return;
    const Bytes& secret = shared_secret(a, reader);

    auto add_path = [&](const core::LookupKey& lk) {
      BytesView key_view(lk.data(), lk.size());
      merkle::ResolutionPath path = merkle::get_path(root, key_view, a.self_store);
      for (const Bytes& node : path.nodes) keys.insert(crypto::hash(node));
      merkle::QueryResult q = merkle::query_tree(root, key_view, a.self_store);
      if (q.status == merkle::QueryStatus::Found) keys.insert(crypto::hash(q.value));
    };

    auto it = a.grants.lower_bound({reader, std::string()});
    for (; it != a.grants.end() && it->first == reader; ++it) {
      if (!a.caps_in_head.count(*it)) continue;
      const std::string& subject = it->second;
      add_path(core::cap_lookup_key(secret, to_bytes(subject), head_blk.payload.nonce));
      for (const core::ClaimRecord& rec : a.head_records) {
        if (rec.label == to_bytes(subject)) {
          add_path(core::claim_lookup_key(rec.h));
          break;
        }
      }
    }
  }

  Bytes build_fragment(PrivAgent& a, const std::vector<std::string>& recipients) {
    std::set<Hash256> keys;
    const Hash256 head_hash = *a.head;
    for (const auto& r : recipients) {
      size_t from = a.sent_blocks.count(r) ? a.sent_blocks[r] : 0;
      for (size_t i = from; i < a.blocks.size(); ++i) keys.insert(a.blocks[i].hash());
      auto done = a.paths_sent_for_head.find(r);
      if (done == a.paths_sent_for_head.end() || done->second != head_hash)
        collect_readable_keys(a, r, keys);
    }
    std::vector<Hash256> key_list(keys.begin(), keys.end());
    Bytes fragment = a.self_store.export_subset(key_list);
    for (const auto& r : recipients) {
      a.sent_blocks[r] = a.blocks.size();
      a.paths_sent_for_head[r] = head_hash;
    }
    return fragment;
  }

  void deliver(PrivAgent& sender, PrivAgent& receiver, const Bytes& fragment) {
    receiver.participation += 1;
    receiver.gossip.import_fragment(fragment);

    const Hash256 new_head = *sender.head;
    auto known = receiver.peer_head.find(sender.id);
    if (known != receiver.peer_head.end() && known->second == new_head) return;

    // walk back to the last validated block or to genesis
    std::vector<core::Block> segment;
    Hash256 cur = new_head;
    bool anchored = false;
    bool complete = true;
    while (true) {
      if (known != receiver.peer_head.end() && cur == known->second) {
        anchored = true;
        break;
      }
      auto bytes = receiver.gossip.get(cur);
      if (!bytes) {
        complete = false;
        break;
      }
      auto blk = core::Block::decode(*bytes);
      if (!blk) {
        complete = false;
        break;
      }
      bool genesis = blk->is_genesis();
      segment.push_back(std::move(*blk));
      if (genesis) break;
      cur = segment.back().ptr;
    }
    if (!complete || (!anchored && (segment.empty() || !segment.back().is_genesis()))) {
      quarantined += 1;
      return;
    }

    std::reverse(segment.begin(), segment.end());
    std::vector<core::Block> chain;
    if (anchored) chain.push_back(receiver.peer_head_block.at(sender.id));
    chain.insert(chain.end(), segment.begin(), segment.end());
    auto report = core::validate_blocks(chain);
    if (!report.ok) {
      quarantined += 1;
      return;
    }

    const core::Block& head_blk = chain.back();
    receiver.peer_head[sender.id] = new_head;
    receiver.peer_head_block[sender.id] = head_blk;
    receiver.reads[sender.id] = {};

    auto dh = crypto::GroupElement::from_encoded(head_blk.payload.pk_dh);
    auto vrf = crypto::GroupElement::from_encoded(head_blk.payload.pk_vrf);
    if (dh && vrf) {
      auto old = receiver.peer_dh_pk.find(sender.id);
      if (old == receiver.peer_dh_pk.end() || !(old->second == *dh))
        receiver.dh_secret.erase(sender.id);
      receiver.peer_dh_pk.insert_or_assign(sender.id, *dh);
      receiver.peer_vrf_pk.insert_or_assign(sender.id, *vrf);
    }

    auto idx = receiver.view_index.find(sender.id);
    if (idx == receiver.view_index.end() || head_blk.payload.index > idx->second) {
      receiver.view_bytes[sender.id] = head_blk.encode();
      receiver.view_index[sender.id] = head_blk.payload.index;
    }
  }

  // Decrypt the contact's cross-reference about the subject, if this
  // agent holds a capability for it.  Memoized per contact head.
  const std::optional<Bytes>& read_claim(PrivAgent& a, const std::string& contact,
                                         const std::string& subject) {
    auto& cache = a.reads[contact].by_subject;
    auto hit = cache.find(subject);
    if (hit != cache.end()) return hit->second;

    std::optional<Bytes> result;
    const core::Block& head_blk = a.peer_head_block.at(contact);
    const merkle::MapRoot& root = head_blk.payload.map_root;
    const core::BlockNonce& nonce = head_blk.payload.nonce;
    Bytes label = to_bytes(subject);

    const Bytes& secret = shared_secret(a, contact);
    core::LookupKey cap_key = core::cap_lookup_key(secret, label, nonce);
    merkle::QueryResult cap = merkle::query_tree(root, BytesView(cap_key.data(), cap_key.size()),
                                                 a.gossip);
    if (cap.status == merkle::QueryStatus::Found) {
      crypto::SymmetricKey k_cap = core::cap_encryption_key(secret, label, nonce);
      auto plain = crypto::aead_decrypt(k_cap, cap.value);
      if (plain && plain->size() == 33 + crypto::kSymmetricKeySize + core::kProofKeySize) {
        auto h = crypto::GroupElement::from_encoded(BytesView(plain->data(), 33));
        if (h && !h->is_identity()) {
          crypto::SymmetricKey k{};
          core::ProofKey t{};
          std::copy_n(plain->begin() + 33, k.size(), k.begin());
          std::copy_n(plain->begin() + 33 + k.size(), t.size(), t.begin());
          core::LookupKey claim_key = core::claim_lookup_key(*h);
          merkle::QueryResult claim = merkle::query_tree(
              root, BytesView(claim_key.data(), claim_key.size()), a.gossip);
          if (claim.status == merkle::QueryStatus::Found) {
            auto dec = core::dec_claim(a.peer_vrf_pk.at(contact), label, *h, k, t, claim.value,
                                       nonce);
            if (dec.status == core::DecodeStatus::Ok) {
              auto body = core::unpad_claim_body(dec.padded_body);
              if (body) result = std::move(*body);
            }
          }
        }
      }
    }
    return cache.emplace(subject, std::move(result)).first->second;
  }

  struct Resolution {
    bool resolvable = false;
    size_t diversity = 0;
  };

  Resolution resolve_recipient(PrivAgent& a, const std::string& target) {
    Resolution out;
    // (index, block bytes) pairs; same index from two sources must agree
    std::map<std::uint64_t, const Bytes*> by_index;
    std::vector<Bytes> bodies;
    bodies.reserve(8);
    bool conflict = false;

    auto consider = [&](const Bytes& bytes) {
      auto blk = core::Block::decode(bytes);
      if (!blk) return false;
      auto it = by_index.find(blk->payload.index);
      if (it == by_index.end()) {
        by_index.emplace(blk->payload.index, &bytes);
      } else if (*it->second != bytes) {
        conflict = true;  // two distinct blocks at one height: a fork
      }
      return true;
    };

    if (a.peer_head.count(target)) {
      out.diversity += 1;  // the target's own chain
      bodies.push_back(a.peer_head_block.at(target).encode());
      consider(bodies.back());
    }
    auto view = a.view_bytes.find(target);
    if (view != a.view_bytes.end()) {
      bodies.push_back(view->second);
      consider(bodies.back());
    }
    for (const auto& [contact, head] : a.peer_head) {
      if (contact == target) continue;
      const auto& body = read_claim(a, contact, target);
      if (!body) continue;
      out.diversity += 1;
      bodies.push_back(*body);
      consider(bodies.back());
    }

    if (by_index.empty() || conflict) return out;
    out.resolvable = true;
    // a view retained from earlier resolution still counts as evidence
    if (out.diversity == 0) out.diversity = 1;
    auto latest = std::prev(by_index.end());
    auto idx = a.view_index.find(target);
    if (idx == a.view_index.end() || latest->first > idx->second) {
      a.view_bytes[target] = *latest->second;
      a.view_index[target] = latest->first;
    }
    return out;
  }

  EventRecord step_private(const TraceEvent& ev) {
    EventRecord rec;
    rec.seq = ev.seq;
    rec.sender = ev.sender;

    auto recipients = dedup_recipients(ev);
    PrivAgent& sender = priv_agent(ev.sender);
    for (const auto& r : recipients) priv_agent(r);
    sender.participation += 1;

    if (recipients.size() >= 2)
      for (const auto& r : recipients)
        for (const auto& other : recipients)
          if (r != other) sender.grants.insert({r, other});

    bool rotate = sender.participation / cfg.rotation_period > sender.rotations;
    if (rotate || extension_needed(sender, recipients)) extend(sender, rotate);

    Bytes fragment = build_fragment(sender, recipients);
    rec.attached_bytes = fragment.size();

    rec.encrypted = true;
    for (const auto& r : recipients) {
      Resolution res = resolve_recipient(sender, r);
      rec.encrypted = rec.encrypted && res.resolvable;
      rec.diversity.push_back(res.diversity);
    }

    for (const auto& r : recipients) deliver(sender, *priv.at(r), fragment);

    rec.sender_self_storage = sender.self_store.total_value_bytes();
    rec.sender_gossip_storage = sender.gossip.total_value_bytes();
    return rec;
  }

  EventRecord step_public(const TraceEvent& ev) {
    EventRecord rec;
    rec.seq = ev.seq;
    rec.sender = ev.sender;

    auto recipients = dedup_recipients(ev);
    PubAgent& sender = pub_agent(ev.sender);
    for (const auto& r : recipients) pub_agent(r);
    sender.participation += 1;

    if (sender.participation / cfg.rotation_period > sender.rotations) {
      sender.version += 1;
      sender.key = fresh_key_bytes();
      sender.book[sender.id] = {sender.version, sender.key};
      sender.rotations = sender.participation / cfg.rotation_period;
    }

    wire::Writer w;
    w.u32(static_cast<std::uint32_t>(sender.book.size()));
    for (const auto& [label, binding] : sender.book) {
      w.bytes(to_bytes(label));
      w.u64(binding.version);
      w.bytes(binding.key);
      auto vs = sender.vouch.find(label);
      size_t n = vs == sender.vouch.end() ? 0 : vs->second.size();
      w.u32(static_cast<std::uint32_t>(n));
      if (vs != sender.vouch.end())
        for (const auto& v : vs->second) w.bytes(to_bytes(v));
    }
    rec.attached_bytes = w.data().size();

    rec.encrypted = true;
    for (const auto& r : recipients) {
      rec.encrypted = rec.encrypted && sender.book.count(r) > 0;
      auto vs = sender.vouch.find(r);
      rec.diversity.push_back(vs == sender.vouch.end() ? 0 : vs->second.size());
    }

    for (const auto& r : recipients) {
      PubAgent& receiver = *pub.at(r);
      receiver.participation += 1;
      for (const auto& [label, binding] : sender.book) {
        auto& vouchers = receiver.vouch[label];
        auto vs = sender.vouch.find(label);
        if (vs != sender.vouch.end()) vouchers.insert(vs->second.begin(), vs->second.end());
        vouchers.insert(sender.id);
        if (label == receiver.id) continue;
        auto mine = receiver.book.find(label);
        if (mine == receiver.book.end() || binding.version > mine->second.version)
          receiver.book[label] = binding;
      }
    }

    rec.sender_self_storage = sender.key.size();
    rec.sender_gossip_storage = rec.attached_bytes;
    return rec;
  }
};

World::World(const SimConfig& cfg) : impl_(std::make_unique<Impl>(cfg)) {}
World::~World() = default;

EventRecord World::step(const TraceEvent& ev) {
  return impl_->cfg.mode == Mode::Private ? impl_->step_private(ev) : impl_->step_public(ev);
}

size_t World::inject_equivocator(const std::string& attacker, const std::string& target) {
  if (impl_->cfg.mode == Mode::Public) return 0;
  std::uint64_t seed = impl_->cfg.seed;
  for (char c : attacker) seed = seed * 131 + static_cast<unsigned char>(c);
  for (char c : target) seed = seed * 131 + static_cast<unsigned char>(c);
  seed += impl_->scenario_counter++;
  ScenarioOutcome out = run_equivocation_scenario(seed, false);
  impl_->detections += out.detections;
  return out.detections;
}

size_t World::total_detections() const { return impl_->detections; }

// --- full runs ---------------------------------------------------------

RunResult run(std::span<const TraceEvent> trace, const SimConfig& cfg) {
  World world(cfg);
  RunResult out;

  size_t encrypted_total = 0;
  size_t win_events = 0, win_encrypted = 0, win_div_n = 0, win_max_att = 0;
  double win_div_sum = 0, win_att_sum = 0, win_self_sum = 0, win_gossip_sum = 0;

  auto flush = [&]() {
    if (win_events == 0) return;
    WindowRecord w;
    w.index = out.windows.size();
    w.events = win_events;
    w.encryption_rate = static_cast<double>(win_encrypted) / win_events;
    w.mean_diversity = win_div_n ? win_div_sum / win_div_n : 0.0;
    w.mean_attached_bytes = win_att_sum / win_events;
    w.max_attached_bytes = win_max_att;
    w.mean_self_storage_bytes = win_self_sum / win_events;
    w.mean_gossip_storage_bytes = win_gossip_sum / win_events;
    out.windows.push_back(w);
    win_events = win_encrypted = win_div_n = win_max_att = 0;
    win_div_sum = win_att_sum = win_self_sum = win_gossip_sum = 0;
  };

  for (size_t i = cfg.trace_offset; i < trace.size(); ++i) {
    EventRecord rec = world.step(trace[i]);
    out.events += 1;
    encrypted_total += rec.encrypted ? 1 : 0;
    out.max_attached_bytes = std::max(out.max_attached_bytes, rec.attached_bytes);

    win_events += 1;
    win_encrypted += rec.encrypted ? 1 : 0;
    for (size_t d : rec.diversity) {
      win_div_sum += static_cast<double>(d);
      win_div_n += 1;
    }
    win_att_sum += static_cast<double>(rec.attached_bytes);
    win_max_att = std::max(win_max_att, rec.attached_bytes);
    win_self_sum += static_cast<double>(rec.sender_self_storage);
    win_gossip_sum += static_cast<double>(rec.sender_gossip_storage);

    if (cfg.keep_event_log) out.event_log.push_back(std::move(rec));
    if (win_events == cfg.window) flush();
  }
  flush();

  out.encryption_rate = out.events ? static_cast<double>(encrypted_total) / out.events : 0.0;
  out.detections = world.total_detections();
  return out;
}

// --- equivocation scenario ---------------------------------------------

ScenarioOutcome run_equivocation_scenario(std::uint64_t seed, bool honest) {
  crypto::rng::seed_for_testing(0x9e3779b97f4a7c15ULL ^ (seed * 0x100000001b3ULL + 0x1505));
  std::mt19937_64 var(seed);
  ScenarioOutcome out;

  // the target's real chain
  store::ContentStore target_store;
  core::KeyRing target_keys = core::keyring_generate();
  std::optional<Hash256> target_head;
  std::vector<Bytes> real_blocks;
  size_t n_real = 3 + var() % 3;
  for (size_t i = 0; i < n_real; ++i) {
    auto res = core::extend_chain(fresh_key_bytes(), {}, {}, target_keys, target_head,
                                  target_store);
    target_head = res.head;
    target_keys.prev_sig_sk = target_keys.sig.sk;
    real_blocks.push_back(res.block.encode());
  }

  // blocks that are not on the target's chain: either a forged lookalike
  // chain under different keys, or a mutated copy of a real block
  auto make_fake = [&]() {
    if (var() % 2 == 0) {
      store::ContentStore fake_store;
      core::KeyRing fake_keys = core::keyring_generate();
      auto res = core::extend_chain(fresh_key_bytes(), {}, {}, fake_keys, std::nullopt,
                                    fake_store);
      return res.block.encode();
    }
    Bytes mutated = real_blocks[var() % real_blocks.size()];
    mutated[var() % mutated.size()] ^= static_cast<std::uint8_t>(1 + var() % 255);
    return mutated;
  };
  size_t n_fake = 1 + var() % 2;
  std::vector<Bytes> fake_blocks;
  for (size_t i = 0; i < n_fake; ++i) {
    Bytes f = make_fake();
    bool clash = false;
    for (const Bytes& r : real_blocks) clash = clash || r == f;
    if (!clash) fake_blocks.push_back(std::move(f));
  }
  if (fake_blocks.empty()) fake_blocks.push_back(make_fake());

  // the attacker's chain: first and last blocks reference the real
  // chain, the middle ones either equivocate (attack) or stay honest
  Bytes label = to_bytes("target");
  store::ContentStore own_store;
  core::KeyRing own_keys = core::keyring_generate();
  std::optional<Hash256> own_head;
  std::vector<core::Block> own_blocks;
  std::vector<core::ClaimRecord> own_records;

  auto append_block = [&](const std::optional<Bytes>& body) {
    std::vector<core::Claim> claims;
    if (body) claims.push_back({label, *body});
    auto res = core::extend_chain(fresh_key_bytes(), claims, {}, own_keys, own_head, own_store);
    own_head = res.head;
    own_keys.prev_sig_sk = own_keys.sig.sk;
    own_blocks.push_back(res.block);
    for (auto& r : res.records) own_records.push_back(std::move(r));
  };

  auto pick_real = [&]() { return real_blocks[var() % real_blocks.size()]; };
  auto pick_fake = [&]() { return fake_blocks[var() % fake_blocks.size()]; };

  append_block(pick_real());
  size_t middles = 1 + var() % 3;
  for (size_t i = 0; i < middles; ++i) {
    if (honest) {
      if (var() % 4 == 0)
        append_block(std::nullopt);  // no cross-reference in this block
      else
        append_block(pick_real());
    } else {
      if (i == 0)
        append_block(pick_fake());
      else if (var() % 3 == 0)
        append_block(std::nullopt);
      else
        append_block(var() % 2 ? pick_fake() : pick_real());
    }
  }
  append_block(pick_real());

  // each re-granted reader audits with the real chain in her own order
  out.readers = 1 + var() % 2;
  out.prover_refused = true;
  out.forged_rejected = true;
  out.honest_accepted = true;

  for (size_t reader = 0; reader < out.readers; ++reader) {
    std::vector<Bytes> allowed = real_blocks;
    std::shuffle(allowed.begin(), allowed.end(), var);

    if (honest) {
      auto proof = core::prove_consistency(own_keys, label, own_blocks, allowed, own_records,
                                           own_store);
      auto verdict = core::check_consistency(label, own_blocks, allowed, proof);
      out.honest_accepted = out.honest_accepted && verdict.ok;
      continue;
    }

    bool refused = false;
    try {
      core::prove_consistency(own_keys, label, own_blocks, allowed, own_records, own_store);
    } catch (const core::CannotProveError&) {
      refused = true;
    }
    out.prover_refused = out.prover_refused && refused;

    // the attacker instead proves against a set padded with his fakes
    // and hopes the reader does not notice
    std::vector<Bytes> padded = allowed;
    for (const Bytes& f : fake_blocks) padded.push_back(f);
    std::shuffle(padded.begin(), padded.end(), var);
    auto forged = core::prove_consistency(own_keys, label, own_blocks, padded, own_records,
                                          own_store);
    bool rejected = !core::check_consistency(label, own_blocks, allowed, forged).ok;

    // dropping an inconvenient entry must not help either
    if (forged.entries.size() > 1) {
      core::ConsistencyProof truncated = forged;
      truncated.entries.erase(truncated.entries.begin() +
                              static_cast<long>(var() % truncated.entries.size()));
      rejected = rejected && !core::check_consistency(label, own_blocks, allowed, truncated).ok;
    }
    out.forged_rejected = out.forged_rejected && rejected;
    if (refused || rejected) out.detections += 1;
  }
  if (honest) {
    out.prover_refused = false;
    out.forged_rejected = false;
  }
  return out;
}

}  // namespace claimchain::sim
