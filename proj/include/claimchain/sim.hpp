#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "claimchain/core.hpp"

// Discrete-event simulation of in-band key distribution over an e-mail
// trace.  Each event is one e-mail; the sender attaches chain data, the
// recipients validate and ingest it, and the simulation records whether
// the e-mail could have been encrypted end-to-end, how diverse the
// evidence about each recipient was, and how many bytes travelled.
//
// Two settings are supported: the private setting runs full chains with
// encrypted cross-references and capabilities; the public setting is the
// web-of-trust baseline where everybody gossips everything in the clear.

namespace claimchain::sim {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TraceEvent {
  std::uint64_t seq = 0;
  std::string timestamp;  // ISO-8601
  std::string sender;
  std::vector<std::string> recipients;
};

// One record per line: ISO-8601 timestamp, sender, semicolon-separated
// recipients, comma-delimited.  Empty lines are skipped.  Events come
// back chronologically sorted with exact duplicate records collapsed.
std::vector<TraceEvent> load_trace(const std::filesystem::path& path);
std::vector<TraceEvent> parse_trace(const std::string& text);

enum class Topology { Dense, Sparse };

// Synthetic community-structured traffic: most mail stays inside a
// user's community, the rest goes to uniformly random users.  Dense
// topology means larger communities and more multi-recipient mail.
std::vector<TraceEvent> synth_trace(size_t users, size_t events, Topology topology,
                                    std::uint64_t seed);

enum class Mode { Private, Public };

struct SimConfig {
  Mode mode = Mode::Private;
  std::uint64_t seed = 0;
  // a user rotates her encryption key after this many participations
  size_t rotation_period = 200;
  size_t window = 1000;
  size_t body_envelope = core::kDefaultClaimBodySize;
  size_t trace_offset = 0;
  bool keep_event_log = true;
};

struct EventRecord {
  std::uint64_t seq = 0;
  std::string sender;
  bool encrypted = false;
  std::vector<size_t> diversity;  // one entry per recipient
  size_t attached_bytes = 0;
  size_t sender_self_storage = 0;
  size_t sender_gossip_storage = 0;
  size_t detections = 0;
};

struct WindowRecord {
  size_t index = 0;
  size_t events = 0;
  double encryption_rate = 0.0;
  double mean_diversity = 0.0;
  double mean_attached_bytes = 0.0;
  size_t max_attached_bytes = 0;
  double mean_self_storage_bytes = 0.0;
  double mean_gossip_storage_bytes = 0.0;
  size_t detections = 0;
};

struct RunResult {
  size_t events = 0;
  double encryption_rate = 0.0;
  size_t detections = 0;
  size_t max_attached_bytes = 0;
  std::vector<WindowRecord> windows;
  std::vector<EventRecord> event_log;  // present when keep_event_log
};

class World {
 public:
  explicit World(const SimConfig& cfg);
  ~World();
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  EventRecord step(const TraceEvent& ev);

  // Runs the four-block equivocation script against fresh scripted
  // participants inside this world and returns how many attempts were
  // detected (check rejected or prover refused).  An honest world that
  // never calls this reports zero detections.
  size_t inject_equivocator(const std::string& attacker, const std::string& target);

  size_t total_detections() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunResult run(std::span<const TraceEvent> trace, const SimConfig& cfg);

// Standalone equivocation scenario used by tests: an attacker shows some
// readers fake cross-references about a target while others were cut out
// of access; the cut-out readers are then re-granted and audit the
// blocks they could not read.  With honest set to true the attacker's
// claims all reference the target's real chain instead.
struct ScenarioOutcome {
  size_t readers = 0;            // re-granted readers who audited the chain
  size_t detections = 0;         // audits that caught the attack
  bool prover_refused = false;   // honest prover logic gave up (attack only)
  bool forged_rejected = false;  // proofs against a padded set failed the check
  bool honest_accepted = false;  // every audit passed (honest only)
};

ScenarioOutcome run_equivocation_scenario(std::uint64_t seed, bool honest);

}  // namespace claimchain::sim
