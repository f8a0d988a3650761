#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "claimchain/bytes.hpp"
#include "claimchain/store.hpp"

// Key-value Merkle tree with unique resolution.  Internal nodes carry a
// pivot key and the hashes of both children; keys strictly below the
// pivot go left, all others right.  Leaves carry the lookup key and the
// hash of the value, with the value itself stored separately in the
// content store.  A resolution path from the root proves either the
// value bound to a key or its absence, and no adversarial store state
// can make two verifying paths disagree.

namespace claimchain::merkle {

struct DuplicateKeyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingNodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using MapRoot = Hash256;

// Root used for a map with no entries; queries against it resolve to
// absent without touching the store.
inline constexpr MapRoot kEmptyRoot{};

struct Node {
  bool leaf = false;
  // internal
  Bytes pivot;
  Hash256 left{};
  Hash256 right{};
  // leaf
  Bytes key;
  Hash256 value_hash{};

  Bytes encode() const;
  static std::optional<Node> decode(BytesView b);
};

// Builds the tree over the given entries, persists every node and value
// in the store, and returns the root hash.  The pivot at each level is
// the median of the sorted keys, so lookups stay logarithmic.
MapRoot build_tree(std::vector<std::pair<Bytes, Bytes>> entries, store::ContentStore& s);

enum class QueryStatus { Found, Absent, Incomplete };

struct QueryResult {
  QueryStatus status = QueryStatus::Incomplete;
  Bytes value;  // set when Found
};

QueryResult query_tree(const MapRoot& root, BytesView key, const store::ContentStore& s);

// Serialized list of node encodings from root to leaf.
struct ResolutionPath {
  std::vector<Bytes> nodes;

  Bytes encode() const;
  static std::optional<ResolutionPath> decode(BytesView b);
  size_t byte_size() const;
};

// Extracts the path for a key; throws MissingNodeError when the walk
// dead-ends.  The path for the empty root has no nodes.
ResolutionPath get_path(const MapRoot& root, BytesView key, const store::ContentStore& s);

// Outcome of checking a path against a root, independent of any store.
struct PathVerdict {
  enum class Kind { Value, Absent, Invalid };
  Kind kind = Kind::Invalid;
  Hash256 value_hash{};  // set for Kind::Value
};

PathVerdict verify_path(const MapRoot& root, BytesView key, const ResolutionPath& path);

}  // namespace claimchain::merkle
