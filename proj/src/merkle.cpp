#include "claimchain/merkle.hpp"

#include <algorithm>

#include "claimchain/crypto.hpp"

namespace claimchain::merkle {

namespace {

constexpr std::uint8_t kInternalTag = 0x01;
constexpr std::uint8_t kLeafTag = 0x02;

bool key_less(const Bytes& a, const Bytes& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool view_less(BytesView a, BytesView b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

Bytes Node::encode() const {
  wire::Writer w;
  if (leaf) {
    w.u8(kLeafTag);
    w.bytes(key);
    w.raw(value_hash);
  } else {
    w.u8(kInternalTag);
    w.bytes(pivot);
    w.raw(left);
    w.raw(right);
  }
  return w.take();
}

std::optional<Node> Node::decode(BytesView b) {
  wire::Reader r(b);
  Node n;
  std::uint8_t tag = r.u8();
  if (tag == kLeafTag) {
    n.leaf = true;
    BytesView k = r.bytes();
    n.key.assign(k.begin(), k.end());
    n.value_hash = r.fixed<32>();
  } else if (tag == kInternalTag) {
    n.leaf = false;
    BytesView p = r.bytes();
    n.pivot.assign(p.begin(), p.end());
    n.left = r.fixed<32>();
    n.right = r.fixed<32>();
  } else {
    return std::nullopt;
  }
  if (!r.ok() || !r.at_end()) return std::nullopt;
  return n;
}

namespace {

// Entries arrive sorted by key.  Leaves hold value hashes; the values
// themselves were already inserted into the store by build_tree.
Hash256 build_range(std::vector<std::pair<Bytes, Hash256>>& entries, size_t lo, size_t hi,
                    store::ContentStore& s) {
  if (hi - lo == 1) {
    Node leaf;
    leaf.leaf = true;
    leaf.key = entries[lo].first;
    leaf.value_hash = entries[lo].second;
    return s.put(leaf.encode());
  }
  size_t mid = lo + (hi - lo + 1) / 2;  // right-biased median
  Node inner;
  inner.leaf = false;
  inner.pivot = entries[mid].first;
  inner.left = build_range(entries, lo, mid, s);
  inner.right = build_range(entries, mid, hi, s);
  return s.put(inner.encode());
}

}  // namespace

MapRoot build_tree(std::vector<std::pair<Bytes, Bytes>> entries, store::ContentStore& s) {
  if (entries.empty()) throw std::invalid_argument("build_tree over zero entries");
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return key_less(a.first, b.first); });
  for (size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].first == entries[i - 1].first)
      throw DuplicateKeyError("duplicate lookup key " + hex_encode(entries[i].first));
  }
  std::vector<std::pair<Bytes, Hash256>> hashed;
  hashed.reserve(entries.size());
  for (auto& [k, v] : entries) {
    Hash256 vh = s.put(v);
    hashed.emplace_back(std::move(k), vh);
  }
  return build_range(hashed, 0, hashed.size(), s);
}

QueryResult query_tree(const MapRoot& root, BytesView key, const store::ContentStore& s) {
  if (root == kEmptyRoot) return {QueryStatus::Absent, {}};
  Hash256 cursor = root;
  for (;;) {
    std::optional<Bytes> raw = s.get(cursor);
    if (!raw) return {QueryStatus::Incomplete, {}};
    std::optional<Node> node = Node::decode(*raw);
    if (!node) return {QueryStatus::Incomplete, {}};
    if (node->leaf) {
      if (node->key.size() == key.size() &&
          std::equal(key.begin(), key.end(), node->key.begin())) {
        std::optional<Bytes> value = s.get(node->value_hash);
        if (!value) return {QueryStatus::Incomplete, {}};
        return {QueryStatus::Found, std::move(*value)};
      }
      return {QueryStatus::Absent, {}};
    }
    cursor = view_less(key, node->pivot) ? node->left : node->right;
  }
}

Bytes ResolutionPath::encode() const {
  wire::Writer w;
  w.u32(static_cast<std::uint32_t>(nodes.size()));
  for (const Bytes& n : nodes) w.bytes(n);
  return w.take();
}

std::optional<ResolutionPath> ResolutionPath::decode(BytesView b) {
  wire::Reader r(b);
  std::uint32_t n = r.u32();
  if (!r.ok() || n > 100000) return std::nullopt;
  ResolutionPath p;
  p.nodes.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    BytesView nb = r.bytes();
    if (!r.ok()) return std::nullopt;
    p.nodes.emplace_back(nb.begin(), nb.end());
  }
  if (!r.at_end()) return std::nullopt;
  return p;
}

size_t ResolutionPath::byte_size() const {
  size_t total = 4;
  for (const Bytes& n : nodes) total += 4 + n.size();
  return total;
}

ResolutionPath get_path(const MapRoot& root, BytesView key, const store::ContentStore& s) {
  ResolutionPath path;
  if (root == kEmptyRoot) return path;
  Hash256 cursor = root;
  for (;;) {
    std::optional<Bytes> raw = s.get(cursor);
    if (!raw) throw MissingNodeError("tree node absent from store");
    std::optional<Node> node = Node::decode(*raw);
    if (!node) throw MissingNodeError("undecodable tree node");
    path.nodes.push_back(*raw);
    if (node->leaf) return path;
    cursor = view_less(key, node->pivot) ? node->left : node->right;
  }
}

PathVerdict verify_path(const MapRoot& root, BytesView key, const ResolutionPath& path) {
  if (root == kEmptyRoot) {
    // Empty map: the only valid path is the empty one, proving absence.
    if (path.nodes.empty()) return {PathVerdict::Kind::Absent, {}};
    return {PathVerdict::Kind::Invalid, {}};
  }
  if (path.nodes.empty()) return {PathVerdict::Kind::Invalid, {}};

  Hash256 expect = root;
  for (size_t i = 0; i < path.nodes.size(); ++i) {
    const Bytes& raw = path.nodes[i];
    if (crypto::hash(raw) != expect) return {PathVerdict::Kind::Invalid, {}};
    std::optional<Node> node = Node::decode(raw);
    if (!node) return {PathVerdict::Kind::Invalid, {}};
    if (node->leaf) {
      if (i + 1 != path.nodes.size()) return {PathVerdict::Kind::Invalid, {}};
      if (node->key.size() == key.size() &&
          std::equal(key.begin(), key.end(), node->key.begin()))
        return {PathVerdict::Kind::Value, node->value_hash};
      return {PathVerdict::Kind::Absent, {}};
    }
    if (i + 1 == path.nodes.size()) return {PathVerdict::Kind::Invalid, {}};
    expect = view_less(key, node->pivot) ? node->left : node->right;
  }
  return {PathVerdict::Kind::Invalid, {}};
}

}  // namespace claimchain::merkle
