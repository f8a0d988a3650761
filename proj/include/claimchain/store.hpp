#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <stdexcept>

#include "claimchain/bytes.hpp"

// Content-addressable storage: every value lives under the SHA-256 of its
// bytes.  Entries are immutable once inserted.  Subsets of a store
// serialize into fragments that can be shipped to other parties and
// imported with full hash verification.

namespace claimchain::store {

struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LookupStatus { Found, Missing, Corrupt };

class ContentStore {
 public:
  ContentStore() = default;
  ContentStore(const ContentStore&) = delete;
  ContentStore& operator=(const ContentStore&) = delete;

  // Attach a backing file; existing entries are loaded and verified,
  // every later put() is appended.  Call before first use.
  void open_file(const std::filesystem::path& path);

  // Deep copy of the in-memory contents (backing file not carried over).
  void clone_into(ContentStore& dst) const;

  // Insert value under hash(value) and return the key.  Idempotent.
  Hash256 put(BytesView value);

  // Missing and corrupt entries both come back empty; status() separates
  // them when a caller cares.
  std::optional<Bytes> get(const Hash256& key) const;
  LookupStatus status(const Hash256& key) const;

  bool contains(const Hash256& key) const;
  size_t size() const;
  size_t total_value_bytes() const;

  void for_each(const std::function<void(const Hash256&, const Bytes&)>& fn) const;

  // Test hook modelling an adversarial or damaged store: places bytes
  // under an arbitrary key with no hash check.  get() still verifies, so
  // mismatched entries surface as corrupt.
  void insert_unchecked(const Hash256& key, BytesView value);
  void erase(const Hash256& key);

  // Fragment layout: magic, format version, entry count, then one
  // (hash, length-prefixed value) pair per entry.
  Bytes export_subset(std::span<const Hash256> keys) const;
  Bytes export_all() const;

  // Verifies every pair before admitting any; a single forged pair
  // aborts the whole import with IntegrityError.  Returns the number of
  // entries admitted (duplicates of existing keys count as admitted).
  size_t import_fragment(BytesView fragment);

 private:
  void persist(const Hash256& key, BytesView value);

  mutable std::shared_mutex mu_;
  std::map<Hash256, Bytes> entries_;
  size_t value_bytes_ = 0;
  std::filesystem::path backing_;
  bool file_backed_ = false;
};

}  // namespace claimchain::store
