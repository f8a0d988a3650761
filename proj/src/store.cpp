#include "claimchain/store.hpp"

#include <fstream>
#include <mutex>

#include "claimchain/crypto.hpp"

namespace claimchain::store {

namespace {

constexpr char kMagic[4] = {'C', 'C', 'S', 'F'};
constexpr std::uint8_t kFormatVersion = 1;

}  // namespace

void ContentStore::open_file(const std::filesystem::path& path) {
  std::unique_lock lk(mu_);
  backing_ = path;
  file_backed_ = true;
  std::ifstream in(path, std::ios::binary);
  if (in) {
    Bytes all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    wire::Reader r(all);
    while (r.ok() && !r.at_end()) {
      BytesView value = r.bytes();
      if (!r.ok()) throw IntegrityError("truncated store file");
      Hash256 key = crypto::hash(value);
      auto [it, inserted] = entries_.emplace(key, Bytes(value.begin(), value.end()));
      if (inserted) value_bytes_ += value.size();
    }
  }
}

void ContentStore::clone_into(ContentStore& dst) const {
  std::shared_lock lk(mu_);
  std::unique_lock dlk(dst.mu_);
  dst.entries_ = entries_;
  dst.value_bytes_ = value_bytes_;
}

Hash256 ContentStore::put(BytesView value) {
  Hash256 key = crypto::hash(value);
  std::unique_lock lk(mu_);
  auto [it, inserted] = entries_.emplace(key, Bytes(value.begin(), value.end()));
  if (inserted) {
    value_bytes_ += value.size();
    if (file_backed_) persist(key, value);
  }
  return key;
}

std::optional<Bytes> ContentStore::get(const Hash256& key) const {
  std::shared_lock lk(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  // Re-verify on read so damaged or adversarial entries never reach a
  // caller as valid content.
  if (crypto::hash(it->second) != key) return std::nullopt;
  return it->second;
}

LookupStatus ContentStore::status(const Hash256& key) const {
  std::shared_lock lk(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return LookupStatus::Missing;
  return crypto::hash(it->second) == key ? LookupStatus::Found : LookupStatus::Corrupt;
}

bool ContentStore::contains(const Hash256& key) const {
  std::shared_lock lk(mu_);
  return entries_.count(key) != 0;
}

size_t ContentStore::size() const {
  std::shared_lock lk(mu_);
  return entries_.size();
}

size_t ContentStore::total_value_bytes() const {
  std::shared_lock lk(mu_);
  return value_bytes_;
}

void ContentStore::for_each(const std::function<void(const Hash256&, const Bytes&)>& fn) const {
  std::shared_lock lk(mu_);
  for (const auto& [k, v] : entries_) fn(k, v);
}

void ContentStore::insert_unchecked(const Hash256& key, BytesView value) {
  std::unique_lock lk(mu_);
  auto it = entries_.find(key);
  if (it != entries_.end()) {
    value_bytes_ -= it->second.size();
    it->second.assign(value.begin(), value.end());
  } else {
    entries_.emplace(key, Bytes(value.begin(), value.end()));
  }
  value_bytes_ += value.size();
}

void ContentStore::erase(const Hash256& key) {
  std::unique_lock lk(mu_);
  auto it = entries_.find(key);
  if (it != entries_.end()) {
    value_bytes_ -= it->second.size();
    entries_.erase(it);
  }
}

Bytes ContentStore::export_subset(std::span<const Hash256> keys) const {
  std::shared_lock lk(mu_);
  wire::Writer w;
  w.raw(BytesView(reinterpret_cast<const std::uint8_t*>(kMagic), 4));
  w.u8(kFormatVersion);
  std::uint32_t count = 0;
  wire::Writer body;
  for (const Hash256& k : keys) {
    auto it = entries_.find(k);
    if (it == entries_.end()) continue;
    if (crypto::hash(it->second) != k) continue;
    body.raw(k);
    body.bytes(it->second);
    ++count;
  }
  w.u32(count);
  w.raw(body.data());
  return w.take();
}

Bytes ContentStore::export_all() const {
  std::vector<Hash256> keys;
  {
    std::shared_lock lk(mu_);
    keys.reserve(entries_.size());
    for (const auto& [k, v] : entries_) keys.push_back(k);
  }
  return export_subset(keys);
}

size_t ContentStore::import_fragment(BytesView fragment) {
  wire::Reader r(fragment);
  BytesView magic = r.raw(4);
  if (!r.ok() || std::memcmp(magic.data(), kMagic, 4) != 0)
    throw IntegrityError("bad fragment magic");
  std::uint8_t version = r.u8();
  if (!r.ok() || version != kFormatVersion) throw IntegrityError("unsupported fragment version");
  std::uint32_t count = r.u32();

  // Verify everything before admitting anything: a forged pair must not
  // leave a partial import behind.
  std::vector<std::pair<Hash256, Bytes>> staged;
  staged.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Hash256 key = r.fixed<32>();
    BytesView value = r.bytes();
    if (!r.ok()) throw IntegrityError("truncated fragment");
    if (crypto::hash(value) != key) throw IntegrityError("fragment entry hash mismatch");
    staged.emplace_back(key, Bytes(value.begin(), value.end()));
  }
  if (!r.at_end()) throw IntegrityError("trailing bytes in fragment");

  std::unique_lock lk(mu_);
  for (auto& [k, v] : staged) {
    auto [it, inserted] = entries_.emplace(k, std::move(v));
    if (inserted) {
      value_bytes_ += it->second.size();
      if (file_backed_) persist(k, it->second);
    }
  }
  return staged.size();
}

void ContentStore::persist(const Hash256& key, BytesView value) {
  (void)key;
  std::ofstream out(backing_, std::ios::binary | std::ios::app);
  if (!out) throw IntegrityError("cannot append to store file");
  wire::Writer w;
  w.bytes(value);
  out.write(reinterpret_cast<const char*>(w.data().data()),
            static_cast<std::streamsize>(w.data().size()));
}

}  // namespace claimchain::store
