#include "aceg/buffers/manifest.hpp"

#include "aceg/common/error.hpp"

namespace aceg::buf {

KeyValues Manifest::to_kv() const {
  KeyValues kv = meta;
  kv.set("tuples", static_cast<std::int64_t>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto p = "tuple." + std::to_string(i) + ".";
    kv.set(p + "id", entries[i].id);
    kv.set(p + "scene", entries[i].scene);
    kv.set(p + "M", entries[i].mapping);
    kv.set(p + "Q", entries[i].query);
    kv.set(p + "split", entries[i].split);
  }
  return kv;
}

Manifest Manifest::from_kv(const KeyValues& kv) {
  Manifest m;
  const auto n = kv.get_int("tuples");
  if (n < 0) throw ConfigError("manifest: negative tuple count");
  for (std::int64_t i = 0; i < n; ++i) {
    const auto p = "tuple." + std::to_string(i) + ".";
    m.entries.push_back({kv.get_string(p + "id"), kv.get_string(p + "scene"), kv.get_string(p + "M"),
                         kv.get_string(p + "Q"), kv.get_string(p + "split", "train")});
  }
  for (const auto& [k, v] : kv.entries()) {
    if (k != "tuples" && k.rfind("tuple.", 0) != 0) m.meta.set(k, v);
  }
  return m;
}

void Manifest::save(const std::filesystem::path& path) const { to_kv().save(path); }

Manifest Manifest::load(const std::filesystem::path& path) { return from_kv(KeyValues::load(path)); }

std::vector<const ManifestEntry*> Manifest::with_split(const std::string& split) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

}  // namespace aceg::buf
