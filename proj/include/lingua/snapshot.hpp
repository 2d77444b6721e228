#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "json.hpp"
#include "lingua/catalog.hpp"
#include "lingua/history.hpp"
#include "lingua/lexicon.hpp"
#include "lingua/ranker.hpp"

namespace lingua {

struct SnapshotMetadata {
  std::size_t record_count = 0;
  std::string timestamp;  // ISO 8601 UTC
  double smoothing = kDefaultSmoothing;
  double alpha = kDefaultAlpha;
};

// A built model: immutable store plus the lexicon attached to it. User
// sets are persisted as exact index lists.
struct ModelSnapshot {
  std::shared_ptr<const HistoryStore> store;
  Lexicon lexicon;
  SnapshotMetadata metadata;

  Catalog catalog(bool inverses = true) const;
};

// SOURCE_DATE_EPOCH when set (reproducible builds), otherwise the clock.
std::string build_timestamp();

nlohmann::json snapshot_to_json(const ModelSnapshot& snapshot);
// Re-tabulates every history and checks it against the stored counts.
// Throws UnsupportedFormat on a version or integrity mismatch.
ModelSnapshot snapshot_from_json(const nlohmann::json& doc);

void save_snapshot(const ModelSnapshot& snapshot, const std::filesystem::path& path);
ModelSnapshot load_snapshot(const std::filesystem::path& path);

}  // namespace lingua
