#include "lingua/snapshot.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>

#include "lingua/io.hpp"

namespace lingua {

using nlohmann::json;

namespace {

json table_to_json(const CountTable& table) {
  json rows = json::array();
  for (std::size_t q = 0; q < table.shape().questions(); ++q) {
    const auto row = table.row(q);
    rows.push_back(std::vector<std::int64_t>(row.begin(), row.end()));
  }
  return rows;
}

}  // namespace

Catalog ModelSnapshot::catalog(bool inverses) const {
  return Catalog::build(store, lexicon, {metadata.smoothing, inverses});
}

std::string build_timestamp() {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch)
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  else
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json snapshot_to_json(const ModelSnapshot& snapshot) {
  const HistoryStore& store = *snapshot.store;
  json users = json::array();
  for (const auto& user : store.users())
    users.push_back({{"id", user.id}, {"answers", user.answers.choices}});
  json symbols = json::array();
  for (const auto& [id, history] : store.symbols())
    symbols.push_back(
        {{"id", id}, {"users", history.users}, {"counts", table_to_json(history.counts)}});
  json baseline = nullptr;
  if (!store.empty()) {
    const auto& b = store.baseline();
    json rows = json::array();
    for (std::size_t q = 0; q < b.fractions.shape().questions(); ++q) {
      const auto row = b.fractions.row(q);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    baseline = {{"total_users", b.total_users}, {"fractions", std::move(rows)}};
  }
  return {{"format_version", io::kFormatVersion},
          {"metadata",
           {{"record_count", snapshot.metadata.record_count},
            {"timestamp", snapshot.metadata.timestamp},
            {"smoothing", snapshot.metadata.smoothing},
            {"alpha", snapshot.metadata.alpha},
            {"survey_takers", store.survey_takers()},
            {"user_sets", "exact"}}},
          {"schema", io::schema_to_json(store.schema())},
          {"baseline", std::move(baseline)},
          {"users", std::move(users)},
          {"symbols", std::move(symbols)},
          {"lexicon", io::lexicon_to_json(snapshot.lexicon.definitions())}};
}

ModelSnapshot snapshot_from_json(const json& doc) {
  io::require_format_version(doc, "snapshot");
  ModelSnapshot snapshot;
  try {
    const auto& meta = doc.at("metadata");
    snapshot.metadata.record_count = meta.at("record_count").get<std::size_t>();
    snapshot.metadata.timestamp = meta.value("timestamp", std::string{});
    snapshot.metadata.smoothing = meta.at("smoothing").get<double>();
    snapshot.metadata.alpha = meta.at("alpha").get<double>();
    if (meta.value("user_sets", std::string("exact")) != "exact")
      throw Error(ErrorCode::UnsupportedFormat, "snapshot: only exact user sets are supported");

    SurveySchema schema = io::schema_from_json(doc.at("schema"));
    std::vector<UserRecord> users;
    for (const auto& u : doc.at("users"))
      users.push_back({u.at("id").get<std::string>(), {u.at("answers").get<std::vector<int>>()}});

    std::map<std::string, std::vector<std::uint32_t>> symbol_users;
    std::map<std::string, json> stored_counts;
    for (const auto& s : doc.at("symbols")) {
      const auto id = s.at("id").get<std::string>();
      symbol_users[id] = s.at("users").get<std::vector<std::uint32_t>>();
      stored_counts[id] = s.at("counts");
    }
    auto store = std::make_shared<HistoryStore>(HistoryStore::from_parts(
        std::move(schema), std::move(users), std::move(symbol_users),
        meta.at("survey_takers").get<std::size_t>(), snapshot.metadata.record_count));

    for (const auto& [id, history] : store->symbols())
      if (table_to_json(history.counts) != stored_counts.at(id))
        throw Error(ErrorCode::UnsupportedFormat,
                    "snapshot: stored counts for '" + id + "' disagree with its user set");

    snapshot.store = std::move(store);
    snapshot.lexicon =
        Lexicon::build(io::lexicon_from_json(doc.at("lexicon")), snapshot.store->symbol_ids());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::UnsupportedFormat, std::string("malformed snapshot: ") + e.what());
  }
  return snapshot;
}

void save_snapshot(const ModelSnapshot& snapshot, const std::filesystem::path& path) {
  io::write_text_file(path, snapshot_to_json(snapshot).dump() + "\n");
}

ModelSnapshot load_snapshot(const std::filesystem::path& path) {
  return snapshot_from_json(io::read_json_file(path));
}

}  // namespace lingua
