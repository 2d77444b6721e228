#include "lingua/history.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace lingua {

RealTable GlobalBaseline::predicted(double n) const {
  RealTable out = fractions;
  for (double& v : out.cells()) v *= n;
  return out;
}

const SymbolHistory& HistoryStore::symbol(const std::string& symbol_id) const {
  auto it = symbols_.find(symbol_id);
  if (it == symbols_.end())
    throw Error(ErrorCode::UnknownBaseSymbol, "no history for symbol '" + symbol_id + "'");
  return it->second;
}

std::set<std::string> HistoryStore::symbol_ids() const {
  std::set<std::string> ids;
  for (const auto& [id, _] : symbols_) ids.insert(id);
  return ids;
}

const GlobalBaseline& HistoryStore::baseline() const {
  if (!baseline_) throw Error(ErrorCode::EmptyHistory, "no satisfaction events in history");
  return *baseline_;
}

SymbolHistory HistoryStore::tabulate(std::string symbol_id,
                                     std::vector<std::uint32_t> user_indices) const {
  SymbolHistory h;
  h.symbol_id = std::move(symbol_id);
  h.counts = CountTable(schema_.shape());
  for (std::uint32_t u : user_indices) {
    const auto& choices = users_.at(u).answers.choices;
    for (std::size_t q = 0; q < choices.size(); ++q)
      ++h.counts(q, static_cast<std::size_t>(choices[q]));
  }
  h.users = std::move(user_indices);
  return h;
}

void HistoryStore::finalize() {
  if (users_.empty()) {
    baseline_.reset();
    return;
  }
  CountTable totals(schema_.shape());
  for (const auto& user : users_)
    for (std::size_t q = 0; q < user.answers.choices.size(); ++q)
      ++totals(q, static_cast<std::size_t>(user.answers.choices[q]));
  GlobalBaseline b;
  b.total_users = users_.size();
  b.fractions = totals.cast<double>();
  for (double& v : b.fractions.cells()) v /= static_cast<double>(users_.size());
  baseline_ = std::move(b);
}

HistoryStore HistoryStore::from_parts(SurveySchema schema, std::vector<UserRecord> users,
                                      std::map<std::string, std::vector<std::uint32_t>> symbol_users,
                                      std::size_t survey_takers, std::size_t record_count) {
  HistoryStore store;
  store.schema_ = std::move(schema);
  store.users_ = std::move(users);
  for (const auto& user : store.users_) user.answers.validate(store.schema_);
  for (auto& [id, members] : symbol_users) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (auto u : members)
      if (u >= store.users_.size())
        throw Error(ErrorCode::InvalidRecord, "symbol '" + id + "' references missing user");
    store.symbols_.emplace(id, store.tabulate(id, std::move(members)));
  }
  store.survey_takers_ = survey_takers;
  store.record_count_ = record_count;
  store.finalize();
  return store;
}

std::vector<RecordIssue> check_records(std::span<const InteractionRecord> records,
                                       const SurveySchema& schema) {
  std::vector<RecordIssue> issues;
  std::unordered_map<std::string, std::size_t> first_seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& record = records[i];
    if (record.user_id.empty()) {
      issues.push_back({i, ErrorCode::InvalidRecord, "empty user_id"});
      continue;
    }
    try {
      record.answers.validate(schema);
    } catch (const Error& e) {
      issues.push_back({i, e.code(), "user '" + record.user_id + "': " + e.what()});
      continue;
    }
    auto [it, inserted] = first_seen.emplace(record.user_id, i);
    if (!inserted && !(records[it->second] == record)) {
      issues.push_back({i, ErrorCode::ConflictingDuplicateUser,
                        "user '" + record.user_id + "' conflicts with record " +
                            std::to_string(it->second)});
    }
  }
  return issues;
}

HistoryStore ingest(std::span<const InteractionRecord> records, const SurveySchema& schema) {
  const auto issues = check_records(records, schema);
  if (!issues.empty()) {
    std::ostringstream detail;
    for (const auto& issue : issues)
      detail << "record " << issue.index << ": " << to_string(issue.code) << ": "
             << issue.message << "\n";
    throw Error(issues.front().code,
                std::to_string(issues.size()) + " invalid record(s); first: " +
                    issues.front().message,
                detail.str());
  }

  // Canonical order: unique users sorted by id, so tabulation is
  // independent of record order.
  std::map<std::string, const InteractionRecord*> unique;
  for (const auto& record : records) unique.emplace(record.user_id, &record);

  HistoryStore store;
  store.schema_ = schema;
  store.record_count_ = records.size();
  store.survey_takers_ = unique.size();

  std::map<std::string, std::vector<std::uint32_t>> symbol_users;
  for (const auto& [id, record] : unique) {
    if (record->satisfied.empty()) continue;
    const auto index = static_cast<std::uint32_t>(store.users_.size());
    store.users_.push_back({id, record->answers});
    for (const auto& symbol : record->satisfied) symbol_users[symbol].push_back(index);
  }
  for (auto& [id, members] : symbol_users)
    store.symbols_.emplace(id, store.tabulate(id, std::move(members)));
  store.finalize();
  return store;
}

GlobalBaseline baseline(const HistoryStore& store) { return store.baseline(); }

ProbabilityVector probabilities(const SymbolHistory& history, double smoothing,
                                std::size_t population) {
  if (smoothing < 0.0) throw Error(ErrorCode::InvalidArgument, "smoothing must be >= 0");
  const auto n = static_cast<double>(history.user_count());
  if (history.user_count() == 0 && smoothing == 0.0)
    throw Error(ErrorCode::EmptySymbol,
                "symbol '" + history.symbol_id + "' has no history and no smoothing");
  ProbabilityVector pv;
  pv.symbol_id = history.symbol_id;
  pv.p = RealTable(history.counts.shape());
  for (std::size_t q = 0; q < history.counts.questions(); ++q) {
    const auto counts = history.counts.row(q);
    const double denom = n + smoothing * static_cast<double>(counts.size());
    auto out = pv.p.row(q);
    for (std::size_t r = 0; r < counts.size(); ++r)
      out[r] = (static_cast<double>(counts[r]) + smoothing) / denom;
  }
  pv.prior = population == 0 ? 0.0 : n / static_cast<double>(population);
  return pv;
}

ProbabilityVector probabilities(const SymbolHistory& history, double smoothing,
                                const HistoryStore& store) {
  return probabilities(history, smoothing, store.population());
}

}  // namespace lingua
