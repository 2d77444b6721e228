#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lingua/errors.hpp"
#include "lingua/response_table.hpp"
#include "lingua/schema.hpp"

namespace lingua {

inline constexpr double kDefaultSmoothing = 0.5;

struct InteractionRecord {
  std::string user_id;
  AnswerVector answers;
  std::set<std::string> satisfied;  // base-symbol ids, possibly empty

  bool operator==(const InteractionRecord&) const = default;
};

// A user who created at least one satisfaction event.
struct UserRecord {
  std::string id;
  AnswerVector answers;
};

// Tabulated responses of the users who satisfied one symbol. `users`
// holds indices into HistoryStore::users(), sorted ascending.
struct SymbolHistory {
  std::string symbol_id;
  std::vector<std::uint32_t> users;
  CountTable counts;

  std::size_t user_count() const noexcept { return users.size(); }
  bool operator==(const SymbolHistory&) const = default;
};

struct GlobalBaseline {
  RealTable fractions;
  std::size_t total_users = 0;

  // fractions[q][r] * n
  RealTable predicted(double n) const;
};

struct ProbabilityVector {
  std::string symbol_id;
  RealTable p;
  double prior = 0.0;
};

struct RecordIssue {
  std::size_t index = 0;  // position in the input stream
  ErrorCode code = ErrorCode::InvalidRecord;
  std::string message;
};

// Immutable batch model: per-symbol histories plus the baseline over the
// event-creating population. Build with ingest().
class HistoryStore {
 public:
  HistoryStore() = default;

  const SurveySchema& schema() const noexcept { return schema_; }
  const std::vector<UserRecord>& users() const noexcept { return users_; }
  const std::map<std::string, SymbolHistory>& symbols() const noexcept { return symbols_; }

  bool empty() const noexcept { return symbols_.empty(); }
  bool contains(const std::string& symbol_id) const { return symbols_.count(symbol_id) > 0; }
  // Throws UnknownBaseSymbol.
  const SymbolHistory& symbol(const std::string& symbol_id) const;
  std::set<std::string> symbol_ids() const;

  // Users with at least one satisfaction event.
  std::size_t population() const noexcept { return users_.size(); }
  // Every distinct user seen, including those without events.
  std::size_t survey_takers() const noexcept { return survey_takers_; }
  std::size_t record_count() const noexcept { return record_count_; }

  // Throws EmptyHistory when no user created an event.
  const GlobalBaseline& baseline() const;

  // Tabulates the answers of the given users (indices into users()).
  SymbolHistory tabulate(std::string symbol_id, std::vector<std::uint32_t> user_indices) const;

  // Reassembles a store from its persisted parts (used by snapshot loading).
  static HistoryStore from_parts(SurveySchema schema, std::vector<UserRecord> users,
                                 std::map<std::string, std::vector<std::uint32_t>> symbol_users,
                                 std::size_t survey_takers, std::size_t record_count);

 private:
  friend HistoryStore ingest(std::span<const InteractionRecord>, const SurveySchema&);
  void finalize();

  SurveySchema schema_;
  std::vector<UserRecord> users_;
  std::map<std::string, SymbolHistory> symbols_;
  std::optional<GlobalBaseline> baseline_;
  std::size_t survey_takers_ = 0;
  std::size_t record_count_ = 0;
};

// Validates every record and reports all problems (does not throw).
std::vector<RecordIssue> check_records(std::span<const InteractionRecord> records,
                                       const SurveySchema& schema);

// Batch tabulation. Throws the first issue's code with all issues in detail().
HistoryStore ingest(std::span<const InteractionRecord> records, const SurveySchema& schema);

GlobalBaseline baseline(const HistoryStore& store);

// Additive smoothing: (count + eps) / (N + eps * options). `population`
// is the prior denominator (event-creating users).
ProbabilityVector probabilities(const SymbolHistory& history, double smoothing,
                                std::size_t population);
ProbabilityVector probabilities(const SymbolHistory& history, double smoothing,
                                const HistoryStore& store);

}  // namespace lingua
