#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lingua/history.hpp"

namespace lingua {

// A named term defined as a set of base symbols and/or other meta-symbols.
struct MetaSymbolDef {
  std::string id;
  std::string name;
  std::string category;
  std::vector<std::string> members;
  std::optional<int> abstraction_level;

  bool operator==(const MetaSymbolDef&) const = default;
};

struct LexiconIssue {
  ErrorCode code;
  std::string id;
  std::string message;
};

// Immutable, acyclic set of meta-symbol definitions. Any id that is not a
// definition is a base symbol; when the lexicon was built against a known
// base set, ids outside both sets are unknown.
class Lexicon {
 public:
  Lexicon() = default;

  // Validates and throws InvalidLexicon listing every issue in detail().
  static Lexicon build(std::vector<MetaSymbolDef> defs, std::set<std::string> base_ids);
  // Skips validation; flatten() still detects cycles on the way down.
  static Lexicon unchecked(std::vector<MetaSymbolDef> defs);

  // Every problem: duplicates, collisions with base ids, empty or
  // self-referencing definitions, unknown members, and each cycle.
  static std::vector<LexiconIssue> check(const std::vector<MetaSymbolDef>& defs,
                                         const std::set<std::string>& base_ids);

  const std::map<std::string, MetaSymbolDef>& defs() const noexcept { return defs_; }
  const std::set<std::string>& categories() const noexcept { return categories_; }
  const std::set<std::string>& base_ids() const noexcept { return base_ids_; }
  bool empty() const noexcept { return defs_.empty(); }
  bool contains(const std::string& id) const { return defs_.count(id) > 0; }
  const MetaSymbolDef& at(const std::string& id) const;

  std::vector<MetaSymbolDef> definitions() const;
  // Definitions ordered so that members precede the terms that use them.
  std::vector<std::string> topological_order() const;

 private:
  std::map<std::string, MetaSymbolDef> defs_;
  std::set<std::string> categories_;
  std::set<std::string> base_ids_;
};

// Recursive union of members down to base symbols.
// Throws UnknownId, CycleDetected (path in detail()).
std::set<std::string> flatten(std::string_view id, const Lexicon& lexicon);

// History of the deduplicated user union over the flattened base set.
// Throws UnknownBaseSymbol when a member has no history in the store.
SymbolHistory materialize(std::string_view id, const Lexicon& lexicon,
                          const HistoryStore& store);

// counts - fractions * N per cell.
RealTable signal_of(const RealTable& counts, double n, const GlobalBaseline& baseline);
RealTable signal_of(const SymbolHistory& history, const GlobalBaseline& baseline);

// Antonym history reflected through the baseline: 2 * predicted - counts.
struct InverseHistory {
  std::string source_id;
  RealTable pseudo_counts;
  std::size_t user_count = 0;
};

std::string inverse_id(std::string_view source_id);
std::string inverse_category(std::string_view source_category);

InverseHistory invert(const SymbolHistory& history, const GlobalBaseline& baseline);
InverseHistory invert(const InverseHistory& inverse, const GlobalBaseline& baseline);

// pseudo_counts / N; entries may fall outside [0, 1]. Throws EmptySymbol.
RealTable pseudo_probabilities(const InverseHistory& inverse);

}  // namespace lingua
