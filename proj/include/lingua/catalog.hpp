#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lingua/history.hpp"
#include "lingua/lexicon.hpp"

namespace lingua {

enum class SymbolKind { base, meta, inverse, user };

std::string_view to_string(SymbolKind kind) noexcept;
SymbolKind kind_from_string(std::string_view text);

inline constexpr std::string_view kBaseCategory = "base";

// One rankable item: a base symbol, a materialized meta-symbol, or an
// inverse of a meta-symbol. Every kind carries a ProbabilityVector so the
// ranker scores them all through the same path.
struct CatalogEntry {
  std::string id;
  std::string name;
  std::string category;
  SymbolKind kind = SymbolKind::base;
  int abstraction_level = 0;
  std::size_t member_count = 1;  // flattened base symbols
  std::string source_id;         // inverses only

  SymbolHistory history;    // for inverses, the source's history
  RealTable counts;         // pseudo-counts for inverses
  ProbabilityVector probs;  // pseudo-probabilities for inverses

  std::size_t events() const noexcept { return history.user_count(); }
};

struct CatalogOptions {
  double smoothing = kDefaultSmoothing;
  bool inverses = true;  // add inverse:<id> for every meta-symbol
};

// Store + lexicon with every meta-symbol materialized once. Immutable.
class Catalog {
 public:
  // Throws EmptyHistory for a store without events.
  static Catalog build(std::shared_ptr<const HistoryStore> store, Lexicon lexicon,
                       CatalogOptions options = {});

  const HistoryStore& store() const noexcept { return *store_; }
  std::shared_ptr<const HistoryStore> store_ptr() const noexcept { return store_; }
  const Lexicon& lexicon() const noexcept { return lexicon_; }
  const GlobalBaseline& baseline() const { return store_->baseline(); }
  const CatalogOptions& options() const noexcept { return options_; }

  const std::vector<CatalogEntry>& entries() const noexcept { return entries_; }
  const CatalogEntry* find(std::string_view id) const;
  // Throws NotFound.
  const CatalogEntry& at(std::string_view id) const;
  const std::set<std::string>& categories() const noexcept { return categories_; }

 private:
  std::shared_ptr<const HistoryStore> store_;
  Lexicon lexicon_;
  CatalogOptions options_;
  std::vector<CatalogEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::set<std::string> categories_;
};

}  // namespace lingua
