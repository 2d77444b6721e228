#include "lingua/catalog.hpp"

#include <algorithm>
#include <functional>

namespace lingua {

std::string_view to_string(SymbolKind kind) noexcept {
  switch (kind) {
    case SymbolKind::base: return "base";
    case SymbolKind::meta: return "meta";
    case SymbolKind::inverse: return "inverse";
    case SymbolKind::user: return "user";
  }
  return "base";
}

SymbolKind kind_from_string(std::string_view text) {
  if (text == "base") return SymbolKind::base;
  if (text == "meta") return SymbolKind::meta;
  if (text == "inverse") return SymbolKind::inverse;
  if (text == "user") return SymbolKind::user;
  throw Error(ErrorCode::InvalidArgument, "unknown kind '" + std::string(text) + "'");
}

Catalog Catalog::build(std::shared_ptr<const HistoryStore> store, Lexicon lexicon,
                       CatalogOptions options) {
  if (!store) throw Error(ErrorCode::EmptyStore, "no history store");
  const GlobalBaseline& baseline = store->baseline();

  Catalog catalog;
  catalog.store_ = std::move(store);
  catalog.lexicon_ = std::move(lexicon);
  catalog.options_ = options;
  const HistoryStore& hs = *catalog.store_;

  for (const auto& [id, history] : hs.symbols()) {
    CatalogEntry entry;
    entry.id = id;
    entry.name = id;
    entry.category = std::string(kBaseCategory);
    entry.kind = SymbolKind::base;
    entry.history = history;
    entry.counts = history.counts.cast<double>();
    entry.probs = probabilities(history, options.smoothing, hs);
    catalog.entries_.push_back(std::move(entry));
  }

  // Depth above the base layer, used when a definition carries no level.
  std::map<std::string, int> depth;
  std::function<int(const std::string&)> level_of = [&](const std::string& id) -> int {
    if (!catalog.lexicon_.contains(id)) return 0;
    if (auto it = depth.find(id); it != depth.end()) return it->second;
    int deepest = 0;
    for (const auto& member : catalog.lexicon_.at(id).members)
      if (member != id) deepest = std::max(deepest, level_of(member));
    return depth[id] = deepest + 1;
  };

  std::vector<CatalogEntry> inverses;
  for (const auto& id : catalog.lexicon_.topological_order()) {
    const MetaSymbolDef& def = catalog.lexicon_.at(id);
    CatalogEntry entry;
    entry.id = def.id;
    entry.name = def.name.empty() ? def.id : def.name;
    entry.category = def.category;
    entry.kind = SymbolKind::meta;
    entry.abstraction_level = def.abstraction_level.value_or(level_of(def.id));
    entry.member_count = flatten(def.id, catalog.lexicon_).size();
    entry.history = materialize(def.id, catalog.lexicon_, hs);
    entry.counts = entry.history.counts.cast<double>();
    entry.probs = probabilities(entry.history, options.smoothing, hs);

    if (options.inverses && entry.history.user_count() > 0) {
      CatalogEntry inv;
      inv.id = inverse_id(entry.id);
      inv.name = "not " + entry.name;
      inv.category = inverse_category(entry.category);
      inv.kind = SymbolKind::inverse;
      inv.abstraction_level = entry.abstraction_level;
      inv.member_count = entry.member_count;
      inv.source_id = entry.id;
      inv.history = entry.history;
      const InverseHistory reflected = invert(entry.history, baseline);
      inv.counts = reflected.pseudo_counts;
      inv.probs.symbol_id = inv.id;
      inv.probs.p = pseudo_probabilities(reflected);
      inv.probs.prior = entry.probs.prior;
      inverses.push_back(std::move(inv));
    }
    catalog.entries_.push_back(std::move(entry));
  }
  for (auto& inv : inverses) catalog.entries_.push_back(std::move(inv));

  for (std::size_t i = 0; i < catalog.entries_.size(); ++i) {
    catalog.index_.emplace(catalog.entries_[i].id, i);
    catalog.categories_.insert(catalog.entries_[i].category);
  }
  return catalog;
}

const CatalogEntry* Catalog::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

const CatalogEntry& Catalog::at(std::string_view id) const {
  if (const auto* entry = find(id)) return *entry;
  throw Error(ErrorCode::NotFound, "unknown symbol '" + std::string(id) + "'");
}

}  // namespace lingua
