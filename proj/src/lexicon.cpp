#include "lingua/lexicon.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace lingua {

namespace {

std::string join_path(const std::vector<std::string>& path) {
  std::string out;
  for (const auto& id : path) {
    if (!out.empty()) out += " -> ";
    out += id;
  }
  return out;
}

// Tarjan SCC over the definition graph; returns one cycle path per
// non-trivial component.
std::vector<std::vector<std::string>> find_cycles(
    const std::map<std::string, const MetaSymbolDef*>& graph) {
  std::map<std::string, int> index, low;
  std::map<std::string, bool> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> components;
  int counter = 0;

  std::function<void(const std::string&)> connect = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (const auto& w : graph.at(v)->members) {
      if (!graph.count(w) || w == v) continue;
      if (!index.count(w)) {
        connect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> component;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        component.push_back(w);
      } while (w != v);
      if (component.size() > 1) components.push_back(std::move(component));
    }
  };
  for (const auto& [id, _] : graph)
    if (!index.count(id)) connect(id);

  std::vector<std::vector<std::string>> cycles;
  for (auto& component : components) {
    std::sort(component.begin(), component.end());
    const std::set<std::string> in_component(component.begin(), component.end());
    // Walk from the smallest id back to itself inside the component.
    const std::string& start = component.front();
    std::vector<std::string> path{start};
    std::set<std::string> visited{start};
    std::function<bool(const std::string&)> walk = [&](const std::string& v) -> bool {
      for (const auto& w : graph.at(v)->members) {
        if (!in_component.count(w) || w == v) continue;
        if (w == start) {
          path.push_back(w);
          return true;
        }
        if (!visited.insert(w).second) continue;
        path.push_back(w);
        if (walk(w)) return true;
        path.pop_back();
      }
      return false;
    };
    walk(start);
    cycles.push_back(std::move(path));
  }
  return cycles;
}

}  // namespace

std::vector<LexiconIssue> Lexicon::check(const std::vector<MetaSymbolDef>& defs,
                                         const std::set<std::string>& base_ids) {
  std::vector<LexiconIssue> issues;
  std::map<std::string, const MetaSymbolDef*> graph;
  for (const auto& def : defs) {
    if (def.id.empty()) {
      issues.push_back({ErrorCode::InvalidLexicon, def.id, "definition with empty id"});
      continue;
    }
    if (!graph.emplace(def.id, &def).second)
      issues.push_back({ErrorCode::DuplicateId, def.id, "duplicate definition '" + def.id + "'"});
    if (base_ids.count(def.id))
      issues.push_back(
          {ErrorCode::DuplicateId, def.id, "'" + def.id + "' is already a base symbol id"});
  }
  for (const auto& def : defs) {
    if (def.members.empty())
      issues.push_back({ErrorCode::EmptyDefinition, def.id, "'" + def.id + "' has no members"});
    for (const auto& member : def.members) {
      if (member == def.id) {
        issues.push_back({ErrorCode::SelfReference, def.id, "'" + def.id + "' lists itself"});
      } else if (!graph.count(member) && !base_ids.empty() && !base_ids.count(member)) {
        issues.push_back(
            {ErrorCode::UnknownId, def.id, "'" + def.id + "' references unknown id '" + member + "'"});
      }
    }
  }
  for (const auto& cycle : find_cycles(graph))
    issues.push_back({ErrorCode::CycleDetected, cycle.front(), "cycle: " + join_path(cycle)});
  return issues;
}

Lexicon Lexicon::build(std::vector<MetaSymbolDef> defs, std::set<std::string> base_ids) {
  const auto issues = check(defs, base_ids);
  if (!issues.empty()) {
    std::ostringstream detail;
    for (const auto& issue : issues) detail << to_string(issue.code) << ": " << issue.message << "\n";
    throw Error(ErrorCode::InvalidLexicon,
                std::to_string(issues.size()) + " lexicon issue(s); first: " + issues.front().message,
                detail.str());
  }
  Lexicon lexicon = unchecked(std::move(defs));
  lexicon.base_ids_ = std::move(base_ids);
  return lexicon;
}

Lexicon Lexicon::unchecked(std::vector<MetaSymbolDef> defs) {
  Lexicon lexicon;
  for (auto& def : defs) {
    lexicon.categories_.insert(def.category);
    std::string id = def.id;
    lexicon.defs_.insert_or_assign(std::move(id), std::move(def));
  }
  return lexicon;
}

const MetaSymbolDef& Lexicon::at(const std::string& id) const {
  auto it = defs_.find(id);
  if (it == defs_.end()) throw Error(ErrorCode::UnknownId, "unknown meta-symbol '" + id + "'");
  return it->second;
}

std::vector<MetaSymbolDef> Lexicon::definitions() const {
  std::vector<MetaSymbolDef> out;
  out.reserve(defs_.size());
  for (const auto& [_, def] : defs_) out.push_back(def);
  return out;
}

std::vector<std::string> Lexicon::topological_order() const {
  std::vector<std::string> order;
  std::map<std::string, int> state;
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    int& s = state[id];
    if (s == 2) return;
    if (s == 1) throw Error(ErrorCode::CycleDetected, "cycle through '" + id + "'");
    s = 1;
    for (const auto& member : defs_.at(id).members)
      if (defs_.count(member) && member != id) visit(member);
    state[id] = 2;
    order.push_back(id);
  };
  for (const auto& [id, _] : defs_) visit(id);
  return order;
}

std::set<std::string> flatten(std::string_view id, const Lexicon& lexicon) {
  const std::string root(id);
  if (!lexicon.contains(root)) {
    if (!lexicon.base_ids().empty() && !lexicon.base_ids().count(root))
      throw Error(ErrorCode::UnknownId, "unknown id '" + root + "'");
    return {root};
  }
  std::set<std::string> out;
  std::set<std::string> done;
  std::vector<std::string> path;
  std::function<void(const std::string&)> visit = [&](const std::string& current) {
    if (!lexicon.contains(current)) {
      if (!lexicon.base_ids().empty() && !lexicon.base_ids().count(current))
        throw Error(ErrorCode::UnknownId, "unknown id '" + current + "'");
      out.insert(current);
      return;
    }
    if (done.count(current)) return;
    if (auto it = std::find(path.begin(), path.end(), current); it != path.end()) {
      std::vector<std::string> cycle(it, path.end());
      cycle.push_back(current);
      throw Error(ErrorCode::CycleDetected, "cycle while flattening '" + root + "'",
                  join_path(cycle));
    }
    path.push_back(current);
    for (const auto& member : lexicon.at(current).members) visit(member);
    path.pop_back();
    done.insert(current);
  };
  visit(root);
  return out;
}

SymbolHistory materialize(std::string_view id, const Lexicon& lexicon,
                          const HistoryStore& store) {
  const auto bases = flatten(id, lexicon);
  std::vector<char> member(store.users().size(), 0);
  for (const auto& base : bases)
    for (auto u : store.symbol(base).users) member[u] = 1;
  std::vector<std::uint32_t> users;
  for (std::size_t u = 0; u < member.size(); ++u)
    if (member[u]) users.push_back(static_cast<std::uint32_t>(u));
  return store.tabulate(std::string(id), std::move(users));
}

RealTable signal_of(const RealTable& counts, double n, const GlobalBaseline& baseline) {
  if (!(counts.shape() == baseline.fractions.shape()))
    throw Error(ErrorCode::LengthMismatch, "history and baseline shapes differ");
  RealTable out(counts.shape());
  auto c = counts.cells();
  auto f = baseline.fractions.cells();
  auto o = out.cells();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = c[i] - f[i] * n;
  return out;
}

RealTable signal_of(const SymbolHistory& history, const GlobalBaseline& baseline) {
  return signal_of(history.counts.cast<double>(), static_cast<double>(history.user_count()),
                   baseline);
}

std::string inverse_id(std::string_view source_id) { return "inverse:" + std::string(source_id); }

std::string inverse_category(std::string_view source_category) {
  return "inverse:" + std::string(source_category);
}

namespace {

InverseHistory reflect(std::string source_id, const RealTable& counts, std::size_t n,
                       const GlobalBaseline& baseline) {
  InverseHistory inv;
  inv.source_id = std::move(source_id);
  inv.user_count = n;
  inv.pseudo_counts = RealTable(counts.shape());
  auto c = counts.cells();
  auto f = baseline.fractions.cells();
  auto o = inv.pseudo_counts.cells();
  const double total = static_cast<double>(n);
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = 2.0 * f[i] * total - c[i];
  return inv;
}

}  // namespace

InverseHistory invert(const SymbolHistory& history, const GlobalBaseline& baseline) {
  if (!(history.counts.shape() == baseline.fractions.shape()))
    throw Error(ErrorCode::LengthMismatch, "history and baseline shapes differ");
  return reflect(history.symbol_id, history.counts.cast<double>(), history.user_count(), baseline);
}

InverseHistory invert(const InverseHistory& inverse, const GlobalBaseline& baseline) {
  if (!(inverse.pseudo_counts.shape() == baseline.fractions.shape()))
    throw Error(ErrorCode::LengthMismatch, "history and baseline shapes differ");
  return reflect(inverse_id(inverse.source_id), inverse.pseudo_counts, inverse.user_count,
                 baseline);
}

RealTable pseudo_probabilities(const InverseHistory& inverse) {
  if (inverse.user_count == 0)
    throw Error(ErrorCode::EmptySymbol, "inverse of '" + inverse.source_id + "' has no history");
  RealTable out = inverse.pseudo_counts;
  const double n = static_cast<double>(inverse.user_count);
  for (double& v : out.cells()) v /= n;
  return out;
}

}  // namespace lingua
