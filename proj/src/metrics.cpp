#include "lingua/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "lingua/lexicon.hpp"

namespace lingua {

double total_signal(const RealTable& counts, double n, const GlobalBaseline& baseline) {
  const RealTable signal = signal_of(counts, n, baseline);
  double sum = 0.0;
  for (double s : signal.cells()) sum += s * s;
  return std::sqrt(sum);
}

double total_signal(const SymbolHistory& history, const GlobalBaseline& baseline) {
  return total_signal(history.counts.cast<double>(), static_cast<double>(history.user_count()),
                      baseline);
}

double snr(const RealTable& counts, double n, const GlobalBaseline& baseline) {
  return std::sqrt(total_signal(counts, n, baseline));
}

double snr(const SymbolHistory& history, const GlobalBaseline& baseline) {
  return std::sqrt(total_signal(history, baseline));
}

double relative_signal(const RealTable& counts, double n, const GlobalBaseline& baseline) {
  if (!(n > 0.0)) throw Error(ErrorCode::EmptySymbol, "relative signal of an empty history");
  const RealTable signal = signal_of(counts, n, baseline);
  double sum = 0.0;
  for (double s : signal.cells()) sum += (s / n) * (s / n);
  return std::sqrt(sum);
}

double relative_signal(const SymbolHistory& history, const GlobalBaseline& baseline) {
  return relative_signal(history.counts.cast<double>(), static_cast<double>(history.user_count()),
                         baseline);
}

SymbolMetrics symbol_metrics(const CatalogEntry& entry, const GlobalBaseline& baseline) {
  SymbolMetrics m;
  m.symbol_id = entry.id;
  m.category = entry.category;
  m.kind = entry.kind;
  m.abstraction_level = entry.abstraction_level;
  m.history_events = entry.events();
  m.member_count = entry.member_count;
  const double n = static_cast<double>(entry.events());
  m.total_signal = total_signal(entry.counts, n, baseline);
  m.snr = std::sqrt(m.total_signal);
  m.relative_signal = n > 0.0 ? relative_signal(entry.counts, n, baseline) : 0.0;
  return m;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::MismatchedIdSets, "rankings differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "spearman needs at least two items");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);

  const auto has_ties = [](const std::vector<double>& r) {
    std::vector<double> sorted(r);
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
  };
  const auto constant = [](const std::vector<double>& r) {
    return std::all_of(r.begin(), r.end(), [&](double v) { return v == r.front(); });
  };
  if (constant(ra) || constant(rb))
    throw Error(ErrorCode::DegenerateConstantRanking, "a ranking is constant");

  const double dn = static_cast<double>(n);
  if (!has_ties(ra) && !has_ties(rb)) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
    const double denom = dn * (dn * dn - 1.0);
    return (denom - 6.0 * d2) / denom;
  }
  const double mean = (dn + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ra[i] - mean;
    const double y = rb[i] - mean;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double spearman(const RankedList& a, const RankedList& b) {
  if (a.entries.size() != b.entries.size())
    throw Error(ErrorCode::MismatchedIdSets, "rankings cover different ids");
  std::map<std::string, double> other;
  for (const auto& e : b.entries) other.emplace(e.id, e.log_score);
  std::vector<double> xs, ys;
  for (const auto& e : a.entries) {
    auto it = other.find(e.id);
    if (it == other.end())
      throw Error(ErrorCode::MismatchedIdSets, "id '" + e.id + "' missing from second ranking");
    xs.push_back(e.log_score);
    ys.push_back(it->second);
  }
  return spearman(xs, ys);
}

ValidationResult validate_definitions(std::span<const DefinitionPair> pairs,
                                      std::span<const AnswerVector> users,
                                      const ValidationOptions& options) {
  std::vector<const DefinitionPair*> kept;
  for (const auto& pair : pairs)
    if (pair.member_count >= options.min_members) kept.push_back(&pair);
  if (kept.size() < 2)
    throw Error(ErrorCode::InvalidArgument,
                "validation needs at least two definition pairs after filtering");

  ValidationResult result;
  result.pairs_used = kept.size();
  std::vector<double> native(kept.size()), defined(kept.size());
  for (const auto& user : users) {
    for (std::size_t i = 0; i < kept.size(); ++i) {
      native[i] = score(kept[i]->native, user, options.alpha, options.allow_partial);
      defined[i] = score(kept[i]->defined, user, options.alpha, options.allow_partial);
    }
    result.per_user.push_back(spearman(native, defined));
  }
  if (!result.per_user.empty())
    result.mean = std::accumulate(result.per_user.begin(), result.per_user.end(), 0.0) /
                  static_cast<double>(result.per_user.size());
  return result;
}

ValidationResult validate_definitions(const Catalog& catalog,
                                      const std::vector<std::string>& native_ids,
                                      const std::vector<std::string>& defined_ids,
                                      std::span<const AnswerVector> users,
                                      const ValidationOptions& options) {
  if (native_ids.size() != defined_ids.size())
    throw Error(ErrorCode::MismatchedIdSets, "native and defined lists differ in length");
  std::vector<DefinitionPair> pairs;
  for (std::size_t i = 0; i < native_ids.size(); ++i) {
    const auto& native = catalog.at(native_ids[i]);
    const auto& defined = catalog.at(defined_ids[i]);
    pairs.push_back({native.probs, defined.probs, defined.member_count});
  }
  return validate_definitions(pairs, users, options);
}

MetricsReport metrics_report(const Catalog& catalog, const ReportOptions& options) {
  if (options.category && !catalog.categories().count(*options.category))
    throw Error(ErrorCode::UnknownFocusCategory, "unknown category '" + *options.category + "'");

  std::map<std::string, std::vector<SymbolMetrics>> by_category;
  for (const auto& entry : catalog.entries()) {
    if (entry.kind == SymbolKind::inverse && !options.include_inverse &&
        !(options.category && *options.category == entry.category))
      continue;
    if (options.category && entry.category != *options.category) continue;
    if (options.min_history && entry.events() < *options.min_history) continue;
    if (entry.kind != SymbolKind::base) {
      if (options.min_members && entry.member_count < *options.min_members) continue;
      if (options.max_members && entry.member_count > *options.max_members) continue;
    }
    by_category[entry.category].push_back(symbol_metrics(entry, catalog.baseline()));
  }

  MetricsReport report;
  for (auto& [category, rows] : by_category) {
    CategorySummary summary;
    summary.category = category;
    summary.count = rows.size();
    for (const auto& row : rows) {
      summary.abstraction_level = std::max(summary.abstraction_level, row.abstraction_level);
      summary.avg_relative_signal += row.relative_signal;
      summary.avg_snr += row.snr;
      summary.avg_history += static_cast<double>(row.history_events);
    }
    const double n = static_cast<double>(rows.size());
    summary.avg_relative_signal /= n;
    summary.avg_snr /= n;
    summary.avg_history /= n;
    report.categories.push_back(summary);
  }
  std::stable_sort(report.categories.begin(), report.categories.end(),
                   [](const CategorySummary& a, const CategorySummary& b) {
                     if (a.abstraction_level != b.abstraction_level)
                       return a.abstraction_level > b.abstraction_level;
                     return a.category < b.category;
                   });
  for (const auto& summary : report.categories)
    for (auto& row : by_category[summary.category]) report.rows.push_back(std::move(row));
  return report;
}

namespace {

std::string fixed(double v, int precision = 6) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(precision);
  out << v;
  return out.str();
}

}  // namespace

std::string report_to_tsv(const MetricsReport& report) {
  std::ostringstream out;
  out << "# category summary (snr is an upper bound)\n";
  out << "category\tabstraction_level\tcount\tavg_relative_signal\tavg_snr\tavg_history\n";
  for (const auto& c : report.categories)
    out << c.category << '\t' << c.abstraction_level << '\t' << c.count << '\t'
        << fixed(c.avg_relative_signal) << '\t' << fixed(c.avg_snr) << '\t'
        << fixed(c.avg_history, 2) << '\n';
  out << "\nid\tcategory\trelative_signal\tsnr\thistory_events\tmember_count\n";
  for (const auto& r : report.rows)
    out << r.symbol_id << '\t' << r.category << '\t' << fixed(r.relative_signal) << '\t'
        << fixed(r.snr) << '\t' << r.history_events << '\t' << r.member_count << '\n';
  return out.str();
}

nlohmann::json metrics_to_json(const SymbolMetrics& m) {
  return {{"id", m.symbol_id},
          {"category", m.category},
          {"kind", std::string(to_string(m.kind))},
          {"abstraction_level", m.abstraction_level},
          {"total_signal", m.total_signal},
          {"snr", m.snr},
          {"upper_bound", SymbolMetrics::snr_upper_bound},
          {"relative_signal", m.relative_signal},
          {"history_events", m.history_events},
          {"member_count", m.member_count}};
}

nlohmann::json report_to_json(const MetricsReport& report) {
  nlohmann::json categories = nlohmann::json::array();
  for (const auto& c : report.categories)
    categories.push_back({{"category", c.category},
                          {"abstraction_level", c.abstraction_level},
                          {"count", c.count},
                          {"avg_relative_signal", c.avg_relative_signal},
                          {"avg_snr", c.avg_snr},
                          {"avg_history", c.avg_history}});
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) rows.push_back(metrics_to_json(r));
  return {{"format_version", 1},
          {"snr_upper_bound", true},
          {"categories", std::move(categories)},
          {"rows", std::move(rows)}};
}

}  // namespace lingua
