#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lingua/catalog.hpp"
#include "lingua/ranker.hpp"

namespace lingua {

// sqrt of the summed squared signal over every (question, response) cell.
double total_signal(const RealTable& counts, double n, const GlobalBaseline& baseline);
double total_signal(const SymbolHistory& history, const GlobalBaseline& baseline);

// Shot-noise-only bound: signal / sqrt(signal) = sqrt(signal). The true SNR
// is at most this value.
double snr(const RealTable& counts, double n, const GlobalBaseline& baseline);
double snr(const SymbolHistory& history, const GlobalBaseline& baseline);

// Signal normalized by the per-question response total N. Throws EmptySymbol.
double relative_signal(const RealTable& counts, double n, const GlobalBaseline& baseline);
double relative_signal(const SymbolHistory& history, const GlobalBaseline& baseline);

struct SymbolMetrics {
  std::string symbol_id;
  std::string category;
  SymbolKind kind = SymbolKind::base;
  int abstraction_level = 0;
  double total_signal = 0.0;
  double snr = 0.0;
  double relative_signal = 0.0;
  std::size_t history_events = 0;
  std::size_t member_count = 1;
  static constexpr bool snr_upper_bound = true;
};

SymbolMetrics symbol_metrics(const CatalogEntry& entry, const GlobalBaseline& baseline);

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman rank correlation of two paired samples, average-rank ties.
// Throws MismatchedIdSets (length), InvalidArgument (n < 2),
// DegenerateConstantRanking (either side all tied).
double spearman(std::span<const double> a, std::span<const double> b);
// Pairs the two lists by id and correlates their log-scores.
double spearman(const RankedList& a, const RankedList& b);

struct DefinitionPair {
  ProbabilityVector native;
  ProbabilityVector defined;
  std::size_t member_count = 0;  // flattened base symbols behind `defined`
};

struct ValidationOptions {
  double alpha = kDefaultAlpha;
  std::size_t min_members = 4;  // pairs whose definition is smaller are dropped
  bool allow_partial = false;
};

struct ValidationResult {
  std::vector<double> per_user;
  double mean = 0.0;
  std::size_t pairs_used = 0;
};

// For each user, ranks the native items and their defined counterparts and
// correlates the two rankings; reports the per-user values and their mean.
ValidationResult validate_definitions(std::span<const DefinitionPair> pairs,
                                      std::span<const AnswerVector> users,
                                      const ValidationOptions& options = {});
// Looks up native and defined ids (paired by position) in the catalog.
ValidationResult validate_definitions(const Catalog& catalog,
                                      const std::vector<std::string>& native_ids,
                                      const std::vector<std::string>& defined_ids,
                                      std::span<const AnswerVector> users,
                                      const ValidationOptions& options = {});

struct CategorySummary {
  std::string category;
  int abstraction_level = 0;
  std::size_t count = 0;
  double avg_relative_signal = 0.0;
  double avg_snr = 0.0;
  double avg_history = 0.0;
};

struct MetricsReport {
  std::vector<SymbolMetrics> rows;         // grouped in category order
  std::vector<CategorySummary> categories;  // descending abstraction
};

struct ReportOptions {
  std::optional<std::string> category;
  bool include_inverse = false;
  // Pruning thresholds; unset means no pruning. Member bounds apply to
  // meta-symbols only.
  std::optional<std::size_t> min_history;
  std::optional<std::size_t> min_members;
  std::optional<std::size_t> max_members;
};

MetricsReport metrics_report(const Catalog& catalog, const ReportOptions& options = {});

std::string report_to_tsv(const MetricsReport& report);
nlohmann::json report_to_json(const MetricsReport& report);
nlohmann::json metrics_to_json(const SymbolMetrics& metrics);

}  // namespace lingua
