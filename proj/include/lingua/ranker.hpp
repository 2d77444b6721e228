#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lingua/catalog.hpp"

namespace lingua {

inline constexpr double kDefaultAlpha = 0.25;
inline constexpr double kProbabilityFloor = 1e-9;

// alpha * ln(prior) + sum over answered questions of ln(max(p[q][a_q], floor)).
// alpha = 1 is strict Bayes, alpha = 0 ignores popularity.
// Throws InvalidArgument (alpha outside [0,1], prior <= 0), IncompleteAnswers.
double score(const ProbabilityVector& pv, const AnswerVector& answers, double alpha,
             bool allow_partial = false);

struct RankEntry {
  std::string id;
  double log_score = 0.0;
  std::string category;
  SymbolKind kind = SymbolKind::base;
};

struct RankOptions {
  double alpha = kDefaultAlpha;
  std::optional<std::set<std::string>> focus;
  std::optional<std::size_t> limit;
  // Score over answered questions only; unanswered ones are skipped.
  bool allow_partial = false;
};

// Entries sorted by descending log_score, ties by ascending id.
struct RankedList {
  std::vector<RankEntry> entries;
  double alpha = kDefaultAlpha;
  std::optional<std::set<std::string>> focus;

  std::vector<std::string> ids() const;
};

struct Candidate {
  std::string id;
  std::string category;
  SymbolKind kind = SymbolKind::base;
  const ProbabilityVector* probs = nullptr;
};

// Scores and orders arbitrary candidates; the catalog ranking goes through here.
RankedList rank_candidates(std::span<const Candidate> candidates, const AnswerVector& answers,
                           double alpha, std::optional<std::size_t> limit = std::nullopt,
                           bool allow_partial = false);

// Without focus, base symbols and meta-symbols are ranked; inverse entries
// only appear when the focus names an inverse category.
// Throws UnknownFocusCategory.
RankedList rank(const Catalog& catalog, const AnswerVector& answers, const RankOptions& options = {});

RankedList rank(std::shared_ptr<const HistoryStore> store, const Lexicon& lexicon,
                const AnswerVector& answers, const RankOptions& options = {},
                double smoothing = kDefaultSmoothing);

}  // namespace lingua
