#include "lingua/ranker.hpp"

#include <algorithm>
#include <cmath>

namespace lingua {

double score(const ProbabilityVector& pv, const AnswerVector& answers, double alpha,
             bool allow_partial) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
  if (!(pv.prior > 0.0))
    throw Error(ErrorCode::InvalidArgument, "symbol '" + pv.symbol_id + "' has no prior");
  const std::size_t questions = pv.p.questions();
  if (answers.choices.size() != questions)
    throw Error(ErrorCode::IncompleteAnswers,
                "expected " + std::to_string(questions) + " answers, got " +
                    std::to_string(answers.choices.size()));

  double total = alpha * std::log(pv.prior);
  for (std::size_t q = 0; q < questions; ++q) {
    const int choice = answers.choices[q];
    if (choice == AnswerVector::kUnanswered) {
      if (allow_partial) continue;
      throw Error(ErrorCode::IncompleteAnswers, "question " + std::to_string(q + 1) + " unanswered");
    }
    const auto row = pv.p.row(q);
    if (choice < 0 || static_cast<std::size_t>(choice) >= row.size())
      throw Error(ErrorCode::UnknownOption, "answer index out of range");
    total += std::log(std::max(row[static_cast<std::size_t>(choice)], kProbabilityFloor));
  }
  return total;
}

std::vector<std::string> RankedList::ids() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.id);
  return out;
}

RankedList rank_candidates(std::span<const Candidate> candidates, const AnswerVector& answers,
                           double alpha, std::optional<std::size_t> limit, bool allow_partial) {
  RankedList list;
  list.alpha = alpha;
  list.entries.reserve(candidates.size());
  for (const auto& c : candidates)
    list.entries.push_back({c.id, score(*c.probs, answers, alpha, allow_partial), c.category, c.kind});
  std::sort(list.entries.begin(), list.entries.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.log_score != b.log_score) return a.log_score > b.log_score;
    return a.id < b.id;
  });
  if (limit && *limit < list.entries.size()) list.entries.resize(*limit);
  return list;
}

RankedList rank(const Catalog& catalog, const AnswerVector& answers, const RankOptions& options) {
  answers.validate(catalog.store().schema(), options.allow_partial);
  if (options.focus) {
    for (const auto& category : *options.focus)
      if (!catalog.categories().count(category))
        throw Error(ErrorCode::UnknownFocusCategory, "unknown focus category '" + category + "'");
  }
  std::vector<Candidate> candidates;
  candidates.reserve(catalog.entries().size());
  for (const auto& entry : catalog.entries()) {
    if (options.focus) {
      if (!options.focus->count(entry.category)) continue;
    } else if (entry.kind == SymbolKind::inverse) {
      continue;
    }
    candidates.push_back({entry.id, entry.category, entry.kind, &entry.probs});
  }
  RankedList list =
      rank_candidates(candidates, answers, options.alpha, options.limit, options.allow_partial);
  list.focus = options.focus;
  return list;
}

RankedList rank(std::shared_ptr<const HistoryStore> store, const Lexicon& lexicon,
                const AnswerVector& answers, const RankOptions& options, double smoothing) {
  CatalogOptions catalog_options;
  catalog_options.smoothing = smoothing;
  catalog_options.inverses = options.focus.has_value();
  const Catalog catalog = Catalog::build(std::move(store), lexicon, catalog_options);
  return rank(catalog, answers, options);
}

}  // namespace lingua
