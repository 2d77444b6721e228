#pragma once

#include <random>
#include <string>
#include <vector>

#include "lingua/history.hpp"
#include "lingua/schema.hpp"

namespace fixture {

inline lingua::SurveySchema schema(std::size_t questions, std::size_t options = 3) {
  std::vector<lingua::Question> qs;
  for (std::size_t q = 0; q < questions; ++q) {
    lingua::Question question{"q" + std::to_string(q + 1), "question " + std::to_string(q + 1), {}};
    for (std::size_t o = 0; o < options; ++o) question.options.push_back("o" + std::to_string(o));
    qs.push_back(std::move(question));
  }
  return lingua::SurveySchema(std::move(qs));
}

inline std::string sym(std::size_t i) { return "s" + std::to_string(i); }

// Users answer uniformly at random; each satisfies each symbol with
// probability `density` (so some users have no events at all).
inline std::vector<lingua::InteractionRecord> records(std::mt19937_64& rng,
                                                      const lingua::SurveySchema& schema,
                                                      std::size_t users, std::size_t symbols,
                                                      double density = 0.2) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<lingua::InteractionRecord> out;
  for (std::size_t u = 0; u < users; ++u) {
    lingua::InteractionRecord r;
    r.user_id = "u" + std::to_string(u);
    for (std::size_t q = 0; q < schema.size(); ++q) {
      std::uniform_int_distribution<int> pick(0, int(schema.questions()[q].options.size()) - 1);
      r.answers.choices.push_back(pick(rng));
    }
    for (std::size_t s = 0; s < symbols; ++s)
      if (unit(rng) < density) r.satisfied.insert(sym(s));
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<std::size_t> option_counts(const lingua::SurveySchema& schema) {
  std::vector<std::size_t> out;
  for (const auto& q : schema.questions()) out.push_back(q.options.size());
  return out;
}

}  // namespace fixture
