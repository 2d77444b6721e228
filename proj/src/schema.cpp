#include "lingua/schema.hpp"

#include <cstdio>
#include <set>

#include "lingua/errors.hpp"

namespace lingua {

SurveySchema::SurveySchema(std::vector<Question> questions) : questions_(std::move(questions)) {
  if (questions_.empty()) throw Error(ErrorCode::InvalidSchema, "schema has no questions");
  std::vector<std::size_t> counts;
  counts.reserve(questions_.size());
  for (std::size_t q = 0; q < questions_.size(); ++q) {
    const Question& question = questions_[q];
    if (question.id.empty()) throw Error(ErrorCode::InvalidSchema, "question with empty id");
    if (!index_.emplace(question.id, q).second)
      throw Error(ErrorCode::InvalidSchema, "duplicate question id '" + question.id + "'");
    if (question.options.size() < 2)
      throw Error(ErrorCode::InvalidSchema,
                  "question '" + question.id + "' needs at least two options");
    std::set<std::string> seen;
    for (const auto& option : question.options) {
      if (option.empty() || !seen.insert(option).second)
        throw Error(ErrorCode::InvalidSchema,
                    "question '" + question.id + "' has an empty or duplicate option id");
    }
    counts.push_back(question.options.size());
  }
  shape_ = ResponseShape(counts);
}

const std::vector<std::string>& SurveySchema::default_options() {
  static const std::vector<std::string> options{"yes", "sometimes", "no"};
  return options;
}

SurveySchema SurveySchema::with_default_options(std::size_t count) {
  std::vector<Question> questions;
  questions.reserve(count);
  for (std::size_t q = 0; q < count; ++q) {
    char id[32];
    std::snprintf(id, sizeof(id), "q%02zu", q + 1);
    questions.push_back({id, std::string("Survey question ") + std::to_string(q + 1),
                         default_options()});
  }
  return SurveySchema(std::move(questions));
}

std::size_t SurveySchema::question_index(std::string_view question_id) const {
  auto it = index_.find(std::string(question_id));
  if (it == index_.end())
    throw Error(ErrorCode::UnknownId, "unknown question '" + std::string(question_id) + "'");
  return it->second;
}

std::size_t SurveySchema::option_index(std::size_t question, std::string_view option_id) const {
  const auto& options = questions_.at(question).options;
  for (std::size_t r = 0; r < options.size(); ++r)
    if (options[r] == option_id) return r;
  throw Error(ErrorCode::UnknownOption, "question '" + questions_[question].id +
                                            "' has no option '" + std::string(option_id) + "'");
}

bool SurveySchema::operator==(const SurveySchema& other) const {
  if (questions_.size() != other.questions_.size()) return false;
  for (std::size_t q = 0; q < questions_.size(); ++q) {
    const auto& a = questions_[q];
    const auto& b = other.questions_[q];
    if (a.id != b.id || a.text != b.text || a.options != b.options) return false;
  }
  return true;
}

bool AnswerVector::complete() const noexcept {
  for (int c : choices)
    if (c == kUnanswered) return false;
  return true;
}

void AnswerVector::validate(const SurveySchema& schema, bool allow_partial) const {
  if (choices.size() != schema.size())
    throw Error(ErrorCode::IncompleteAnswers,
                "expected " + std::to_string(schema.size()) + " answers, got " +
                    std::to_string(choices.size()));
  for (std::size_t q = 0; q < choices.size(); ++q) {
    const int c = choices[q];
    if (c == kUnanswered) {
      if (!allow_partial)
        throw Error(ErrorCode::IncompleteAnswers,
                    "question '" + schema.questions()[q].id + "' is unanswered");
      continue;
    }
    if (c < 0 || static_cast<std::size_t>(c) >= schema.shape().options(q))
      throw Error(ErrorCode::UnknownOption, "question '" + schema.questions()[q].id +
                                                "' has no option index " + std::to_string(c));
  }
}

AnswerVector AnswerVector::from_map(const SurveySchema& schema,
                                    const std::map<std::string, std::string>& answers,
                                    bool allow_partial) {
  AnswerVector out;
  out.choices.assign(schema.size(), kUnanswered);
  for (const auto& [question_id, option_id] : answers) {
    const std::size_t q = schema.question_index(question_id);
    out.choices[q] = static_cast<int>(schema.option_index(q, option_id));
  }
  out.validate(schema, allow_partial);
  return out;
}

std::map<std::string, std::string> AnswerVector::to_map(const SurveySchema& schema) const {
  std::map<std::string, std::string> out;
  for (std::size_t q = 0; q < choices.size() && q < schema.size(); ++q) {
    if (choices[q] == kUnanswered) continue;
    out.emplace(schema.questions()[q].id,
                schema.questions()[q].options.at(static_cast<std::size_t>(choices[q])));
  }
  return out;
}

}  // namespace lingua
