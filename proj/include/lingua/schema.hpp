#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lingua/response_table.hpp"

namespace lingua {

struct Question {
  std::string id;
  std::string text;
  std::vector<std::string> options;  // ordered option ids
};

// Ordered list of survey questions. Always valid once constructed:
// at least one question, at least two options each, unique ids.
class SurveySchema {
 public:
  SurveySchema() = default;
  explicit SurveySchema(std::vector<Question> questions);

  // Builds `count` questions q01..qNN with the yes/sometimes/no option set.
  static SurveySchema with_default_options(std::size_t count);
  static const std::vector<std::string>& default_options();

  const std::vector<Question>& questions() const noexcept { return questions_; }
  std::size_t size() const noexcept { return questions_.size(); }
  bool empty() const noexcept { return questions_.empty(); }
  const ResponseShape& shape() const noexcept { return shape_; }
  std::size_t dimension() const noexcept { return shape_.dim(); }

  // Throws UnknownId / UnknownOption.
  std::size_t question_index(std::string_view question_id) const;
  std::size_t option_index(std::size_t question, std::string_view option_id) const;

  bool operator==(const SurveySchema& other) const;

 private:
  std::vector<Question> questions_;
  ResponseShape shape_;
  std::unordered_map<std::string, std::size_t> index_;
};

// One option index per schema question; kUnanswered marks a gap, which
// only partial ranking accepts.
struct AnswerVector {
  static constexpr int kUnanswered = -1;

  std::vector<int> choices;

  bool complete() const noexcept;
  bool operator==(const AnswerVector&) const = default;

  // Throws IncompleteAnswers (length or gaps, unless partial) and UnknownOption.
  void validate(const SurveySchema& schema, bool allow_partial = false) const;

  static AnswerVector from_map(const SurveySchema& schema,
                               const std::map<std::string, std::string>& answers,
                               bool allow_partial = false);
  std::map<std::string, std::string> to_map(const SurveySchema& schema) const;
};

}  // namespace lingua
