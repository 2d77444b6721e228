#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lingua/history.hpp"
#include "lingua/lexicon.hpp"
#include "lingua/schema.hpp"

namespace lingua::io {

inline constexpr int kFormatVersion = 1;

using nlohmann::json;

// Throws UnsupportedFormat unless doc["format_version"] == 1.
void require_format_version(const json& doc, const std::string& what);

json schema_to_json(const SurveySchema& schema);
SurveySchema schema_from_json(const json& doc);

json record_to_json(const InteractionRecord& record);

struct EventLog {
  std::vector<InteractionRecord> records;
  std::vector<std::size_t> lines;    // 1-based source line of each record
  std::vector<RecordIssue> issues;  // parse failures, index = 1-based line number
};

// Line-delimited: a header line {"format_version":1}, then one record per
// line {user_id, answers:[option indices], satisfied:[symbol ids]}.
// Semantic validation against a schema is ingest()'s job.
EventLog read_event_log(std::istream& in);
void write_event_log(std::ostream& out, std::span<const InteractionRecord> records);

// Answer documents accept {"answers": {question_id: option_id}} or
// {"answers": [index, ...]} (null marks an unanswered question).
AnswerVector answers_from_json(const json& answers, const SurveySchema& schema,
                               bool allow_partial = false);

json lexicon_to_json(const std::vector<MetaSymbolDef>& defs);
std::vector<MetaSymbolDef> lexicon_from_json(const json& doc);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// One id per line; blank lines and '#' comments ignored.
std::vector<std::string> read_id_list(const std::filesystem::path& path);

}  // namespace lingua::io
