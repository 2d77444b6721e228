#include "lingua/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace lingua::io {

void require_format_version(const json& doc, const std::string& what) {
  if (!doc.is_object() || !doc.contains("format_version"))
    throw Error(ErrorCode::UnsupportedFormat, what + ": missing format_version");
  const auto& v = doc.at("format_version");
  if (!v.is_number_integer() || v.get<int>() != kFormatVersion)
    throw Error(ErrorCode::UnsupportedFormat,
                what + ": unsupported format_version " + v.dump());
}

json schema_to_json(const SurveySchema& schema) {
  json questions = json::array();
  for (const auto& q : schema.questions())
    questions.push_back({{"id", q.id}, {"text", q.text}, {"options", q.options}});
  return {{"format_version", kFormatVersion}, {"questions", std::move(questions)}};
}

SurveySchema schema_from_json(const json& doc) {
  require_format_version(doc, "schema");
  try {
    std::vector<Question> questions;
    for (const auto& q : doc.at("questions")) {
      Question question;
      question.id = q.at("id").get<std::string>();
      question.text = q.value("text", std::string{});
      question.options = q.contains("options") ? q.at("options").get<std::vector<std::string>>()
                                               : SurveySchema::default_options();
      questions.push_back(std::move(question));
    }
    return SurveySchema(std::move(questions));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSchema, std::string("malformed schema: ") + e.what());
  }
}

json record_to_json(const InteractionRecord& record) {
  json answers = json::array();
  for (int c : record.answers.choices) {
    if (c == AnswerVector::kUnanswered)
      answers.push_back(nullptr);
    else
      answers.push_back(c);
  }
  return {{"user_id", record.user_id},
          {"answers", std::move(answers)},
          {"satisfied", std::vector<std::string>(record.satisfied.begin(), record.satisfied.end())}};
}

namespace {

AnswerVector choices_from_array(const json& array) {
  AnswerVector out;
  out.choices.reserve(array.size());
  for (const auto& v : array) {
    if (v.is_null()) {
      out.choices.push_back(AnswerVector::kUnanswered);
    } else if (v.is_number_integer()) {
      out.choices.push_back(v.get<int>());
    } else {
      throw Error(ErrorCode::InvalidRecord, "answer entries must be integers or null");
    }
  }
  return out;
}

}  // namespace

EventLog read_event_log(std::istream& in) {
  EventLog log;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      log.issues.push_back({line_no, ErrorCode::InvalidRecord, std::string("bad JSON: ") + e.what()});
      continue;
    }
    if (!header_seen) {
      require_format_version(doc, "event log header");
      header_seen = true;
      continue;
    }
    try {
      InteractionRecord record;
      record.user_id = doc.at("user_id").get<std::string>();
      record.answers = choices_from_array(doc.at("answers"));
      for (const auto& s : doc.value("satisfied", json::array()))
        record.satisfied.insert(s.get<std::string>());
      log.records.push_back(std::move(record));
      log.lines.push_back(line_no);
    } catch (const json::exception& e) {
      log.issues.push_back({line_no, ErrorCode::InvalidRecord, e.what()});
    } catch (const Error& e) {
      log.issues.push_back({line_no, e.code(), e.what()});
    }
  }
  if (!header_seen && log.issues.empty())
    throw Error(ErrorCode::UnsupportedFormat, "event log header: missing format_version");
  return log;
}

void write_event_log(std::ostream& out, std::span<const InteractionRecord> records) {
  out << json{{"format_version", kFormatVersion}}.dump() << "\n";
  for (const auto& record : records) out << record_to_json(record).dump() << "\n";
}

AnswerVector answers_from_json(const json& answers, const SurveySchema& schema,
                               bool allow_partial) {
  try {
    if (answers.is_array()) {
      AnswerVector out = choices_from_array(answers);
      if (allow_partial && out.choices.size() < schema.size())
        out.choices.resize(schema.size(), AnswerVector::kUnanswered);
      out.validate(schema, allow_partial);
      return out;
    }
    if (answers.is_object()) {
      std::map<std::string, std::string> map;
      for (const auto& [question, option] : answers.items()) {
        if (option.is_null()) continue;
        if (option.is_number_integer()) {
          const auto q = schema.question_index(question);
          const auto& options = schema.questions()[q].options;
          const int index = option.get<int>();
          if (index < 0 || static_cast<std::size_t>(index) >= options.size())
            throw Error(ErrorCode::UnknownOption,
                        "question '" + question + "' has no option index " + option.dump());
          map.emplace(question, options[static_cast<std::size_t>(index)]);
        } else {
          map.emplace(question, option.get<std::string>());
        }
      }
      return AnswerVector::from_map(schema, map, allow_partial);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IncompleteAnswers, std::string("malformed answers: ") + e.what());
  }
  throw Error(ErrorCode::IncompleteAnswers, "answers must be an object or an array");
}

json lexicon_to_json(const std::vector<MetaSymbolDef>& defs) {
  json entries = json::array();
  for (const auto& def : defs) {
    json entry = {{"id", def.id},
                  {"name", def.name},
                  {"category", def.category},
                  {"members", def.members}};
    if (def.abstraction_level) entry["abstraction_level"] = *def.abstraction_level;
    entries.push_back(std::move(entry));
  }
  return {{"format_version", kFormatVersion}, {"definitions", std::move(entries)}};
}

std::vector<MetaSymbolDef> lexicon_from_json(const json& doc) {
  require_format_version(doc, "lexicon");
  std::vector<MetaSymbolDef> defs;
  try {
    for (const auto& entry : doc.at("definitions")) {
      MetaSymbolDef def;
      def.id = entry.at("id").get<std::string>();
      def.name = entry.value("name", def.id);
      def.category = entry.value("category", std::string("meta"));
      def.members = entry.at("members").get<std::vector<std::string>>();
      if (entry.contains("abstraction_level") && !entry.at("abstraction_level").is_null())
        def.abstraction_level = entry.at("abstraction_level").get<int>();
      defs.push_back(std::move(def));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidLexicon, std::string("malformed lexicon: ") + e.what());
  }
  return defs;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << text;
}

std::vector<std::string> read_id_list(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos || line[begin] == '#') continue;
    const auto end = line.find_last_not_of(" \t\r");
    ids.push_back(line.substr(begin, end - begin + 1));
  }
  return ids;
}

}  // namespace lingua::io
