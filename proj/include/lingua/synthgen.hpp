#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "lingua/history.hpp"
#include "lingua/lexicon.hpp"
#include "lingua/schema.hpp"

namespace lingua {

// A latent interest profile. Empty fields are drawn by the generator.
struct ArchetypeSpec {
  double weight = 1.0;                         // share of the user mixture
  std::vector<std::vector<double>> responses;  // per question, a simplex over options
  std::vector<double> affinity;                // per base symbol, >= 0
};

struct SynthConfig {
  std::size_t question_count = 26;
  std::size_t options_per_question = 3;
  std::size_t archetype_count = 10;
  std::size_t base_symbol_count = 100;
  std::size_t users = 50000;

  std::string events_distribution = "poisson";  // or "fixed"
  double events_mean = 3.0;
  std::size_t events_min = 0;

  double popularity_decades = 3.0;      // log-uniform symbol popularity span
  double affinity_leak = 0.02;          // minimum share of a symbol's appeal spread over all archetypes
  double niche_mass = 20.0;             // popularity reachable through the home archetype alone
  double response_concentration = 0.6;  // Dirichlet parameter for drawn response profiles

  std::size_t career_count = 10;  // careers span two archetypes each
  double career_rate = 0.1;       // chance a matching user has a native career event
  std::size_t major_count = 3;    // groups of archetypes; < 2 disables majors
  std::size_t random_per_area = 3;
  std::size_t sample_users = 500;  // users written out for validate/project

  std::uint64_t seed = 1;
  std::vector<ArchetypeSpec> archetypes;  // overrides archetype_count when set

  // Throws InvalidDistribution or InvalidArgument.
  void validate() const;
};

SynthConfig synth_config_from_json(const nlohmann::json& doc);
nlohmann::json synth_config_to_json(const SynthConfig& config);

struct CareerTruth {
  std::string id;         // defined meta-symbol
  std::string native_id;  // base symbol carrying the career's own history
  std::vector<std::size_t> archetypes;
  std::vector<std::string> members;
};

struct GroundTruth {
  std::map<std::string, std::size_t> symbol_archetype;
  std::vector<std::size_t> user_archetype;  // aligned with user ids u00000..
  std::vector<CareerTruth> careers;
  std::vector<std::vector<std::vector<double>>> responses;  // archetype x question x option
  std::vector<double> popularity;
};

struct SampleUser {
  std::string id;
  AnswerVector answers;
  std::size_t archetype = 0;
};

struct SynthCorpus {
  SurveySchema schema;
  std::vector<InteractionRecord> records;  // one per user, ordered by id
  std::vector<MetaSymbolDef> lexicon;
  GroundTruth truth;
  std::vector<SampleUser> sample;
};

std::string synth_symbol_id(std::size_t index);
std::string synth_user_id(std::size_t index);

// Deterministic for a given config; per-user streams derive from the seed.
SynthCorpus generate(const SynthConfig& config);

nlohmann::json ground_truth_to_json(const GroundTruth& truth);
nlohmann::json sample_users_to_json(const std::vector<SampleUser>& users,
                                    const SurveySchema& schema);
std::vector<SampleUser> sample_users_from_json(const nlohmann::json& doc,
                                               const SurveySchema& schema);

// schema.json, events.jsonl, lexicon.json, ground_truth.json, native.txt,
// defined.txt, users.json
void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace lingua
