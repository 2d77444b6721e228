#include "lingua/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "lingua/io.hpp"
#include "lingua/random.hpp"

namespace lingua {

namespace {

using nlohmann::json;
using Rng = std::mt19937_64;

std::string numbered(const char* prefix, std::size_t index, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, index);
  return std::string(prefix) + buf;
}

void check_simplex(std::span<const double> p, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::InvalidDistribution, what + " has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidDistribution, what + " does not sum to 1");
}

std::vector<double> dirichlet(Rng& rng, std::size_t k, double concentration) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  std::vector<double> out(k);
  double sum = 0.0;
  while (sum <= 0.0) {
    sum = 0.0;
    for (double& v : out) sum += v = gamma(rng);
  }
  for (double& v : out) v /= sum;
  return out;
}

// Index drawn proportionally to `weights` (total must be > 0).
std::size_t draw(Rng& rng, std::span<const double> weights, double total) {
  std::uniform_real_distribution<double> unit(0.0, total);
  const double r = unit(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (r < acc) return i;
  }
  return last;
}

struct Model {
  std::size_t k = 0;
  std::vector<double> weights;
  std::vector<std::vector<std::vector<double>>> responses;
  std::vector<std::vector<double>> affinity;  // archetype x symbol
  std::vector<double> popularity;
  std::vector<std::size_t> home;
  std::vector<CareerTruth> careers;
};

Model build_model(const SynthConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, 0));
  Model m;
  const std::size_t q = cfg.question_count, o = cfg.options_per_question;
  const std::size_t s = cfg.base_symbol_count;
  m.k = cfg.archetypes.empty() ? cfg.archetype_count : cfg.archetypes.size();

  for (std::size_t a = 0; a < m.k; ++a) {
    const ArchetypeSpec* spec = cfg.archetypes.empty() ? nullptr : &cfg.archetypes[a];
    m.weights.push_back(spec ? spec->weight : 1.0);
    if (spec && !spec->responses.empty()) {
      m.responses.push_back(spec->responses);
    } else {
      std::vector<std::vector<double>> profile;
      for (std::size_t i = 0; i < q; ++i)
        profile.push_back(dirichlet(rng, o, cfg.response_concentration));
      m.responses.push_back(std::move(profile));
    }
  }

  std::uniform_real_distribution<double> decades(0.0, cfg.popularity_decades);
  for (std::size_t i = 0; i < s; ++i) m.popularity.push_back(std::pow(10.0, decades(rng)));

  m.home.resize(s);
  for (std::size_t i = 0; i < s; ++i) m.home[i] = i % m.k;
  std::shuffle(m.home.begin(), m.home.end(), rng);

  m.affinity.assign(m.k, std::vector<double>(s, 0.0));
  for (std::size_t a = 0; a < m.k; ++a) {
    const ArchetypeSpec* spec = cfg.archetypes.empty() ? nullptr : &cfg.archetypes[a];
    for (std::size_t i = 0; i < s; ++i) {
      if (spec && !spec->affinity.empty())
        m.affinity[a][i] = spec->affinity[i];
      else
      {
        // Up to `niche_mass` of a symbol's popularity is specific to its home
        // archetype; the rest is broad appeal shared by every archetype.
        const double broad = std::max(cfg.affinity_leak, 1.0 - cfg.niche_mass / m.popularity[i]);
        const double home = m.home[i] == a ? (1.0 - broad) * static_cast<double>(m.k) : 0.0;
        m.affinity[a][i] = m.popularity[i] * (broad + home);
      }
    }
  }
  // Explicit affinities define the home archetype.
  for (std::size_t i = 0; i < s; ++i) {
    std::size_t best = m.home[i];
    for (std::size_t a = 0; a < m.k; ++a)
      if (m.affinity[a][i] > m.affinity[best][i]) best = a;
    m.home[i] = best;
  }

  if (m.k >= 2 && cfg.career_count > 0) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < m.k; ++a)
      for (std::size_t b = a + 1; b < m.k; ++b) pairs.emplace_back(a, b);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    pairs.resize(std::min(pairs.size(), cfg.career_count));
    for (std::size_t c = 0; c < pairs.size(); ++c) {
      CareerTruth career;
      career.id = numbered("career_", c, 2);
      career.native_id = "native_" + career.id;
      career.archetypes = {pairs[c].first, pairs[c].second};
      std::vector<std::string> leftovers;
      for (std::size_t a : career.archetypes) {
        std::vector<std::size_t> own;
        for (std::size_t i = 0; i < s; ++i)
          if (m.home[i] == a) own.push_back(i);
        std::shuffle(own.begin(), own.end(), rng);
        const std::size_t take = (own.size() + 1) / 2;
        for (std::size_t j = 0; j < own.size(); ++j)
          (j < take ? career.members : leftovers).push_back(synth_symbol_id(own[j]));
      }
      while (career.members.size() < 4 && !leftovers.empty()) {
        career.members.push_back(leftovers.back());
        leftovers.pop_back();
      }
      std::sort(career.members.begin(), career.members.end());
      m.careers.push_back(std::move(career));
    }
  }
  return m;
}

struct GeneratedUser {
  std::size_t archetype = 0;
  InteractionRecord record;
};

GeneratedUser generate_user(const SynthConfig& cfg, const Model& m, std::size_t u) {
  Rng rng(derive_seed(cfg.seed, u + 1));
  GeneratedUser out;
  const double weight_total = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
  out.archetype = draw(rng, m.weights, weight_total);
  out.record.user_id = synth_user_id(u);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& profile = m.responses[out.archetype];
  out.record.answers.choices.resize(cfg.question_count);
  for (std::size_t q = 0; q < cfg.question_count; ++q) {
    const double r = unit(rng);
    double acc = 0.0;
    int choice = static_cast<int>(cfg.options_per_question) - 1;
    for (std::size_t o = 0; o < cfg.options_per_question; ++o) {
      acc += profile[q][o];
      if (r < acc && profile[q][o] > 0.0) {
        choice = static_cast<int>(o);
        break;
      }
    }
    while (profile[q][choice] <= 0.0 && choice > 0) --choice;
    out.record.answers.choices[q] = choice;
  }

  std::size_t events = 0;
  if (cfg.events_distribution == "fixed") {
    events = static_cast<std::size_t>(std::llround(cfg.events_mean));
  } else {
    std::poisson_distribution<long> poisson(cfg.events_mean);
    events = cfg.events_mean > 0.0 ? static_cast<std::size_t>(poisson(rng)) : 0;
  }
  events = std::max(events, cfg.events_min);

  std::vector<double> weights = m.affinity[out.archetype];
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (std::size_t e = 0; e < events && total > 1e-300; ++e) {
    const std::size_t pick = draw(rng, weights, total);
    out.record.satisfied.insert(synth_symbol_id(pick));
    total -= weights[pick];
    weights[pick] = 0.0;
    if (total <= 0.0) total = std::accumulate(weights.begin(), weights.end(), 0.0);
  }

  for (const auto& career : m.careers) {
    const bool matches = std::find(career.archetypes.begin(), career.archetypes.end(),
                                   out.archetype) != career.archetypes.end();
    const double rate = cfg.career_rate * (matches ? 1.0 : cfg.affinity_leak);
    if (unit(rng) < rate) out.record.satisfied.insert(career.native_id);
  }
  return out;
}

// `observed` holds the base symbols that received at least one event.
std::vector<MetaSymbolDef> reference_lexicon(const SynthConfig& cfg, const Model& m,
                                             const std::set<std::string>& observed) {
  Rng rng(derive_seed(cfg.seed, 0x1e81c0));
  std::vector<MetaSymbolDef> defs;
  const std::size_t s = cfg.base_symbol_count;

  std::vector<std::string> area_ids(m.k);
  std::vector<std::vector<std::string>> area_members(m.k);
  std::vector<std::string> all;
  for (std::size_t i = 0; i < s; ++i) {
    if (!observed.count(synth_symbol_id(i))) continue;
    area_members[m.home[i]].push_back(synth_symbol_id(i));
    all.push_back(synth_symbol_id(i));
  }
  for (std::size_t a = 0; a < m.k; ++a) {
    if (area_members[a].empty()) continue;
    area_ids[a] = numbered("area_", a, 2);
    defs.push_back({area_ids[a], numbered("area ", a, 2), "area", area_members[a], 2});
  }

  for (const auto& career : m.careers)
    defs.push_back({career.id, "career " + career.id.substr(7), "career", career.members, 1});

  std::vector<std::string> top;
  const std::size_t majors = std::min(cfg.major_count, m.k);
  if (majors >= 2) {
    std::vector<std::size_t> order(m.k);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t g = 0; g < majors; ++g) {
      std::vector<std::string> members;
      for (std::size_t j = g; j < order.size(); j += majors)
        if (!area_ids[order[j]].empty()) members.push_back(area_ids[order[j]]);
      if (members.empty()) continue;
      std::sort(members.begin(), members.end());
      const std::string id = numbered("major_", g, 2);
      defs.push_back({id, numbered("major area ", g, 2), "major_area", members, 3});
      top.push_back(id);
    }
  } else {
    for (const auto& id : area_ids)
      if (!id.empty()) top.push_back(id);
  }
  for (const auto& career : m.careers)
    if (observed.count(career.native_id)) top.push_back(career.native_id);
  if (!top.empty()) defs.push_back({"all_symbols", "all symbols", "aggregate", top, 4});

  for (std::size_t a = 0; a < m.k; ++a) {
    if (area_members[a].empty()) continue;
    for (std::size_t r = 0; r < cfg.random_per_area; ++r) {
      std::vector<std::string> pool = all;
      std::shuffle(pool.begin(), pool.end(), rng);
      pool.resize(area_members[a].size());
      std::sort(pool.begin(), pool.end());
      defs.push_back({numbered("random_", a * cfg.random_per_area + r, 3), "random set", "random",
                      pool, 2});
    }
  }
  return defs;
}

}  // namespace

std::string synth_symbol_id(std::size_t index) { return numbered("p", index, 3); }
std::string synth_user_id(std::size_t index) { return numbered("u", index, 6); }

void SynthConfig::validate() const {
  if (question_count == 0) throw Error(ErrorCode::InvalidArgument, "question_count must be >= 1");
  if (options_per_question < 2)
    throw Error(ErrorCode::InvalidArgument, "options_per_question must be >= 2");
  if (base_symbol_count == 0)
    throw Error(ErrorCode::InvalidArgument, "base_symbol_count must be >= 1");
  if (users == 0) throw Error(ErrorCode::InvalidArgument, "users must be >= 1");
  if (archetypes.empty() && archetype_count == 0)
    throw Error(ErrorCode::InvalidArgument, "archetype_count must be >= 1");
  if (events_distribution != "poisson" && events_distribution != "fixed")
    throw Error(ErrorCode::InvalidArgument,
                "events_distribution must be 'poisson' or 'fixed'");
  if (!(events_mean >= 0.0)) throw Error(ErrorCode::InvalidArgument, "events_mean must be >= 0");
  if (!(popularity_decades >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "popularity_decades must be >= 0");
  if (!(affinity_leak >= 0.0 && affinity_leak <= 1.0))
    throw Error(ErrorCode::InvalidDistribution, "affinity_leak must lie in [0, 1]");
  if (!(niche_mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "niche_mass must be > 0");
  if (!(response_concentration > 0.0))
    throw Error(ErrorCode::InvalidDistribution, "response_concentration must be > 0");
  if (!(career_rate >= 0.0 && career_rate <= 1.0))
    throw Error(ErrorCode::InvalidDistribution, "career_rate must lie in [0, 1]");

  double weight_total = 0.0;
  for (std::size_t a = 0; a < archetypes.size(); ++a) {
    const auto& spec = archetypes[a];
    const std::string name = "archetype " + std::to_string(a);
    if (!(spec.weight >= 0.0) || !std::isfinite(spec.weight))
      throw Error(ErrorCode::InvalidDistribution, name + " weight is negative");
    weight_total += spec.weight;
    if (!spec.responses.empty()) {
      if (spec.responses.size() != question_count)
        throw Error(ErrorCode::InvalidDistribution, name + " responses do not match question_count");
      for (std::size_t q = 0; q < spec.responses.size(); ++q) {
        if (spec.responses[q].size() != options_per_question)
          throw Error(ErrorCode::InvalidDistribution,
                      name + " question " + std::to_string(q) + " has the wrong option count");
        check_simplex(spec.responses[q], name + " question " + std::to_string(q));
      }
    }
    if (!spec.affinity.empty()) {
      if (spec.affinity.size() != base_symbol_count)
        throw Error(ErrorCode::InvalidDistribution,
                    name + " affinity does not match base_symbol_count");
      double sum = 0.0;
      for (double v : spec.affinity) {
        if (!(v >= 0.0) || !std::isfinite(v))
          throw Error(ErrorCode::InvalidDistribution, name + " affinity has a negative entry");
        sum += v;
      }
      if (sum <= 0.0) throw Error(ErrorCode::InvalidDistribution, name + " affinity is all zero");
    }
  }
  if (!archetypes.empty() && weight_total <= 0.0)
    throw Error(ErrorCode::InvalidDistribution, "archetype weights sum to zero");
}

SynthConfig synth_config_from_json(const json& doc) {
  SynthConfig cfg;
  try {
    if (doc.contains("format_version")) io::require_format_version(doc, "synth config");
    cfg.question_count = doc.value("question_count", cfg.question_count);
    cfg.options_per_question = doc.value("options_per_question", cfg.options_per_question);
    cfg.archetype_count = doc.value("archetype_count", cfg.archetype_count);
    cfg.base_symbol_count = doc.value("base_symbol_count", cfg.base_symbol_count);
    cfg.users = doc.value("users", cfg.users);
    if (doc.contains("events_per_user")) {
      const auto& ev = doc.at("events_per_user");
      cfg.events_distribution = ev.value("distribution", cfg.events_distribution);
      cfg.events_mean = ev.value("mean", cfg.events_mean);
      cfg.events_min = ev.value("min", cfg.events_min);
    }
    cfg.popularity_decades = doc.value("popularity_decades", cfg.popularity_decades);
    cfg.affinity_leak = doc.value("affinity_leak", cfg.affinity_leak);
    cfg.niche_mass = doc.value("niche_mass", cfg.niche_mass);
    cfg.response_concentration = doc.value("response_concentration", cfg.response_concentration);
    cfg.career_count = doc.value("career_count", cfg.career_count);
    cfg.career_rate = doc.value("career_rate", cfg.career_rate);
    cfg.major_count = doc.value("major_count", cfg.major_count);
    cfg.random_per_area = doc.value("random_per_area", cfg.random_per_area);
    cfg.sample_users = doc.value("sample_users", cfg.sample_users);
    cfg.seed = doc.value("seed", cfg.seed);
    if (doc.contains("archetypes")) {
      for (const auto& a : doc.at("archetypes")) {
        ArchetypeSpec spec;
        spec.weight = a.value("weight", 1.0);
        if (a.contains("responses"))
          spec.responses = a.at("responses").get<std::vector<std::vector<double>>>();
        if (a.contains("affinity")) spec.affinity = a.at("affinity").get<std::vector<double>>();
        cfg.archetypes.push_back(std::move(spec));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed synth config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json synth_config_to_json(const SynthConfig& cfg) {
  json doc = {{"format_version", io::kFormatVersion},
              {"question_count", cfg.question_count},
              {"options_per_question", cfg.options_per_question},
              {"archetype_count", cfg.archetype_count},
              {"base_symbol_count", cfg.base_symbol_count},
              {"users", cfg.users},
              {"events_per_user",
               {{"distribution", cfg.events_distribution},
                {"mean", cfg.events_mean},
                {"min", cfg.events_min}}},
              {"popularity_decades", cfg.popularity_decades},
              {"affinity_leak", cfg.affinity_leak},
              {"niche_mass", cfg.niche_mass},
              {"response_concentration", cfg.response_concentration},
              {"career_count", cfg.career_count},
              {"career_rate", cfg.career_rate},
              {"major_count", cfg.major_count},
              {"random_per_area", cfg.random_per_area},
              {"sample_users", cfg.sample_users},
              {"seed", cfg.seed}};
  if (!cfg.archetypes.empty()) {
    json list = json::array();
    for (const auto& a : cfg.archetypes) {
      json item = {{"weight", a.weight}};
      if (!a.responses.empty()) item["responses"] = a.responses;
      if (!a.affinity.empty()) item["affinity"] = a.affinity;
      list.push_back(std::move(item));
    }
    doc["archetypes"] = std::move(list);
  }
  return doc;
}

SynthCorpus generate(const SynthConfig& config) {
  config.validate();
  Model model = build_model(config);

  SynthCorpus corpus;
  std::vector<Question> questions;
  for (std::size_t q = 0; q < config.question_count; ++q) {
    Question question{numbered("q", q + 1, 2), "question " + std::to_string(q + 1), {}};
    if (config.options_per_question == 3) {
      question.options = SurveySchema::default_options();
    } else {
      for (std::size_t o = 0; o < config.options_per_question; ++o)
        question.options.push_back("o" + std::to_string(o));
    }
    questions.push_back(std::move(question));
  }
  corpus.schema = SurveySchema(std::move(questions));

  // Users are independent streams; chunks run concurrently and land in id order.
  const std::size_t n = config.users;
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<GeneratedUser> users(n);
  std::vector<std::future<void>> jobs;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    const std::size_t end = std::min(n, begin + chunk);
    jobs.push_back(std::async(std::launch::async, [&, begin, end] {
      for (std::size_t u = begin; u < end; ++u) users[u] = generate_user(config, model, u);
    }));
  }
  for (auto& job : jobs) job.get();

  corpus.records.reserve(n);
  corpus.truth.user_archetype.reserve(n);
  for (std::size_t u = 0; u < n; ++u) {
    corpus.truth.user_archetype.push_back(users[u].archetype);
    if (u < config.sample_users)
      corpus.sample.push_back({users[u].record.user_id, users[u].record.answers, users[u].archetype});
    corpus.records.push_back(std::move(users[u].record));
  }

  for (std::size_t i = 0; i < config.base_symbol_count; ++i)
    corpus.truth.symbol_archetype[synth_symbol_id(i)] = model.home[i];
  corpus.truth.responses = model.responses;
  corpus.truth.popularity = model.popularity;

  // Symbols nobody satisfied have no history; definitions only refer to
  // symbols the corpus actually contains.
  std::set<std::string> observed;
  for (const auto& record : corpus.records)
    observed.insert(record.satisfied.begin(), record.satisfied.end());
  std::erase_if(model.careers, [&](CareerTruth& career) {
    std::erase_if(career.members, [&](const std::string& id) { return !observed.count(id); });
    return career.members.empty() || !observed.count(career.native_id);
  });
  corpus.truth.careers = model.careers;
  corpus.lexicon = reference_lexicon(config, model, observed);
  return corpus;
}

json ground_truth_to_json(const GroundTruth& truth) {
  json careers = json::array();
  for (const auto& c : truth.careers)
    careers.push_back({{"id", c.id},
                       {"native_id", c.native_id},
                       {"archetypes", c.archetypes},
                       {"members", c.members}});
  return {{"format_version", io::kFormatVersion},
          {"symbol_archetype", truth.symbol_archetype},
          {"user_archetype", truth.user_archetype},
          {"careers", std::move(careers)},
          {"responses", truth.responses},
          {"popularity", truth.popularity}};
}

json sample_users_to_json(const std::vector<SampleUser>& users, const SurveySchema& schema) {
  json list = json::array();
  for (const auto& u : users)
    list.push_back({{"id", u.id}, {"answers", u.answers.to_map(schema)}, {"archetype", u.archetype}});
  return {{"format_version", io::kFormatVersion}, {"users", std::move(list)}};
}

std::vector<SampleUser> sample_users_from_json(const json& doc, const SurveySchema& schema) {
  io::require_format_version(doc, "users");
  std::vector<SampleUser> out;
  try {
    for (const auto& u : doc.at("users")) {
      SampleUser user;
      user.id = u.at("id").get<std::string>();
      user.answers = io::answers_from_json(u.at("answers"), schema);
      user.archetype = u.value("archetype", std::size_t{0});
      out.push_back(std::move(user));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed users document: ") + e.what());
  }
  return out;
}

void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  io::write_text_file(dir / "schema.json", io::schema_to_json(corpus.schema).dump(2) + "\n");
  std::ostringstream events;
  io::write_event_log(events, corpus.records);
  io::write_text_file(dir / "events.jsonl", events.str());
  io::write_text_file(dir / "lexicon.json", io::lexicon_to_json(corpus.lexicon).dump(2) + "\n");
  io::write_text_file(dir / "ground_truth.json", ground_truth_to_json(corpus.truth).dump() + "\n");
  std::string native, defined;
  for (const auto& c : corpus.truth.careers) {
    native += c.native_id + "\n";
    defined += c.id + "\n";
  }
  io::write_text_file(dir / "native.txt", native);
  io::write_text_file(dir / "defined.txt", defined);
  io::write_text_file(dir / "users.json",
                      sample_users_to_json(corpus.sample, corpus.schema).dump(2) + "\n");
}

}  // namespace lingua
