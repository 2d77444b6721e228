#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "lingua/cli.hpp"
#include "lingua/io.hpp"
#include "lingua/service.hpp"
#include "lingua/snapshot.hpp"
#include "lingua/synthgen.hpp"

using namespace lingua;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lingua_iface_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

SynthConfig small_config() {
  SynthConfig cfg;
  cfg.users = 1500;
  cfg.base_symbol_count = 24;
  cfg.archetype_count = 4;
  cfg.question_count = 5;
  cfg.career_count = 3;
  cfg.sample_users = 12;
  cfg.seed = 3;
  return cfg;
}

// Synthetic corpus plus a built snapshot with the reference lexicon.
struct Workspace {
  fs::path dir;
  fs::path model;
};

const Workspace& workspace() {
  static const Workspace ws = [] {
    Workspace w{scratch("shared"), {}};
    io::write_text_file(w.dir / "config.json", synth_config_to_json(small_config()).dump(2));
    REQUIRE(run_cli({"synth", "--config", (w.dir / "config.json").string(), "--out-dir",
                 (w.dir / "corpus").string()})
                .code == 0);
    w.model = w.dir / "model.json";
    const Run built = run_cli({"build", "--events", (w.dir / "corpus/events.jsonl").string(), "--schema",
                           (w.dir / "corpus/schema.json").string(), "--out", w.model.string(),
                           "--lexicon", (w.dir / "corpus/lexicon.json").string()});
    REQUIRE_MESSAGE(built.code == 0, built.err);
    return w;
  }();
  return ws;
}

void write_answers(const fs::path& path, const json& answers) {
  io::write_text_file(path, json{{"answers", answers}}.dump());
}

json first_user_answers(const Workspace& ws) {
  return io::read_json_file(ws.dir / "corpus/users.json").at("users").at(0).at("answers");
}

ServiceOptions quick_options() {
  ServiceOptions options;
  options.sammon.restarts = 2;
  options.sammon.max_iter = 150;
  return options;
}

std::size_t service_catalog_size(const Workspace& ws) {
  return load_snapshot(ws.model).catalog().entries().size();
}

HttpRequest get(std::string path, std::map<std::string, std::string> query = {}) {
  return {"GET", std::move(path), std::move(query), ""};
}

HttpRequest post(std::string path, const json& body) {
  return {"POST", std::move(path), {}, body.dump()};
}

}  // namespace

TEST_CASE("snapshot round trip preserves rankings, metrics and embeddings") {
  const auto& ws = workspace();
  const ModelSnapshot a = load_snapshot(ws.model);
  const fs::path copy = ws.dir / "copy.json";
  save_snapshot(a, copy);
  CHECK(slurp(copy) == slurp(ws.model));
  const ModelSnapshot b = load_snapshot(copy);

  const Catalog ca = a.catalog(), cb = b.catalog();
  REQUIRE(ca.entries().size() == cb.entries().size());
  const AnswerVector answers =
      io::answers_from_json(first_user_answers(ws), a.store->schema());
  const auto ra = rank(ca, answers), rb = rank(cb, answers);
  REQUIRE(ra.entries.size() == rb.entries.size());
  for (std::size_t i = 0; i < ra.entries.size(); ++i) {
    CHECK(ra.entries[i].id == rb.entries[i].id);
    CHECK(ra.entries[i].log_score == rb.entries[i].log_score);
  }
  CHECK(report_to_json(metrics_report(ca, {})) == report_to_json(metrics_report(cb, {})));

  SammonParams params;
  params.restarts = 2;
  params.max_iter = 100;
  const auto ea = project(vectorize(a.catalog(false), {}, {}), params);
  const auto eb = project(vectorize(b.catalog(false), {}, {}), params);
  CHECK(embedding_to_json(ea) == embedding_to_json(eb));
}

TEST_CASE("snapshot loader rejects tampered counts and unknown versions") {
  const auto& ws = workspace();
  json doc = io::read_json_file(ws.model);
  json bad_version = doc;
  bad_version["format_version"] = 2;
  CHECK_THROWS_AS(snapshot_from_json(bad_version), Error);

  json tampered = doc;
  auto& counts = tampered.at("symbols").at(0).at("counts");
  counts.at(0).at(0) = counts.at(0).at(0).get<long>() + 1;
  try {
    snapshot_from_json(tampered);
    FAIL("tampered snapshot accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedFormat);
  }
}

TEST_CASE("build timestamp honours SOURCE_DATE_EPOCH") {
  ::setenv("SOURCE_DATE_EPOCH", "86400", 1);
  CHECK(build_timestamp() == "1970-01-02T00:00:00Z");
  ::unsetenv("SOURCE_DATE_EPOCH");
  CHECK(build_timestamp().size() == 20);
}

TEST_CASE("cli outputs are byte-identical across runs") {
  const auto& ws = workspace();
  const fs::path dir = scratch("repeat");
  write_answers(dir / "answers.json", first_user_answers(ws));

  for (const std::string format : {"tsv", "json"}) {
    const std::vector<std::string> args{"rank", "--model", ws.model.string(), "--answers",
                                        (dir / "answers.json").string(), "--format", format};
    const Run a = run_cli(args), b = run_cli(args);
    REQUIRE_MESSAGE(a.code == 0, a.err);
    CHECK(a.out == b.out);
    const std::vector<std::string> margs{"metrics", "--model", ws.model.string(), "--format", format};
    const Run ma = run_cli(margs), mb = run_cli(margs);
    REQUIRE_MESSAGE(ma.code == 0, ma.err);
    CHECK(ma.out == mb.out);
  }

  for (const char* name : {"p1", "p2"}) {
    const Run r = run_cli({"project", "--model", ws.model.string(), "--out",
                       (dir / (std::string(name) + ".json")).string(), "--restarts", "2",
                       "--max-iter", "120", "--users", (ws.dir / "corpus/users.json").string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
  }
  CHECK(slurp(dir / "p1.json") == slurp(dir / "p2.json"));
  CHECK(slurp(dir / "p1.svg") == slurp(dir / "p2.svg"));
  CHECK(slurp(dir / "p1.svg").rfind("<svg", 0) == 0);

  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  for (const char* name : {"m1.json", "m2.json"})
    REQUIRE(run_cli({"build", "--events", (ws.dir / "corpus/events.jsonl").string(), "--schema",
                 (ws.dir / "corpus/schema.json").string(), "--out", (dir / name).string()})
                .code == 0);
  ::unsetenv("SOURCE_DATE_EPOCH");
  CHECK(slurp(dir / "m1.json") == slurp(dir / "m2.json"));
}

TEST_CASE("rank honours focus, limit and partial answers") {
  const auto& ws = workspace();
  const fs::path dir = scratch("rank");
  write_answers(dir / "answers.json", first_user_answers(ws));
  const Run r = run_cli({"rank", "--model", ws.model.string(), "--answers",
                     (dir / "answers.json").string(), "--focus", "career,area", "--limit", "3",
                     "--format", "json"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const json doc = json::parse(r.out);
  CHECK(doc.at("entries").size() == 3);
  for (const auto& e : doc.at("entries")) {
    const std::string category = e.at("category");
    CHECK((category == "career" || category == "area"));
  }

  write_answers(dir / "partial.json", json{{"q01", "yes"}});
  const std::vector<std::string> partial{"rank", "--model", ws.model.string(), "--answers",
                                         (dir / "partial.json").string()};
  const Run rejected = run_cli(partial);
  CHECK(rejected.code == 1);
  CHECK(rejected.err.find("IncompleteAnswers") != std::string::npos);
  auto with_flag = partial;
  with_flag.push_back("--partial");
  CHECK(run_cli(with_flag).code == 0);

  const Run unknown = run_cli({"rank", "--model", ws.model.string(), "--answers",
                           (dir / "answers.json").string(), "--focus", "nonsense"});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("UnknownFocusCategory") != std::string::npos);
}

TEST_CASE("build lists every invalid record") {
  const fs::path dir = scratch("build");
  const SurveySchema schema = fixture::schema(3);
  io::write_text_file(dir / "schema.json", io::schema_to_json(schema).dump());
  std::ofstream(dir / "events.jsonl")
      << "{\"format_version\":1}\n"
      << "{\"user_id\":\"a\",\"answers\":[0,1,2],\"satisfied\":[\"x\"]}\n"
      << "{\"user_id\":\"b\",\"answers\":[0,1],\"satisfied\":[\"x\"]}\n"
      << "not json\n"
      << "{\"user_id\":\"c\",\"answers\":[0,1,7],\"satisfied\":[]}\n";
  const std::vector<std::string> args{"build", "--events", (dir / "events.jsonl").string(),
                                      "--schema", (dir / "schema.json").string(), "--out",
                                      (dir / "m.json").string()};
  const Run r = run_cli(args);
  CHECK(r.code == 1);
  CHECK(r.err.find("3 invalid record(s)") != std::string::npos);
  CHECK(r.err.find("line 4") != std::string::npos);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(r.err.find("line 5") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "m.json"));

  auto json_args = args;
  json_args.insert(json_args.begin(), "--json-errors");
  const Run j = run_cli(json_args);
  CHECK(j.code == 1);
  const json err = json::parse(j.err);
  CHECK(err.at("error_code") == "InvalidRecord");
  CHECK(err.at("detail").get<std::string>().find("line 5") != std::string::npos);
}

TEST_CASE("define reports all cycles and unknown ids, then attaches a valid lexicon") {
  const fs::path dir = scratch("define");
  const SurveySchema schema = fixture::schema(2);
  std::mt19937_64 rng(4);
  const auto records = fixture::records(rng, schema, 60, 4, 0.4);
  {
    std::ofstream out(dir / "events.jsonl");
    io::write_event_log(out, records);
  }
  io::write_text_file(dir / "schema.json", io::schema_to_json(schema).dump());
  REQUIRE(run_cli({"build", "--events", (dir / "events.jsonl").string(), "--schema",
               (dir / "schema.json").string(), "--out", (dir / "m.json").string()})
              .code == 0);

  const std::vector<MetaSymbolDef> bad{
      {"a", "a", "g", {"b", "s0"}, 1}, {"b", "b", "g", {"a"}, 1},
      {"c", "c", "g", {"d"}, 1},       {"d", "d", "g", {"c", "ghost"}, 1},
      {"e", "e", "g", {"phantom"}, 1}};
  io::write_text_file(dir / "bad.json", io::lexicon_to_json(bad).dump());
  const Run r = run_cli({"define", "--model", (dir / "m.json").string(), "--lexicon",
                     (dir / "bad.json").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("4 lexicon issue(s)") != std::string::npos);
  CHECK(r.err.find("cycle: a -> b -> a") != std::string::npos);
  CHECK(r.err.find("cycle: c -> d -> c") != std::string::npos);
  CHECK(r.err.find("'ghost'") != std::string::npos);
  CHECK(r.err.find("'phantom'") != std::string::npos);

  const std::vector<MetaSymbolDef> good{{"pair", "pair", "group", {"s0", "s1"}, 1},
                                        {"top", "top", "all", {"pair", "s2", "s3"}, 2}};
  io::write_text_file(dir / "good.json", io::lexicon_to_json(good).dump());
  const Run ok = run_cli({"define", "--model", (dir / "m.json").string(), "--lexicon",
                      (dir / "good.json").string(), "--out", (dir / "m2.json").string()});
  REQUIRE_MESSAGE(ok.code == 0, ok.err);
  const ModelSnapshot snapshot = load_snapshot(dir / "m2.json");
  CHECK(snapshot.lexicon.contains("top"));
  CHECK(snapshot.catalog().find("inverse:top") != nullptr);
}

TEST_CASE("usage errors exit with status 2") {
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"rank"}).code == 2);
  CHECK(run_cli({"project", "--model", "x", "--out", "y", "--dim", "4"}).code == 2);
  CHECK(run_cli({"bogus"}).code == 2);
  const Run missing = run_cli({"metrics", "--model", "/nonexistent/model.json"});
  CHECK(missing.code == 1);
}

TEST_CASE("validate recovers native careers from their definitions") {
  const auto& ws = workspace();
  const Run r = run_cli({"validate", "--model", ws.model.string(), "--native",
                     (ws.dir / "corpus/native.txt").string(), "--defined",
                     (ws.dir / "corpus/defined.txt").string(), "--users",
                     (ws.dir / "corpus/users.json").string(), "--min-members", "1", "--format",
                     "json"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const json doc = json::parse(r.out);
  CHECK(doc.at("users") == 12);
  CHECK(doc.at("pairs_used").get<int>() >= 2);
  CHECK(doc.at("mean_spearman").get<double>() > 0.0);
}

TEST_CASE("service without a model answers 409") {
  const Service service;
  for (const auto& req : {get("/schema"), get("/symbols"), post("/rank", json::object())}) {
    const auto res = service.handle(req);
    CHECK(res.status == 409);
    CHECK(json::parse(res.body).at("error_code") == "ModelNotLoaded");
  }
}

TEST_CASE("service endpoints") {
  const auto& ws = workspace();
  const Service service(load_snapshot(ws.model), quick_options());
  const json answers = first_user_answers(ws);

  SUBCASE("schema and symbols") {
    const auto schema = json::parse(service.handle(get("/schema")).body);
    CHECK(schema.at("questions").size() == 5);
    const auto symbols = json::parse(service.handle(get("/symbols")).body).at("symbols");
    CHECK(symbols.size() == service_catalog_size(ws));
    const auto careers =
        json::parse(service.handle(get("/symbols", {{"category", "career"}})).body).at("symbols");
    CHECK(!careers.empty());
    for (const auto& s : careers) CHECK(s.at("category") == "career");
    const auto inverses =
        json::parse(service.handle(get("/symbols", {{"kind", "inverse"}})).body).at("symbols");
    CHECK(!inverses.empty());
    CHECK(service.handle(get("/symbols", {{"kind", "odd"}})).status == 400);
  }

  SUBCASE("rank matches the cli document") {
    const fs::path dir = scratch("svc_rank");
    write_answers(dir / "answers.json", answers);
    const Run r = run_cli({"rank", "--model", ws.model.string(), "--answers",
                       (dir / "answers.json").string(), "--format", "json"});
    REQUIRE(r.code == 0);
    const auto res = service.handle(post("/rank", {{"answers", answers}}));
    CHECK(res.status == 200);
    CHECK(json::parse(res.body) == json::parse(r.out));

    const auto focused =
        json::parse(service.handle(post("/rank", {{"answers", answers}, {"focus", "area"}, {"limit", 2}})).body);
    CHECK(focused.at("entries").size() == 2);
    CHECK(focused.at("focus") == json::array({"area"}));
  }

  SUBCASE("rank errors") {
    CHECK(service.handle(post("/rank", json::object())).status == 400);
    CHECK(service.handle({"POST", "/rank", {}, "{not json"}).status == 400);
    const auto partial = service.handle(post("/rank", {{"answers", {{"q01", "yes"}}}}));
    CHECK(partial.status == 400);
    CHECK(json::parse(partial.body).at("error_code") == "IncompleteAnswers");
    CHECK(service.handle(post("/rank", {{"answers", {{"q01", "yes"}}}, {"partial", true}})).status ==
          200);
    const auto focus = service.handle(post("/rank", {{"answers", answers}, {"focus", {"nope"}}}));
    CHECK(focus.status == 400);
    CHECK(json::parse(focus.body).at("error_code") == "UnknownFocusCategory");
  }

  SUBCASE("unknown routes and ids") {
    CHECK(service.handle(get("/nowhere")).status == 404);
    CHECK(service.handle(get("/metrics/not_a_symbol")).status == 404);
    CHECK(service.handle(get("/inverse/not_a_symbol")).status == 404);
    CHECK(service.handle({"DELETE", "/schema", {}, ""}).status == 404);
    CHECK(service.handle(get("/embedding", {{"dim", "5"}})).status == 400);
  }

  SUBCASE("metrics and inverse") {
    const auto m = json::parse(service.handle(get("/metrics/area_00")).body);
    CHECK(m.at("id") == "area_00");
    CHECK(m.at("snr").get<double>() ==
          doctest::Approx(std::sqrt(m.at("total_signal").get<double>())));
    const auto by_source = service.handle(get("/inverse/area_00"));
    const auto by_inverse = service.handle(get("/inverse/inverse%3Aarea_00"));
    CHECK(by_source.status == 200);
    CHECK(by_source.body == by_inverse.body);
    const auto inv = json::parse(by_source.body);
    CHECK(inv.at("id") == "inverse:area_00");
    CHECK(inv.at("category") == "inverse:area");
    for (const auto& row : inv.at("pseudo_probabilities")) {
      double sum = 0.0;
      for (double v : row) sum += v;
      CHECK(sum == doctest::Approx(1.0));
    }
  }

  SUBCASE("concurrent identical requests agree") {
    const auto req = post("/rank", {{"answers", answers}});
    std::vector<std::future<std::string>> futures;
    for (int i = 0; i < 16; ++i)
      futures.push_back(std::async(std::launch::async, [&] { return service.handle(req).body; }));
    const std::string first = futures.front().get();
    for (std::size_t i = 1; i < futures.size(); ++i) CHECK(futures[i].get() == first);

    std::vector<std::future<std::string>> embeds;
    for (int i = 0; i < 4; ++i)
      embeds.push_back(
          std::async(std::launch::async, [&] { return service.handle(get("/embedding")).body; }));
    const std::string e0 = embeds.front().get();
    for (std::size_t i = 1; i < embeds.size(); ++i) CHECK(embeds[i].get() == e0);
  }
}

TEST_CASE("placing an embedded user lands on its own point") {
  const auto& ws = workspace();
  const ModelSnapshot snapshot = load_snapshot(ws.model);
  ServiceOptions options = quick_options();
  options.users = sample_users_from_json(io::read_json_file(ws.dir / "corpus/users.json"),
                                         snapshot.store->schema());
  const SampleUser user = options.users.front();
  const Service service(snapshot, options);
  const Embedding& embedding = service.embedding(2);
  const auto it = std::find_if(embedding.points.begin(), embedding.points.end(),
                               [&](const EmbeddedPoint& p) { return p.id == user.id; });
  REQUIRE(it != embedding.points.end());

  const auto res = service.handle(
      post("/place", {{"answers", user.answers.to_map(snapshot.store->schema())}}));
  REQUIRE(res.status == 200);
  const json placed = json::parse(res.body);
  CHECK(placed.at("dim") == 2);
  double d2 = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    const double diff = placed.at("coords").at(k).get<double>() - it->coords[k];
    d2 += diff * diff;
  }
  CHECK(std::sqrt(d2) < 1e-6);
  CHECK(placed.at("nearest").size() == 5);
  CHECK(placed.at("nearest").at(0).at("kind") != "user");
}

TEST_CASE("a precomputed embedding is served verbatim") {
  const auto& ws = workspace();
  const ModelSnapshot snapshot = load_snapshot(ws.model);
  SammonParams params;
  params.restarts = 1;
  params.max_iter = 50;
  const Embedding e = project(vectorize(snapshot.catalog(false), {}, {}), params);
  const Service service(snapshot, quick_options(), e);
  CHECK(json::parse(service.handle(get("/embedding")).body) == embedding_to_json(e));
}

TEST_CASE("installed binary reports usage errors") {
  const char* exe = std::getenv("LINGUA_CLI");
  if (!exe) return;
  const std::string quiet = " >/dev/null 2>&1";
  CHECK(std::system((std::string(exe) + " --help" + quiet).c_str()) == 0);
  CHECK(WEXITSTATUS(std::system((std::string(exe) + " rank" + quiet).c_str())) == 2);
}

TEST_CASE("project embeds inverses only on request") {
  const auto& ws = workspace();
  const fs::path dir = scratch("inverse");
  const auto count_inverse = [&](bool inverse) {
    std::vector<std::string> args{"project", "--model", ws.model.string(), "--out",
                                  (dir / "e.json").string(), "--restarts", "1", "--max-iter", "40"};
    if (inverse) args.push_back("--inverse");
    REQUIRE(run_cli(args).code == 0);
    const json doc = io::read_json_file(dir / "e.json");
    std::size_t n = 0;
    for (const auto& p : doc.at("points")) n += p.at("kind") == "inverse";
    return n;
  };
  CHECK(count_inverse(false) == 0);
  CHECK(count_inverse(true) == load_snapshot(ws.model).lexicon.defs().size());
}
