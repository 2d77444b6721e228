#include "lingua/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "lingua/io.hpp"
#include "lingua/metrics.hpp"
#include "lingua/projection.hpp"
#include "lingua/service.hpp"
#include "lingua/snapshot.hpp"
#include "lingua/synthgen.hpp"

namespace lingua::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Options {
  std::string events, schema, out, model, lexicon, answers, config, out_dir, native, defined,
      users, embedding, category, focus, format = "tsv", host = "0.0.0.0", svg;
  std::optional<double> alpha, smoothing;
  std::optional<std::size_t> limit, min_history, prune_min_members, prune_max_members;
  std::size_t min_members = 4, restarts = 5, max_iter = 500;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> synth_seed;
  int dim = 2, port = 8080;
  bool partial = false, inverse = false, json_errors = false;
};

class Failure : public std::runtime_error {
 public:
  Failure(ErrorCode code, const std::string& message, std::vector<std::string> lines)
      : std::runtime_error(message), code(code), lines(std::move(lines)) {}
  ErrorCode code;
  std::vector<std::string> lines;
};

ModelSnapshot load_model(const Options& o) {
  ModelSnapshot snapshot = load_snapshot(o.model);
  if (o.smoothing) snapshot.metadata.smoothing = *o.smoothing;
  if (o.alpha) snapshot.metadata.alpha = *o.alpha;
  return snapshot;
}

std::vector<SampleUser> load_users(const std::string& path, const SurveySchema& schema) {
  if (path.empty()) return {};
  return sample_users_from_json(io::read_json_file(path), schema);
}

int cmd_build(const Options& o, std::ostream& out) {
  const SurveySchema schema = io::schema_from_json(io::read_json_file(o.schema));
  std::ifstream in(o.events);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + o.events);
  io::EventLog log = io::read_event_log(in);
  std::vector<std::string> lines;
  for (const auto& issue : log.issues)
    lines.push_back("line " + std::to_string(issue.index) + ": " +
                    std::string(to_string(issue.code)) + ": " + issue.message);
  for (const auto& issue : check_records(log.records, schema))
    lines.push_back("line " + std::to_string(log.lines.at(issue.index)) + ": " +
                    std::string(to_string(issue.code)) + ": " + issue.message);
  if (!lines.empty())
    throw Failure(ErrorCode::InvalidRecord, std::to_string(lines.size()) + " invalid record(s) in " + o.events, lines);

  ModelSnapshot snapshot;
  snapshot.store = std::make_shared<const HistoryStore>(ingest(log.records, schema));
  snapshot.metadata.record_count = snapshot.store->record_count();
  snapshot.metadata.timestamp = build_timestamp();
  if (o.smoothing) snapshot.metadata.smoothing = *o.smoothing;
  if (o.alpha) snapshot.metadata.alpha = *o.alpha;
  if (!o.lexicon.empty())
    snapshot.lexicon = Lexicon::build(io::lexicon_from_json(io::read_json_file(o.lexicon)),
                                      snapshot.store->symbol_ids());
  save_snapshot(snapshot, o.out);
  out << "records\t" << snapshot.store->record_count() << "\n"
      << "survey_takers\t" << snapshot.store->survey_takers() << "\n"
      << "event_users\t" << snapshot.store->population() << "\n"
      << "symbols\t" << snapshot.store->symbols().size() << "\n";
  return 0;
}

int cmd_define(const Options& o, std::ostream& out) {
  ModelSnapshot snapshot = load_snapshot(o.model);
  auto defs = io::lexicon_from_json(io::read_json_file(o.lexicon));
  const auto issues = Lexicon::check(defs, snapshot.store->symbol_ids());
  if (!issues.empty()) {
    std::vector<std::string> lines;
    for (const auto& issue : issues)
      lines.push_back(std::string(to_string(issue.code)) + ": " + issue.message);
    throw Failure(ErrorCode::InvalidLexicon, std::to_string(issues.size()) + " lexicon issue(s) in " + o.lexicon, lines);
  }
  snapshot.lexicon = Lexicon::build(std::move(defs), snapshot.store->symbol_ids());
  save_snapshot(snapshot, o.out.empty() ? o.model : o.out);
  out << "definitions\t" << snapshot.lexicon.defs().size() << "\n"
      << "categories\t" << snapshot.lexicon.categories().size() << "\n";
  return 0;
}

int cmd_rank(const Options& o, std::ostream& out) {
  const ModelSnapshot snapshot = load_model(o);
  const Catalog catalog = snapshot.catalog();
  json doc = io::read_json_file(o.answers);
  const json& answers = doc.is_object() && doc.contains("answers") ? doc.at("answers") : doc;
  RankOptions options;
  options.alpha = snapshot.metadata.alpha;
  options.allow_partial = o.partial;
  options.limit = o.limit;
  if (!o.focus.empty()) {
    std::set<std::string> focus;
    std::stringstream in(o.focus);
    for (std::string item; std::getline(in, item, ',');)
      if (!item.empty()) focus.insert(item);
    options.focus = std::move(focus);
  }
  const AnswerVector vector =
      io::answers_from_json(answers, catalog.store().schema(), options.allow_partial);
  const RankedList list = rank(catalog, vector, options);
  if (o.format == "json")
    out << ranked_to_json(list, catalog).dump(2) << "\n";
  else
    out << ranked_to_tsv(list, catalog);
  return 0;
}

int cmd_metrics(const Options& o, std::ostream& out) {
  const ModelSnapshot snapshot = load_model(o);
  const Catalog catalog = snapshot.catalog();
  ReportOptions options;
  if (!o.category.empty()) options.category = o.category;
  options.include_inverse = o.inverse;
  options.min_history = o.min_history;
  options.min_members = o.prune_min_members;
  options.max_members = o.prune_max_members;
  const MetricsReport report = metrics_report(catalog, options);
  if (o.format == "json")
    out << report_to_json(report).dump(2) << "\n";
  else
    out << report_to_tsv(report);
  return 0;
}

int cmd_project(const Options& o, std::ostream& out) {
  const ModelSnapshot snapshot = load_model(o);
  const Catalog catalog = snapshot.catalog(o.inverse);
  std::vector<UserPoint> users;
  for (const auto& u : load_users(o.users, catalog.store().schema()))
    users.push_back({u.id, u.answers});
  VectorizeOptions vopts;
  vopts.smoothing = snapshot.metadata.smoothing;
  vopts.include_inverse = o.inverse;
  SammonParams params;
  params.dim = o.dim;
  params.seed = o.seed;
  params.restarts = o.restarts;
  params.max_iter = o.max_iter;
  const Embedding embedding = project(vectorize(catalog, users, vopts), params);
  io::write_text_file(o.out, embedding_to_json(embedding).dump(2) + "\n");
  const fs::path svg = o.svg.empty() ? fs::path(o.out).replace_extension(".svg") : fs::path(o.svg);
  io::write_text_file(svg, scatter_svg(embedding));
  out.precision(17);
  out << "points\t" << embedding.points.size() << "\n"
      << "dim\t" << embedding.dim << "\n"
      << "stress\t" << embedding.stress << "\n"
      << "iterations\t" << embedding.iterations_used << "\n";
  return 0;
}

int cmd_synth(const Options& o, std::ostream& out) {
  SynthConfig config = o.config.empty() ? SynthConfig{}
                                        : synth_config_from_json(io::read_json_file(o.config));
  if (o.synth_seed) config.seed = *o.synth_seed;
  const SynthCorpus corpus = generate(config);
  write_corpus(corpus, o.out_dir);
  out << "users\t" << corpus.records.size() << "\n"
      << "definitions\t" << corpus.lexicon.size() << "\n"
      << "careers\t" << corpus.truth.careers.size() << "\n";
  return 0;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const ModelSnapshot snapshot = load_model(o);
  const Catalog catalog = snapshot.catalog(false);
  const auto native = io::read_id_list(o.native);
  const auto defined = io::read_id_list(o.defined);
  std::vector<AnswerVector> answers;
  for (const auto& u : load_users(o.users, catalog.store().schema())) answers.push_back(u.answers);
  ValidationOptions options;
  options.alpha = snapshot.metadata.alpha;
  options.min_members = o.min_members;
  const ValidationResult result = validate_definitions(catalog, native, defined, answers, options);
  if (o.format == "json") {
    out << json{{"mean_spearman", result.mean},
                {"pairs_used", result.pairs_used},
                {"users", result.per_user.size()},
                {"alpha", options.alpha},
                {"min_members", options.min_members},
                {"per_user", result.per_user}}
               .dump(2)
        << "\n";
  } else {
    out.precision(17);
    out << "pairs_used\t" << result.pairs_used << "\n"
        << "users\t" << result.per_user.size() << "\n"
        << "mean_spearman\t" << result.mean << "\n";
  }
  return 0;
}

int cmd_serve(const Options& o, std::ostream& out) {
  ModelSnapshot snapshot = load_model(o);
  ServiceOptions options;
  options.users = load_users(o.users, snapshot.store->schema());
  options.sammon.seed = o.seed;
  options.sammon.restarts = o.restarts;
  options.sammon.max_iter = o.max_iter;
  options.placement.seed = o.seed;
  std::optional<Embedding> embedding;
  if (!o.embedding.empty()) embedding = embedding_from_json(io::read_json_file(o.embedding));
  const Service service(std::move(snapshot), std::move(options), std::move(embedding));
  service.embedding(2);
  out << "serving " << o.model << " on " << o.host << ":" << o.port << std::endl;
  serve(service, o.host, o.port);
  return 0;
}

void report(const std::string& message, const std::string& code, const std::string& detail,
            bool as_json, std::ostream& err) {
  if (as_json) {
    err << json{{"error_code", code}, {"message", message}, {"detail", detail}}.dump() << "\n";
    return;
  }
  err << "error: " << code << ": " << message << "\n";
  if (!detail.empty()) err << detail << (detail.back() == '\n' ? "" : "\n");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Survey-history recommender with a meta-symbol lexicon"};
  app.name("lingua");
  app.require_subcommand(1);
  app.add_flag("--json-errors", o.json_errors, "Print errors as JSON objects");

  auto* build = app.add_subcommand("build", "Ingest an event log into a model snapshot");
  build->add_option("--events", o.events, "Event log (JSON lines)")->required();
  build->add_option("--schema", o.schema, "Survey schema")->required();
  build->add_option("--out", o.out, "Snapshot path")->required();
  build->add_option("--lexicon", o.lexicon, "Attach a lexicon while building");

  auto* define = app.add_subcommand("define", "Validate a lexicon and attach it to a snapshot");
  define->add_option("--model", o.model, "Snapshot")->required();
  define->add_option("--lexicon", o.lexicon, "Lexicon document")->required();
  define->add_option("--out", o.out, "Output snapshot (default: overwrite --model)");

  auto* rank = app.add_subcommand("rank", "Rank symbols for one set of answers");
  rank->add_option("--model", o.model, "Snapshot")->required();
  rank->add_option("--answers", o.answers, "Answers document")->required();
  rank->add_option("--focus", o.focus, "Comma-separated categories");
  rank->add_option("--limit", o.limit, "Keep the top n entries");
  rank->add_flag("--partial", o.partial, "Score over answered questions only");

  auto* metrics = app.add_subcommand("metrics", "Signal report grouped by category");
  metrics->add_option("--model", o.model, "Snapshot")->required();
  metrics->add_option("--category", o.category, "Restrict to one category");
  metrics->add_flag("--inverse", o.inverse, "Include inverse meta-symbols");
  metrics->add_option("--min-history", o.min_history, "Drop symbols with fewer history events");
  metrics->add_option("--min-members", o.prune_min_members, "Drop meta-symbols with fewer members");
  metrics->add_option("--max-members", o.prune_max_members, "Drop meta-symbols with more members");

  auto* project = app.add_subcommand("project", "Sammon-map the knowledge space");
  project->add_option("--model", o.model, "Snapshot")->required();
  project->add_option("--dim", o.dim, "Target dimension")->check(CLI::IsMember({2, 3}));
  project->add_option("--users", o.users, "Users document to embed alongside the symbols");
  project->add_option("--out", o.out, "Embedding document")->required();
  project->add_option("--svg", o.svg, "Scatter output (default: next to --out)");
  project->add_option("--restarts", o.restarts, "Random restarts");
  project->add_option("--max-iter", o.max_iter, "Iteration cap per restart");
  project->add_flag("--inverse", o.inverse, "Include inverse meta-symbols");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--config", o.config, "Generator config (defaults when omitted)");
  synth->add_option("--out-dir", o.out_dir, "Output directory")->required();

  auto* validate = app.add_subcommand("validate", "Compare native and defined rankings");
  validate->add_option("--model", o.model, "Snapshot")->required();
  validate->add_option("--native", o.native, "Native ids, one per line")->required();
  validate->add_option("--defined", o.defined, "Defined ids, paired by line")->required();
  validate->add_option("--users", o.users, "Users document")->required();
  validate->add_option("--min-members", o.min_members, "Drop definitions with fewer members");

  auto* serve = app.add_subcommand("serve", "Serve the read-only HTTP API");
  serve->add_option("--model", o.model, "Snapshot")->required()->envname("LINGUA_MODEL");
  serve->add_option("--port", o.port, "Port")->envname("LINGUA_PORT");
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("--embedding", o.embedding, "Precomputed 2-D embedding");
  serve->add_option("--users", o.users, "Users document to embed alongside the symbols");

  for (auto* sub : {build, rank, metrics, project, validate, serve}) {
    sub->add_option("--alpha", o.alpha, "Prior exponent")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--smoothing", o.smoothing, "Additive smoothing")
        ->check(CLI::NonNegativeNumber);
  }
  for (auto* sub : {project, serve}) sub->add_option("--seed", o.seed, "Random seed");
  synth->add_option("--seed", o.synth_seed, "Override the config seed");
  for (auto* sub : {rank, metrics, validate})
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"tsv", "json"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    if (o.json_errors)
      report(e.what(), "InvalidArgument", "", true, err);
    else
      app.exit(e, out, err);
    return 2;
  }

  try {
    if (*build) return cmd_build(o, out);
    if (*define) return cmd_define(o, out);
    if (*rank) return cmd_rank(o, out);
    if (*metrics) return cmd_metrics(o, out);
    if (*project) return cmd_project(o, out);
    if (*synth) return cmd_synth(o, out);
    if (*validate) return cmd_validate(o, out);
    if (*serve) return cmd_serve(o, out);
  } catch (const Failure& f) {
    std::string detail;
    for (const auto& line : f.lines) detail += line + "\n";
    report(f.what(), std::string(to_string(f.code)), detail, o.json_errors, err);
    return 1;
  } catch (const Error& e) {
    report(e.what(), std::string(to_string(e.code())), e.detail(), o.json_errors, err);
    return 1;
  } catch (const std::exception& e) {
    report(e.what(), "Internal", "", o.json_errors, err);
    return 1;
  }
  return 2;
}

}  // namespace lingua::cli
