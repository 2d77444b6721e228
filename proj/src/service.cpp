#include "lingua/service.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "httplib.h"
#include "lingua/io.hpp"

namespace lingua {

using nlohmann::json;

json ranked_to_json(const RankedList& list, const Catalog& catalog) {
  json entries = json::array();
  std::size_t position = 0;
  for (const auto& e : list.entries) {
    const CatalogEntry* entry = catalog.find(e.id);
    entries.push_back({{"rank", ++position},
                       {"id", e.id},
                       {"name", entry ? entry->name : e.id},
                       {"category", e.category},
                       {"kind", std::string(to_string(e.kind))},
                       {"abstraction_level", entry ? entry->abstraction_level : 0},
                       {"log_score", e.log_score}});
  }
  json focus = nullptr;
  if (list.focus) focus = std::vector<std::string>(list.focus->begin(), list.focus->end());
  return {{"alpha", list.alpha}, {"focus", std::move(focus)}, {"entries", std::move(entries)}};
}

std::string ranked_to_tsv(const RankedList& list, const Catalog& catalog) {
  std::ostringstream out;
  out.precision(17);
  out << "rank\tid\tcategory\tkind\tlog_score\tname\n";
  std::size_t position = 0;
  for (const auto& e : list.entries) {
    const CatalogEntry* entry = catalog.find(e.id);
    out << ++position << '\t' << e.id << '\t' << e.category << '\t' << to_string(e.kind) << '\t'
        << e.log_score << '\t' << (entry ? entry->name : e.id) << '\n';
  }
  return out.str();
}

json error_to_json(const Error& error) {
  return {{"error_code", std::string(to_string(error.code()))},
          {"message", error.what()},
          {"detail", error.detail()}};
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::UnknownId:
    case ErrorCode::UnknownBaseSymbol:
      return 404;
    case ErrorCode::ModelNotLoaded:
      return 409;
    case ErrorCode::IoError:
      return 500;
    default:
      return 400;
  }
}

namespace {

std::string percent_decode(const std::string& text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '%' && i + 2 < text.size() && std::isxdigit(text[i + 1]) &&
        std::isxdigit(text[i + 2])) {
      out.push_back(static_cast<char>(std::stoi(text.substr(i + 1, 2), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  try {
    json doc = json::parse(body);
    if (!doc.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be an object");
    return doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed JSON body: ") + e.what());
  }
}

std::set<std::string> parse_focus(const json& focus) {
  std::set<std::string> out;
  if (focus.is_string()) {
    std::stringstream in(focus.get<std::string>());
    std::string item;
    while (std::getline(in, item, ','))
      if (!item.empty()) out.insert(item);
  } else {
    for (const auto& item : focus) out.insert(item.get<std::string>());
  }
  return out;
}

std::vector<std::vector<double>> rows_of(const RealTable& table) {
  std::vector<std::vector<double>> rows;
  for (std::size_t q = 0; q < table.shape().questions(); ++q) {
    const auto row = table.row(q);
    rows.emplace_back(row.begin(), row.end());
  }
  return rows;
}

}  // namespace

Service::Service(ModelSnapshot snapshot, ServiceOptions options,
                 std::optional<Embedding> embedding)
    : snapshot_(std::make_shared<const ModelSnapshot>(std::move(snapshot))),
      options_(std::move(options)) {
  catalog_ = std::make_shared<const Catalog>(snapshot_->catalog());
  if (embedding) {
    Lazy& slot = embedding->dim == 3 ? *embed3_ : *embed2_;
    std::call_once(slot.once, [&] { slot.value = std::move(embedding); });
  }
}

const Embedding& Service::embedding(int dim) const {
  if (!loaded()) throw Error(ErrorCode::ModelNotLoaded, "no model loaded");
  if (dim != 2 && dim != 3)
    throw Error(ErrorCode::DimensionUnsupported, "dim must be 2 or 3");
  Lazy& slot = dim == 3 ? *embed3_ : *embed2_;
  std::call_once(slot.once, [&] {
    std::vector<UserPoint> users;
    for (const auto& u : options_.users) users.push_back({u.id, u.answers});
    SammonParams params = options_.sammon;
    params.dim = dim;
    slot.value = project(vectorize(*catalog_, users), params);
  });
  return *slot.value;
}

json Service::schema() const { return io::schema_to_json(catalog_->store().schema()); }

json Service::symbols(const HttpRequest& request) const {
  std::optional<SymbolKind> kind;
  std::optional<std::string> category;
  if (auto it = request.query.find("kind"); it != request.query.end() && !it->second.empty()) {
    try {
      kind = kind_from_string(it->second);
    } catch (const Error&) {
      throw Error(ErrorCode::InvalidArgument, "unknown kind '" + it->second + "'");
    }
  }
  if (auto it = request.query.find("category"); it != request.query.end() && !it->second.empty())
    category = it->second;
  json list = json::array();
  for (const auto& e : catalog_->entries()) {
    if (kind && e.kind != *kind) continue;
    if (category && e.category != *category) continue;
    list.push_back({{"id", e.id},
                    {"name", e.name},
                    {"category", e.category},
                    {"kind", std::string(to_string(e.kind))},
                    {"abstraction_level", e.abstraction_level},
                    {"member_count", e.member_count},
                    {"weight", e.events()}});
  }
  return {{"symbols", std::move(list)}};
}

json Service::rank(const json& body) const {
  if (!body.contains("answers"))
    throw Error(ErrorCode::IncompleteAnswers, "request has no answers");
  RankOptions options;
  try {
    options.alpha = body.value("alpha", snapshot_->metadata.alpha);
    options.allow_partial = body.value("partial", false);
    if (body.contains("focus") && !body.at("focus").is_null())
      options.focus = parse_focus(body.at("focus"));
    if (body.contains("limit") && !body.at("limit").is_null())
      options.limit = body.at("limit").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed rank request: ") + e.what());
  }
  const AnswerVector answers =
      io::answers_from_json(body.at("answers"), catalog_->store().schema(), options.allow_partial);
  return ranked_to_json(lingua::rank(*catalog_, answers, options), *catalog_);
}

json Service::place(const json& body) const {
  if (!body.contains("answers"))
    throw Error(ErrorCode::IncompleteAnswers, "request has no answers");
  int dim = 2;
  try {
    dim = body.value("dim", 2);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed place request: ") + e.what());
  }
  const auto& schema = catalog_->store().schema();
  const AnswerVector answers = io::answers_from_json(body.at("answers"), schema);
  const Embedding& e = embedding(dim);
  const auto vector = one_hot(answers, schema.shape());
  std::vector<double> target;
  target.reserve(e.points.size());
  for (const auto& p : e.points) target.push_back(euclidean(vector, p.vector));
  const auto coords = place_point(e, target, options_.placement);

  std::vector<std::pair<double, std::size_t>> near;
  for (std::size_t i = 0; i < e.points.size(); ++i)
    if (e.points[i].kind != SymbolKind::user)
      near.emplace_back(euclidean(coords, e.points[i].coords), i);
  std::sort(near.begin(), near.end());
  near.resize(std::min(near.size(), options_.nearest));
  json nearest = json::array();
  for (const auto& [d, i] : near)
    nearest.push_back({{"id", e.points[i].id},
                       {"category", e.points[i].category},
                       {"kind", std::string(to_string(e.points[i].kind))},
                       {"distance", d}});
  return {{"dim", dim},
          {"coords", coords},
          {"stress", placement_stress(e, target, coords, options_.placement.min_dist_floor)},
          {"nearest", std::move(nearest)}};
}

json Service::metrics(const std::string& id) const {
  return metrics_to_json(symbol_metrics(catalog_->at(id), catalog_->baseline()));
}

json Service::inverse(const std::string& id) const {
  const CatalogEntry* entry = catalog_->find(id);
  if (!entry || entry->kind != SymbolKind::inverse) entry = catalog_->find(inverse_id(id));
  if (!entry) throw Error(ErrorCode::NotFound, "no inverse for '" + id + "'");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t negative = 0;
  for (double v : entry->probs.p.cells()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    if (v < 0.0) ++negative;
  }
  return {{"id", entry->id},
          {"source_id", entry->source_id},
          {"category", entry->category},
          {"user_count", entry->events()},
          {"prior", entry->probs.prior},
          {"min_probability", lo},
          {"max_probability", hi},
          {"negative_cells", negative},
          {"pseudo_probabilities", rows_of(entry->probs.p)},
          {"metrics", metrics_to_json(symbol_metrics(*entry, catalog_->baseline()))}};
}

HttpResponse Service::handle(const HttpRequest& request) const {
  HttpResponse response;
  try {
    if (!loaded()) throw Error(ErrorCode::ModelNotLoaded, "no model loaded");
    const std::string path = percent_decode(request.path);
    const bool get = request.method == "GET", post = request.method == "POST";
    json out;
    if (get && path == "/schema") {
      out = schema();
    } else if (get && path == "/symbols") {
      out = symbols(request);
    } else if (post && path == "/rank") {
      out = rank(parse_body(request.body));
    } else if (post && path == "/place") {
      out = place(parse_body(request.body));
    } else if (get && path == "/embedding") {
      int dim = 2;
      if (auto it = request.query.find("dim"); it != request.query.end()) {
        try {
          dim = std::stoi(it->second);
        } catch (const std::exception&) {
          throw Error(ErrorCode::InvalidArgument, "dim must be an integer");
        }
      }
      out = embedding_to_json(embedding(dim));
    } else if (get && path.rfind("/metrics/", 0) == 0) {
      out = metrics(path.substr(9));
    } else if (get && path.rfind("/inverse/", 0) == 0) {
      out = inverse(path.substr(9));
    } else {
      throw Error(ErrorCode::NotFound, "no endpoint " + request.method + " " + path);
    }
    response.body = out.dump();
  } catch (const Error& e) {
    response.status = http_status(e.code());
    response.body = error_to_json(e).dump();
  } catch (const std::exception& e) {
    response.status = 500;
    response.body = json{{"error_code", "Internal"}, {"message", e.what()}, {"detail", ""}}.dump();
  }
  return response;
}

void serve(const Service& service, const std::string& host, int port) {
  httplib::Server server;
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    HttpRequest request{req.method, req.path, {}, req.body};
    for (const auto& [key, value] : req.params) request.query[key] = value;
    const HttpResponse response = service.handle(request);
    res.status = response.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(response.body, response.content_type);
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  if (!server.listen(host, port))
    throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace lingua
