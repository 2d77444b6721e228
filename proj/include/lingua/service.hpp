#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "json.hpp"
#include "lingua/catalog.hpp"
#include "lingua/metrics.hpp"
#include "lingua/projection.hpp"
#include "lingua/ranker.hpp"
#include "lingua/snapshot.hpp"
#include "lingua/synthgen.hpp"

namespace lingua {

// Shared by the CLI and the service so both emit the same documents.
nlohmann::json ranked_to_json(const RankedList& list, const Catalog& catalog);
std::string ranked_to_tsv(const RankedList& list, const Catalog& catalog);
nlohmann::json error_to_json(const Error& error);
int http_status(ErrorCode code);

struct HttpRequest {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ServiceOptions {
  SammonParams sammon;
  PlacementParams placement;
  std::size_t nearest = 5;          // symbols reported by /place
  std::vector<SampleUser> users;    // embedded alongside the symbols
};

// Read-only query service over one immutable snapshot. handle() is safe to
// call concurrently; embeddings are computed once per dimension.
class Service {
 public:
  Service() = default;  // no model: every endpoint answers 409
  Service(ModelSnapshot snapshot, ServiceOptions options = {},
          std::optional<Embedding> embedding = std::nullopt);

  bool loaded() const noexcept { return catalog_ != nullptr; }
  HttpResponse handle(const HttpRequest& request) const;
  const Embedding& embedding(int dim) const;

 private:
  nlohmann::json schema() const;
  nlohmann::json symbols(const HttpRequest& request) const;
  nlohmann::json rank(const nlohmann::json& body) const;
  nlohmann::json place(const nlohmann::json& body) const;
  nlohmann::json metrics(const std::string& id) const;
  nlohmann::json inverse(const std::string& id) const;

  struct Lazy {
    std::once_flag once;
    std::optional<Embedding> value;
  };

  std::shared_ptr<const ModelSnapshot> snapshot_;
  std::shared_ptr<const Catalog> catalog_;
  ServiceOptions options_;
  std::shared_ptr<Lazy> embed2_ = std::make_shared<Lazy>();
  std::shared_ptr<Lazy> embed3_ = std::make_shared<Lazy>();
};

// Blocks serving `service` over HTTP until the process is interrupted.
void serve(const Service& service, const std::string& host, int port);

}  // namespace lingua
