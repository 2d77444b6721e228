#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lingua/catalog.hpp"

namespace lingua {

struct Point {
  std::string id;
  SymbolKind kind = SymbolKind::base;
  std::string category;
  double weight = 0.0;  // history size, for bubble scaling
  std::vector<double> vector;
};

// Points in the flattened (question, response) space.
struct PointCloud {
  std::size_t dimension = 0;
  std::vector<Point> points;
};

struct UserPoint {
  std::string id;
  AnswerVector answers;
};

struct VectorizeOptions {
  double smoothing = kDefaultSmoothing;
  bool include_base = true;
  bool include_meta = true;
  bool include_inverse = false;
};

std::vector<double> one_hot(const AnswerVector& answers, const ResponseShape& shape);

// Symbols -> smoothed probability rows, inverses -> pseudo-probabilities,
// users -> one-hot answers. Throws EmptyStore.
PointCloud vectorize(const Catalog& catalog, std::span<const UserPoint> users,
                     const VectorizeOptions& options = {});

class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

double euclidean(std::span<const double> a, std::span<const double> b);
DistanceMatrix distances(std::span<const std::vector<double>> vectors);
DistanceMatrix distances(const PointCloud& cloud);

struct SammonParams {
  int dim = 2;
  std::size_t max_iter = 500;
  double magic_factor = 0.35;
  std::uint64_t seed = 1;
  std::size_t restarts = 5;  // seeded random inits, best stress kept
  // When set, a single run starts from these coordinates.
  std::optional<std::vector<std::vector<double>>> initial;
  double min_dist_floor = 1e-9;
  double tol = 1e-9;
  std::size_t max_halvings = 20;
};

struct EmbeddedPoint {
  std::string id;
  SymbolKind kind = SymbolKind::base;
  std::string category;
  double weight = 0.0;
  std::vector<double> coords;
  std::vector<double> vector;  // source-space vector, needed for live placement
};

struct Embedding {
  int dim = 2;
  double stress = 0.0;
  std::size_t iterations_used = 0;
  std::vector<double> stress_trace;  // stress after each accepted iteration
  std::vector<EmbeddedPoint> points;
};

// Sammon stress of `coords` against `target`, distances clamped to `floor`.
double sammon_stress(const DistanceMatrix& target, const std::vector<std::vector<double>>& coords,
                     double floor = 1e-9);

// Throws NonSymmetricInput, DimensionUnsupported.
Embedding sammon(const DistanceMatrix& target, const SammonParams& params = {});

// vectorize -> distances -> sammon, carrying ids, kinds, and vectors along.
Embedding project(const PointCloud& cloud, const SammonParams& params = {});

struct PlacementParams {
  std::uint64_t seed = 1;
  std::size_t random_starts = 8;
  std::size_t nearest_starts = 3;
  std::size_t max_iter = 500;
  double min_dist_floor = 1e-9;
};

// Partial stress of a candidate position against frozen coordinates.
double placement_stress(const Embedding& embedding, std::span<const double> target,
                        std::span<const double> position, double floor = 1e-9);

// Position minimizing the new point's partial stress; existing points
// stay put. Throws LengthMismatch.
std::vector<double> place_point(const Embedding& embedding, std::span<const double> target,
                                const PlacementParams& params = {});

nlohmann::json embedding_to_json(const Embedding& embedding);
Embedding embedding_from_json(const nlohmann::json& doc);

// 2-D bubble chart: area proportional to weight, colour by category.
std::string scatter_svg(const Embedding& embedding, const std::string& title = "knowledge space");

}  // namespace lingua
