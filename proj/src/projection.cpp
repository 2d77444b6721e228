#include "lingua/projection.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "lingua/random.hpp"

namespace lingua {

std::vector<double> one_hot(const AnswerVector& answers, const ResponseShape& shape) {
  if (answers.choices.size() != shape.questions())
    throw Error(ErrorCode::IncompleteAnswers, "answer count does not match the schema");
  std::vector<double> out(shape.dim(), 0.0);
  for (std::size_t q = 0; q < answers.choices.size(); ++q) {
    const int c = answers.choices[q];
    if (c == AnswerVector::kUnanswered) continue;
    out[shape.offset(q) + static_cast<std::size_t>(c)] = 1.0;
  }
  return out;
}

PointCloud vectorize(const Catalog& catalog, std::span<const UserPoint> users,
                     const VectorizeOptions& options) {
  if (catalog.store().empty()) throw Error(ErrorCode::EmptyStore, "history store is empty");
  const ResponseShape& shape = catalog.store().schema().shape();
  PointCloud cloud;
  cloud.dimension = shape.dim();
  for (const auto& entry : catalog.entries()) {
    Point point{entry.id, entry.kind, entry.category, static_cast<double>(entry.events()), {}};
    switch (entry.kind) {
      case SymbolKind::base:
        if (!options.include_base) continue;
        break;
      case SymbolKind::meta:
        if (!options.include_meta) continue;
        break;
      case SymbolKind::inverse:
        if (!options.include_inverse) continue;
        break;
      case SymbolKind::user:
        continue;
    }
    if (entry.kind == SymbolKind::inverse) {
      const auto cells = entry.probs.p.cells();
      point.vector.assign(cells.begin(), cells.end());
    } else {
      const auto pv = probabilities(entry.history, options.smoothing, catalog.store());
      point.vector.assign(pv.p.cells().begin(), pv.p.cells().end());
    }
    cloud.points.push_back(std::move(point));
  }
  for (const auto& user : users) {
    user.answers.validate(catalog.store().schema());
    cloud.points.push_back(
        {user.id, SymbolKind::user, "user", 1.0, one_hot(user.answers, shape)});
  }
  return cloud;
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "vector lengths differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum);
}

DistanceMatrix distances(std::span<const std::vector<double>> vectors) {
  DistanceMatrix d(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i)
    for (std::size_t j = i + 1; j < vectors.size(); ++j)
      d(i, j) = d(j, i) = euclidean(vectors[i], vectors[j]);
  return d;
}

DistanceMatrix distances(const PointCloud& cloud) {
  std::vector<std::vector<double>> vectors;
  vectors.reserve(cloud.points.size());
  for (const auto& p : cloud.points) vectors.push_back(p.vector);
  return distances(vectors);
}

namespace {

using Flat = std::vector<double>;  // n x dim, row-major

double flat_distance(const Flat& y, std::size_t i, std::size_t j, int dim) {
  double sum = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double diff = y[i * dim + k] - y[j * dim + k];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

double target_sum(const DistanceMatrix& target, double floor) {
  double c = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i)
    for (std::size_t j = i + 1; j < target.size(); ++j) c += std::max(target(i, j), floor);
  return c;
}

double flat_stress(const DistanceMatrix& target, const Flat& y, int dim, double floor, double c) {
  double e = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i)
    for (std::size_t j = i + 1; j < target.size(); ++j) {
      const double ds = std::max(target(i, j), floor);
      const double d = std::max(flat_distance(y, i, j, dim), floor);
      e += (ds - d) * (ds - d) / ds;
    }
  return c > 0.0 ? e / c : 0.0;
}

struct RunResult {
  Flat coords;
  double stress = 0.0;
  std::size_t iterations = 0;
  std::vector<double> trace;
};

// One Sammon descent: per-coordinate Newton step (gradient over |second
// derivative|) scaled by the magic factor, halved until stress drops.
RunResult sammon_run(const DistanceMatrix& target, Flat y, const SammonParams& params) {
  const std::size_t n = target.size();
  const int dim = params.dim;
  const double floor = params.min_dist_floor;
  const double c = target_sum(target, floor);

  RunResult run;
  double e = flat_stress(target, y, dim, floor, c);
  run.trace.push_back(e);
  Flat grad(n * dim), step(n * dim), trial(n * dim);

  for (std::size_t it = 0; it < params.max_iter && e > 0.0; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      for (int k = 0; k < dim; ++k) {
        double g = 0.0, h = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          const double ds = std::max(target(i, j), floor);
          const double d = std::max(flat_distance(y, i, j, dim), floor);
          const double delta = ds - d;
          const double denom = ds * d;
          const double diff = y[i * dim + k] - y[j * dim + k];
          g += delta / denom * diff;
          h += (delta - diff * diff / d * (1.0 + delta / d)) / denom;
        }
        g *= -2.0 / c;
        h *= -2.0 / c;
        step[i * dim + k] = g / std::max(std::abs(h), 1e-300);
      }
    }
    double scale = params.magic_factor;
    double e_new = std::numeric_limits<double>::infinity();
    bool improved = false;
    for (std::size_t halving = 0; halving <= params.max_halvings; ++halving) {
      for (std::size_t m = 0; m < trial.size(); ++m) trial[m] = y[m] - scale * step[m];
      e_new = flat_stress(target, trial, dim, floor, c);
      if (e_new < e) {
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;
    y.swap(trial);
    run.iterations = it + 1;
    run.trace.push_back(e_new);
    const double relative = (e - e_new) / e;
    e = e_new;
    if (relative < params.tol) break;
  }
  run.coords = std::move(y);
  run.stress = e;
  return run;
}

std::vector<std::vector<double>> unflatten(const Flat& y, std::size_t n, int dim) {
  std::vector<std::vector<double>> out(n, std::vector<double>(dim));
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < dim; ++k) out[i][k] = y[i * dim + k];
  return out;
}

}  // namespace

double sammon_stress(const DistanceMatrix& target, const std::vector<std::vector<double>>& coords,
                     double floor) {
  if (coords.size() != target.size())
    throw Error(ErrorCode::LengthMismatch, "coordinate count does not match distance matrix");
  const int dim = coords.empty() ? 0 : static_cast<int>(coords.front().size());
  Flat y;
  for (const auto& c : coords) y.insert(y.end(), c.begin(), c.end());
  return flat_stress(target, y, dim, floor, target_sum(target, floor));
}

Embedding sammon(const DistanceMatrix& target, const SammonParams& params) {
  if (params.dim != 2 && params.dim != 3)
    throw Error(ErrorCode::DimensionUnsupported, "target dimension must be 2 or 3");
  const std::size_t n = target.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(target(i, i)) > 1e-12)
      throw Error(ErrorCode::NonSymmetricInput, "distance matrix diagonal is not zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = target(i, j), b = target(j, i);
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)) || a < 0.0 || !std::isfinite(a))
        throw Error(ErrorCode::NonSymmetricInput, "distance matrix is not symmetric");
    }
  }
  const int dim = params.dim;

  std::vector<Flat> starts;
  if (params.initial) {
    if (params.initial->size() != n)
      throw Error(ErrorCode::LengthMismatch, "initial coordinates do not match point count");
    Flat y;
    for (const auto& c : *params.initial) {
      if (c.size() != static_cast<std::size_t>(dim))
        throw Error(ErrorCode::LengthMismatch, "initial coordinate has wrong dimension");
      y.insert(y.end(), c.begin(), c.end());
    }
    starts.push_back(std::move(y));
  } else {
    const std::size_t restarts = std::max<std::size_t>(1, params.restarts);
    for (std::size_t r = 0; r < restarts; ++r) {
      std::mt19937_64 rng(derive_seed(params.seed, r));
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      Flat y(n * dim);
      for (double& v : y) v = unit(rng);
      starts.push_back(std::move(y));
    }
  }

  std::vector<std::future<RunResult>> runs;
  for (auto& start : starts)
    runs.push_back(std::async(std::launch::async, sammon_run, std::cref(target), std::move(start),
                              std::cref(params)));
  std::optional<RunResult> best;
  for (auto& f : runs) {
    RunResult run = f.get();
    if (!best || run.stress < best->stress) best = std::move(run);
  }

  Embedding embedding;
  embedding.dim = dim;
  embedding.stress = best->stress;
  embedding.iterations_used = best->iterations;
  embedding.stress_trace = std::move(best->trace);
  auto coords = unflatten(best->coords, n, dim);
  embedding.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) embedding.points[i].coords = std::move(coords[i]);
  return embedding;
}

Embedding project(const PointCloud& cloud, const SammonParams& params) {
  Embedding embedding = sammon(distances(cloud), params);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    auto& out = embedding.points[i];
    const auto& in = cloud.points[i];
    out.id = in.id;
    out.kind = in.kind;
    out.category = in.category;
    out.weight = in.weight;
    out.vector = in.vector;
  }
  return embedding;
}

double placement_stress(const Embedding& embedding, std::span<const double> target,
                        std::span<const double> position, double floor) {
  if (target.size() != embedding.points.size())
    throw Error(ErrorCode::LengthMismatch, "distance vector does not match embedding size");
  double e = 0.0;
  for (std::size_t j = 0; j < target.size(); ++j) {
    const double ds = std::max(target[j], floor);
    const double d = std::max(euclidean(position, embedding.points[j].coords), floor);
    e += (ds - d) * (ds - d) / ds;
  }
  return e;
}

std::vector<double> place_point(const Embedding& embedding, std::span<const double> target,
                                const PlacementParams& params) {
  const std::size_t n = embedding.points.size();
  if (target.size() != n)
    throw Error(ErrorCode::LengthMismatch, "distance vector does not match embedding size");
  if (n == 0) throw Error(ErrorCode::EmptyStore, "embedding has no points");
  const int dim = embedding.dim;
  const double floor = params.min_dist_floor;

  auto stress_at = [&](const std::vector<double>& x) {
    return placement_stress(embedding, target, x, floor);
  };

  auto descend = [&](std::vector<double> x) {
    double e = stress_at(x);
    std::vector<double> step(dim), trial(dim);
    for (std::size_t it = 0; it < params.max_iter && e > 0.0; ++it) {
      for (int k = 0; k < dim; ++k) {
        double g = 0.0, h = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double ds = std::max(target[j], floor);
          const double d = std::max(euclidean(x, embedding.points[j].coords), floor);
          const double delta = ds - d;
          const double diff = x[k] - embedding.points[j].coords[k];
          g += -2.0 * delta / (ds * d) * diff;
          h += -2.0 / (ds * d) * (delta - diff * diff / d * (1.0 + delta / d));
        }
        step[k] = g / std::max(std::abs(h), 1e-300);
      }
      double scale = 1.0;
      bool improved = false;
      double e_new = e;
      for (int halving = 0; halving < 60; ++halving) {
        for (int k = 0; k < dim; ++k) trial[k] = x[k] - scale * step[k];
        e_new = stress_at(trial);
        if (e_new < e) {
          improved = true;
          break;
        }
        scale *= 0.5;
      }
      if (!improved) break;
      const double relative = (e - e_new) / e;
      x = trial;
      e = e_new;
      if (relative < 1e-14) break;
    }
    return std::make_pair(e, x);
  };

  std::vector<std::vector<double>> starts;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return target[a] < target[b]; });
  for (std::size_t i = 0; i < std::min(params.nearest_starts, n); ++i)
    starts.push_back(embedding.points[order[i]].coords);

  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  for (const auto& p : embedding.points)
    for (int k = 0; k < dim; ++k) {
      lo[k] = std::min(lo[k], p.coords[k]);
      hi[k] = std::max(hi[k], p.coords[k]);
    }
  std::mt19937_64 rng(derive_seed(params.seed, 0x9ace));
  for (std::size_t s = 0; s < params.random_starts; ++s) {
    std::vector<double> x(dim);
    for (int k = 0; k < dim; ++k) {
      const double pad = 0.1 * (hi[k] - lo[k]) + 1e-3;
      std::uniform_real_distribution<double> u(lo[k] - pad, hi[k] + pad);
      x[k] = u(rng);
    }
    starts.push_back(std::move(x));
  }

  std::pair<double, std::vector<double>> best{std::numeric_limits<double>::infinity(), {}};
  for (auto& start : starts) {
    auto result = descend(std::move(start));
    if (result.first < best.first) best = std::move(result);
  }
  return best.second;
}

nlohmann::json embedding_to_json(const Embedding& embedding) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : embedding.points) {
    nlohmann::json point = {{"id", p.id},
                            {"kind", std::string(to_string(p.kind))},
                            {"category", p.category},
                            {"weight", p.weight},
                            {"coords", p.coords}};
    if (!p.vector.empty()) point["vector"] = p.vector;
    points.push_back(std::move(point));
  }
  return {{"format_version", 1},
          {"dim", embedding.dim},
          {"stress", embedding.stress},
          {"iterations_used", embedding.iterations_used},
          {"points", std::move(points)}};
}

Embedding embedding_from_json(const nlohmann::json& doc) {
  if (doc.value("format_version", 0) != 1)
    throw Error(ErrorCode::UnsupportedFormat, "embedding: unsupported format_version");
  Embedding embedding;
  try {
    embedding.dim = doc.at("dim").get<int>();
    embedding.stress = doc.at("stress").get<double>();
    embedding.iterations_used = doc.value("iterations_used", std::size_t{0});
    for (const auto& p : doc.at("points")) {
      EmbeddedPoint point;
      point.id = p.at("id").get<std::string>();
      point.kind = kind_from_string(p.value("kind", std::string("base")));
      point.category = p.value("category", std::string{});
      point.weight = p.value("weight", 0.0);
      point.coords = p.at("coords").get<std::vector<double>>();
      if (p.contains("vector")) point.vector = p.at("vector").get<std::vector<double>>();
      if (point.coords.size() != static_cast<std::size_t>(embedding.dim))
        throw Error(ErrorCode::LengthMismatch, "point '" + point.id + "' has wrong dimension");
      embedding.points.push_back(std::move(point));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::UnsupportedFormat, std::string("malformed embedding: ") + e.what());
  }
  return embedding;
}

std::string scatter_svg(const Embedding& embedding, const std::string& title) {
  constexpr double kSize = 800.0, kMargin = 60.0, kLegend = 180.0;
  constexpr double kMinRadius = 2.0, kMaxRadius = 28.0;
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
                                   "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173"};

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1, wmax = 0;
  if (!embedding.points.empty()) {
    xmin = ymin = std::numeric_limits<double>::infinity();
    xmax = ymax = -std::numeric_limits<double>::infinity();
    for (const auto& p : embedding.points) {
      xmin = std::min(xmin, p.coords[0]);
      xmax = std::max(xmax, p.coords[0]);
      ymin = std::min(ymin, p.coords[1]);
      ymax = std::max(ymax, p.coords[1]);
      if (p.kind != SymbolKind::user) wmax = std::max(wmax, p.weight);
    }
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double plot = kSize - 2 * kMargin;
  auto px = [&](double x) { return kMargin + (x - xmin) / span * plot; };
  auto py = [&](double y) { return kSize - kMargin - (y - ymin) / span * plot; };

  std::map<std::string, std::string> colours;
  for (const auto& p : embedding.points) colours.emplace(p.category, "");
  std::size_t next = 0;
  for (auto& [category, colour] : colours)
    colour = category == "user" ? "#bbbbbb" : kPalette[next++ % std::size(kPalette)];

  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize + kLegend << "\" height=\""
      << kSize << "\" viewBox=\"0 0 " << kSize + kLegend << ' ' << kSize << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kMargin << "\" y=\"30\" font-family=\"sans-serif\" font-size=\"16\">"
      << title << " (stress " << std::setprecision(4) << embedding.stress << std::setprecision(2)
      << ")</text>\n";

  // Largest bubbles first so small ones stay visible.
  std::vector<const EmbeddedPoint*> order;
  for (const auto& p : embedding.points) order.push_back(&p);
  std::stable_sort(order.begin(), order.end(),
                   [](const EmbeddedPoint* a, const EmbeddedPoint* b) { return a->weight > b->weight; });
  for (const auto* p : order) {
    double r = 2.0;
    if (p->kind != SymbolKind::user && wmax > 0.0)
      r = std::max(kMinRadius, kMaxRadius * std::sqrt(p->weight / wmax));
    out << "<circle cx=\"" << px(p->coords[0]) << "\" cy=\"" << py(p->coords[1]) << "\" r=\"" << r
        << "\" fill=\"" << colours[p->category] << "\" fill-opacity=\"0.55\" stroke=\""
        << (p->kind == SymbolKind::meta ? "#333333" : "none") << "\"><title>" << p->id
        << "</title></circle>\n";
  }
  double ly = 60.0;
  for (const auto& [category, colour] : colours) {
    out << "<circle cx=\"" << kSize + 15 << "\" cy=\"" << ly << "\" r=\"6\" fill=\"" << colour
        << "\"/><text x=\"" << kSize + 28 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << category << "</text>\n";
    ly += 18.0;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace lingua
