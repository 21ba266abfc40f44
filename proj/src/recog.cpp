#include "eigengaze/recog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "eigengaze/error.hpp"
#include "eigengaze/numfmt.hpp"
#include "eigengaze/registry.hpp"

namespace eigengaze {

namespace {

struct SpaceScore {
  const ManifoldPoint* nearest = nullptr;
  double in_space = 0.0;
  double residual = 0.0;
  double combined = 0.0;
};

SpaceScore score_space(const Eigenspace& es, const AppearanceVector& v, const RecognitionOptions& options) {
  const auto coords = es.project(v);
  SpaceScore s;
  double best_sq = std::numeric_limits<double>::infinity();
  for (const auto& point : es.manifold()) {
    double sq = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      const double diff = coords[i] - point.coords[i];
      sq += diff * diff;
    }
    if (sq < best_sq || (sq == best_sq && s.nearest && point.label.view_angle_deg < s.nearest->label.view_angle_deg)) {
      best_sq = sq;
      s.nearest = &point;
    }
  }
  s.in_space = std::sqrt(best_sq);
  s.residual = es.residual(v);
  s.combined = options.in_space_only ? s.in_space : std::hypot(s.in_space, s.residual);
  return s;
}

}  // namespace

RecognitionResult recognize(std::span<const std::shared_ptr<const Eigenspace>> spaces, const AppearanceVector& v,
                            const RecognitionOptions& options) {
  if (spaces.empty()) throw Error(ErrorCode::EmptyRegistry, "no eigenspaces to recognize against");

  std::optional<std::size_t> winner;
  SpaceScore best;
  RecognitionResult result;
  result.ranked_candidates.reserve(spaces.size());
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    const SpaceScore s = score_space(*spaces[i], v, options);
    result.ranked_candidates.push_back({spaces[i]->object_id(), s.combined});
    // strict comparison keeps the earliest-acquired space on ties
    if (!winner || s.combined < best.combined) {
      winner = i;
      best = s;
    }
  }
  std::stable_sort(result.ranked_candidates.begin(), result.ranked_candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score < b.score; });

  result.best_object = spaces[*winner]->object_id();
  result.best_view = best.nearest->label;
  result.in_space_distance = best.in_space;
  result.residual = best.residual;
  result.combined_score = best.combined;
  return result;
}

RecognitionResult recognize(const ObjectRegistry& reg, const AppearanceVector& v, const RecognitionOptions& options) {
  return recognize(reg.snapshot(), v, options);
}

EvaluationReport evaluate(const ObjectRegistry& reg, std::span<const LabeledQuery> queries,
                          const RecognitionOptions& options, unsigned threads) {
  if (queries.empty()) throw Error(ErrorCode::EmptyQuerySet, "no queries to evaluate");
  const auto spaces = reg.snapshot();

  std::vector<std::string> predicted(queries.size());
  const auto run = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < queries.size(); i += stride)
      predicted[i] = recognize(spaces, queries[i].vector, options).best_object;
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, queries.size());
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::exception_ptr> failures(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          run(w, workers);
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }

  // aggregation is sequential so the report is independent of scheduling
  EvaluationReport report;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& truth = queries[i].true_id;
    const bool ok = predicted[i] == truth;
    ++report.queries;
    report.successes += ok ? 1 : 0;
    auto& tally = report.per_object[truth];
    ++tally.queries;
    tally.successes += ok ? 1 : 0;
    ++report.confusion[{truth, predicted[i]}];
  }
  return report;
}

std::string report_text(const EvaluationReport& report) {
  std::string out;
  out += "recognition rate r = m/P = " + std::to_string(report.successes) + "/" + std::to_string(report.queries) +
         " = " + numfmt::fixed(report.rate(), 6) + "\n";
  out += "per object:\n";
  for (const auto& [id, tally] : report.per_object) {
    out += "  " + id + "  P=" + std::to_string(tally.queries) + " m=" + std::to_string(tally.successes) +
           " r=" + numfmt::fixed(tally.rate(), 6) + "\n";
  }
  out += "confusion (true -> predicted):\n";
  for (const auto& [key, count] : report.confusion) {
    out += "  " + key.first + " -> " + key.second + " : " + std::to_string(count) + "\n";
  }
  return out;
}

std::string report_csv(const EvaluationReport& report) {
  std::string out = "true_id,predicted_id,count\n";
  for (const auto& [key, count] : report.confusion) {
    out += key.first + "," + key.second + "," + std::to_string(count) + "\n";
  }
  out += "P,m,r\n";
  out += std::to_string(report.queries) + "," + std::to_string(report.successes) + "," +
         numfmt::fixed(report.rate(), 6) + "\n";
  return out;
}

std::vector<CoordinateRow> dump_coordinates(const Eigenspace& es, std::size_t dims) {
  if (dims == 0) throw Error(ErrorCode::InvalidArgument, "dims must be >= 1");
  if (dims > es.k())
    throw Error(ErrorCode::DimsTooLarge, "requested " + std::to_string(dims) + " dimensions, eigenspace '" +
                                             es.object_id() + "' has k = " + std::to_string(es.k()));
  std::vector<CoordinateRow> rows;
  rows.reserve(es.manifold().size());
  for (const auto& p : es.manifold()) {
    rows.push_back({p.label.view_angle_deg, p.label.occluded,
                    std::vector<double>(p.coords.begin(), p.coords.begin() + static_cast<std::ptrdiff_t>(dims))});
  }
  return rows;
}

}  // namespace eigengaze
