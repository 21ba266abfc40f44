#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eigengaze/eigenspace.hpp"

namespace eigengaze {

class ObjectRegistry;

struct RecognitionOptions {
  /// Score by in-space distance only, ignoring the distance from the subspace.
  bool in_space_only = false;
};

struct Candidate {
  std::string object_id;
  double score = 0.0;
};

struct RecognitionResult {
  std::string best_object;
  ViewLabel best_view;
  double in_space_distance = 0.0;
  double residual = 0.0;
  double combined_score = 0.0;
  std::vector<Candidate> ranked_candidates;  // closest first
};

/// Nearest manifold point across every space. Spaces are scored by
/// sqrt(in_space^2 + residual^2); ties go to the earliest space, then to the
/// lowest view angle. Throws EmptyRegistry, DimensionMismatch, NormModeMismatch.
RecognitionResult recognize(std::span<const std::shared_ptr<const Eigenspace>> spaces, const AppearanceVector& v,
                            const RecognitionOptions& options = {});
RecognitionResult recognize(const ObjectRegistry& reg, const AppearanceVector& v,
                            const RecognitionOptions& options = {});

struct LabeledQuery {
  AppearanceVector vector;
  std::string true_id;
};

struct ObjectTally {
  std::size_t queries = 0;
  std::size_t successes = 0;
  double rate() const { return queries ? static_cast<double>(successes) / static_cast<double>(queries) : 0.0; }
};

/// Recognition rate r = m / P with per-object and confusion breakdowns.
struct EvaluationReport {
  std::size_t queries = 0;    // P
  std::size_t successes = 0;  // m
  std::map<std::string, ObjectTally> per_object;
  std::map<std::pair<std::string, std::string>, std::size_t> confusion;  // (true, predicted) -> count

  double rate() const { return static_cast<double>(successes) / static_cast<double>(queries); }
};

/// Success means the predicted object id equals the true id. `threads` > 1
/// spreads queries over worker threads; the report does not depend on it.
/// Throws EmptyQuerySet.
EvaluationReport evaluate(const ObjectRegistry& reg, std::span<const LabeledQuery> queries,
                          const RecognitionOptions& options = {}, unsigned threads = 1);

/// Human-readable summary.
std::string report_text(const EvaluationReport& report);
/// Confusion table (true_id,predicted_id,count) followed by the P,m,r summary.
std::string report_csv(const EvaluationReport& report);

struct CoordinateRow {
  int angle_deg = 0;
  bool occluded = false;
  std::vector<double> coords;
};

/// Leading `dims` coordinates of every manifold point, axes in descending
/// eigenvalue order. Throws DimsTooLarge when dims > k.
std::vector<CoordinateRow> dump_coordinates(const Eigenspace& es, std::size_t dims = 3);

}  // namespace eigengaze
