#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "eigengaze/eigenspace.hpp"
#include "eigengaze/recog.hpp"

namespace eigengaze {

struct EnrollmentPolicy {
  /// Fixed unknown threshold; nullopt selects the automatic rule.
  std::optional<double> unknown_threshold;
  double auto_margin = 1.5;

  friend bool operator==(const EnrollmentPolicy&, const EnrollmentPolicy&) = default;
};

/// Per-object eigenspaces in acquisition order.
///
/// Thread safety: accumulate() and classify_or_enroll() with pending views
/// take the registry's lock exclusively; every other member takes it shared.
/// Eigenspaces are immutable and handed out as shared_ptr, so a snapshot()
/// stays valid and unchanged while later objects are enrolled.
class ObjectRegistry {
 public:
  explicit ObjectRegistry(EnrollmentPolicy policy = {});

  ObjectRegistry(const ObjectRegistry&) = delete;
  ObjectRegistry& operator=(const ObjectRegistry&) = delete;

  EnrollmentPolicy policy() const;
  void set_policy(EnrollmentPolicy policy);

  std::size_t size() const;
  bool contains(const std::string& object_id) const;
  std::vector<std::shared_ptr<const Eigenspace>> snapshot() const;

  /// Builds and appends a new object's eigenspace; existing spaces are never
  /// touched. Throws DuplicateObject, DimensionMismatch, NormModeMismatch and
  /// any build_eigenspace error.
  std::shared_ptr<const Eigenspace> accumulate(const std::string& object_id,
                                               std::span<const AppearanceVector> appearances,
                                               const EigenspaceConfig& config);

  /// Appends a prebuilt (e.g. loaded) eigenspace under the same checks.
  void add(Eigenspace es);

 private:
  friend struct RegistryAccess;

  EnrollmentPolicy policy_;
  std::vector<std::shared_ptr<const Eigenspace>> spaces_;
  mutable std::shared_mutex mutex_;
};

/// Explicit threshold if set, else auto_margin times the largest
/// leave-self-out nearest-neighbour distance inside any single manifold.
/// Throws InsufficientData when the rule has nothing to measure.
double effective_threshold(const ObjectRegistry& reg);

/// The automatic rule over an explicit set of spaces.
double auto_threshold(std::span<const std::shared_ptr<const Eigenspace>> spaces, double margin);

struct Decision {
  bool known = false;
  std::optional<RecognitionResult> result;  // empty only when the registry was empty
  double threshold = 0.0;                   // 0 when the registry was empty
  std::optional<std::string> enrolled_id;
};

/// Recognizes v; when the best score exceeds the threshold the query is
/// Unknown and, if pending_views are given, they are enrolled as a new
/// object named "object-N". Throws EmptyRegistryNoViews.
Decision classify_or_enroll(ObjectRegistry& reg, const AppearanceVector& v,
                            std::optional<std::span<const AppearanceVector>> pending_views = std::nullopt,
                            const EigenspaceConfig& config = {}, const RecognitionOptions& options = {});

/// Directory layout: one `<object_id>.eig` model per object plus
/// `registry.manifest` (acquisition order and policy).
void save_registry(const ObjectRegistry& reg, const std::filesystem::path& dir);
/// Throws IoError when the directory or a file is missing, plus model errors.
std::unique_ptr<ObjectRegistry> load_registry(const std::filesystem::path& dir);

}  // namespace eigengaze
