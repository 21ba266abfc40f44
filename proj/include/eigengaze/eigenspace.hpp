#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eigengaze/imgio.hpp"

namespace eigengaze {

struct EigenspaceConfig {
  bool centered = true;
  NormMode norm_mode = NormMode::Unit;
  double energy_threshold = 0.95;
  std::optional<std::size_t> k_override;

  friend bool operator==(const EigenspaceConfig&, const EigenspaceConfig&) = default;
};

/// Projected coordinates of one training appearance.
struct ManifoldPoint {
  std::vector<double> coords;
  ViewLabel label;

  friend bool operator==(const ManifoldPoint&, const ManifoldPoint&) = default;
};

/// Object ids name files and appear in line-oriented formats, so they are
/// restricted to [A-Za-z0-9._-] and may not start with '.'.
bool valid_object_id(std::string_view id);

/// One object's appearance subspace. Immutable once constructed, so every
/// const member is safe to call from any number of threads.
class Eigenspace {
 public:
  /// Checks every structural invariant (orthonormal basis, descending
  /// non-negative eigenvalues, coordinate lengths, finiteness).
  /// Throws InvalidArgument or DimensionMismatch.
  Eigenspace(std::string object_id, std::vector<double> mean, std::vector<double> eigenvalues,
             std::vector<std::vector<double>> basis, EigenspaceConfig config,
             std::vector<ManifoldPoint> manifold);

  const std::string& object_id() const noexcept { return object_id_; }
  std::size_t dim() const noexcept { return mean_.size(); }
  std::size_t k() const noexcept { return basis_.size(); }
  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
  const std::vector<std::vector<double>>& basis() const noexcept { return basis_; }
  const EigenspaceConfig& config() const noexcept { return config_; }
  const std::vector<ManifoldPoint>& manifold() const noexcept { return manifold_; }

  /// coords[i] = <basis[i], v - mean>
  std::vector<double> project(std::span<const double> v) const;
  /// Also checks the vector's norm mode against the config.
  std::vector<double> project(const AppearanceVector& v) const;

  /// mean + sum_i coords[i] * basis[i]
  std::vector<double> reconstruct(std::span<const double> coords) const;

  /// Distance from v to the affine subspace mean + span(basis).
  double residual(std::span<const double> v) const;
  double residual(const AppearanceVector& v) const;

  friend bool operator==(const Eigenspace&, const Eigenspace&) = default;

 private:
  std::string object_id_;
  std::vector<double> mean_;
  std::vector<double> eigenvalues_;
  std::vector<std::vector<double>> basis_;
  EigenspaceConfig config_;
  std::vector<ManifoldPoint> manifold_;
};

/// Builds an object's eigenspace from all its appearances, occluded ones
/// included with no special weighting. k comes from config.k_override when
/// set, else from choose_k; either way it is clamped to the available rank.
/// When `spectrum` is non-null it receives every retained eigenvalue, before
/// truncation to k. Throws DegenerateSet, DimensionMismatch or NormModeMismatch.
Eigenspace build_eigenspace(std::string object_id, std::span<const AppearanceVector> appearances,
                            const EigenspaceConfig& config, std::vector<double>* spectrum = nullptr);

/// Versioned text model; reals use 17 significant digits so load(save(x)) == x.
std::string save_model(const Eigenspace& es);
/// Throws BadMagic, VersionMismatch or CorruptField.
Eigenspace load_model(std::string_view bytes);

}  // namespace eigengaze
