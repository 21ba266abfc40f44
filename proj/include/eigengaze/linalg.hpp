#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace eigengaze {

/// Dense symmetric matrix, row-major storage.
class SymMatrix {
 public:
  /// Zero matrix of order n.
  explicit SymMatrix(std::size_t n);
  /// Validates symmetry (|a_ij - a_ji| <= 1e-12 max(1, |a_ij|)) and finiteness.
  SymMatrix(std::size_t n, std::vector<double> entries);

  std::size_t order() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  /// Writes both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double value);
  std::span<const double> entries() const noexcept { return entries_; }

  double frobenius_norm() const;
  double trace() const;

 private:
  std::size_t n_;
  std::vector<double> entries_;
};

struct EigenDecomposition {
  std::vector<double> values;                // non-increasing
  std::vector<std::vector<double>> vectors;  // vectors[i] pairs with values[i]
  int sweeps = 0;
  double off_diagonal_norm = 0.0;
};

struct JacobiOptions {
  /// Convergence bound on the off-diagonal Frobenius norm; default 1e-12 * ||Q||_F.
  std::optional<double> off_diag_tol;
  int max_sweeps = 100;
};

/// Cyclic Jacobi eigensolver. Eigenpairs are sorted by descending value and
/// every vector is passed through canonicalize_sign(). Throws NoConvergence
/// when max_sweeps is exhausted.
EigenDecomposition sym_eigen(const SymMatrix& q, const JacobiOptions& options = {});

/// Flips v so its largest-magnitude component is positive. Components within
/// a relative 1e-9 of the maximum count as tied; the first of them decides.
void canonicalize_sign(std::span<double> v);

/// PCA basis of a set of column vectors.
struct PcaResult {
  std::vector<double> mean;                 // zero vector when uncentered
  std::vector<double> eigenvalues;          // descending, all > 0
  std::vector<std::vector<double>> basis;   // orthonormal, one per eigenvalue
};

/// Eigenvalues below this are treated as zero by gram_pca.
double retention_floor(double largest_eigenvalue);

/// PCA through the m x m Gram matrix of the (optionally centered) columns;
/// returns the nonzero eigenpairs of the d x d scatter matrix X X^T. An empty
/// basis means the input was degenerate; the caller decides what that means.
PcaResult gram_pca(std::span<const std::vector<double>> columns, bool centered);

/// Smallest k whose leading eigenvalues hold at least `energy_threshold` of
/// the total. Throws AllZero when no eigenvalue is positive.
std::size_t choose_k(std::span<const double> eigenvalues, double energy_threshold);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace eigengaze
