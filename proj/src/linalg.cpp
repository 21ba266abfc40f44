#include "eigengaze/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "eigengaze/error.hpp"
#include "eigengaze/numfmt.hpp"

namespace eigengaze {

namespace {

double off_diagonal_norm(const std::vector<double>& a, std::size_t n) {
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) sq += a[i * n + j] * a[i * n + j];
    }
  }
  return std::sqrt(sq);
}

// Zeroes a(p,q) with one plane rotation, updating the accumulated vectors v.
void rotate(std::vector<double>& a, std::vector<double>& v, std::size_t n, std::size_t p, std::size_t q) {
  const double apq = a[p * n + q];
  if (apq == 0.0) return;
  const double app = a[p * n + p];
  const double aqq = a[q * n + q];
  const double theta = (aqq - app) / (2.0 * apq);
  double t;
  if (std::abs(theta) > 1e150) {
    t = 0.5 / theta;
  } else {
    t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  }
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  for (std::size_t k = 0; k < n; ++k) {
    if (k == p || k == q) continue;
    const double akp = a[k * n + p];
    const double akq = a[k * n + q];
    const double new_kp = c * akp - s * akq;
    const double new_kq = s * akp + c * akq;
    a[k * n + p] = a[p * n + k] = new_kp;
    a[k * n + q] = a[q * n + k] = new_kq;
  }
  a[p * n + p] = app - t * apq;
  a[q * n + q] = aqq + t * apq;
  a[p * n + q] = a[q * n + p] = 0.0;

  for (std::size_t k = 0; k < n; ++k) {
    const double vkp = v[k * n + p];
    const double vkq = v[k * n + q];
    v[k * n + p] = c * vkp - s * vkq;
    v[k * n + q] = s * vkp + c * vkq;
  }
}

}  // namespace

SymMatrix::SymMatrix(std::size_t n) : n_(n), entries_(n * n, 0.0) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "matrix order must be positive");
}

SymMatrix::SymMatrix(std::size_t n, std::vector<double> entries) : n_(n), entries_(std::move(entries)) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "matrix order must be positive");
  if (entries_.size() != n * n) throw Error(ErrorCode::DimensionMismatch, "entries must hold n*n values");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = entries_[i * n + j];
      if (!std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "matrix entry not finite");
      if (std::abs(a - entries_[j * n + i]) > 1e-12 * std::max(1.0, std::abs(a)))
        throw Error(ErrorCode::InvalidArgument, "matrix is not symmetric");
    }
  }
}

void SymMatrix::set(std::size_t i, std::size_t j, double value) {
  entries_[i * n_ + j] = value;
  entries_[j * n_ + i] = value;
}

double SymMatrix::frobenius_norm() const { return norm2(entries_); }

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += entries_[i * n_ + i];
  return t;
}

void canonicalize_sign(std::span<double> v) {
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  if (peak == 0.0) return;
  for (double x : v) {
    if (std::abs(x) >= peak * (1.0 - 1e-9)) {
      if (x < 0.0) {
        for (double& y : v) y = -y;
      }
      return;
    }
  }
}

EigenDecomposition sym_eigen(const SymMatrix& q, const JacobiOptions& options) {
  const std::size_t n = q.order();
  const double tol = options.off_diag_tol.value_or(1e-12 * q.frobenius_norm());
  if (options.off_diag_tol && !(*options.off_diag_tol > 0.0))
    throw Error(ErrorCode::InvalidArgument, "off-diagonal tolerance must be positive");
  if (options.max_sweeps < 1) throw Error(ErrorCode::InvalidArgument, "max_sweeps must be >= 1");

  std::vector<double> a(q.entries().begin(), q.entries().end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  int sweeps = 0;
  double off = off_diagonal_norm(a, n);
  while (off > tol) {
    if (sweeps == options.max_sweeps)
      throw Error(ErrorCode::NoConvergence, "off-diagonal norm " + numfmt::real(off) + " after " +
                                                std::to_string(sweeps) + " sweeps (tolerance " +
                                                numfmt::real(tol) + ")");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) rotate(a, v, n, p, r);
    }
    ++sweeps;
    off = off_diagonal_norm(a, n);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });

  EigenDecomposition out;
  out.sweeps = sweeps;
  out.off_diagonal_norm = off;
  for (std::size_t idx : order) {
    out.values.push_back(a[idx * n + idx]);
    std::vector<double> vec(n);
    for (std::size_t k = 0; k < n; ++k) vec[k] = v[k * n + idx];
    canonicalize_sign(vec);
    out.vectors.push_back(std::move(vec));
  }
  return out;
}

double retention_floor(double largest_eigenvalue) { return std::max(1e-10, 1e-12 * largest_eigenvalue); }

PcaResult gram_pca(std::span<const std::vector<double>> columns, bool centered) {
  if (columns.empty()) throw Error(ErrorCode::InvalidArgument, "PCA needs at least one column");
  const std::size_t d = columns.front().size();
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "PCA columns must be non-empty");
  for (const auto& col : columns) {
    if (col.size() != d) throw Error(ErrorCode::DimensionMismatch, "PCA columns differ in length");
  }
  const std::size_t m = columns.size();

  PcaResult out;
  out.mean.assign(d, 0.0);
  if (centered) {
    for (const auto& col : columns) {
      for (std::size_t i = 0; i < d; ++i) out.mean[i] += col[i];
    }
    for (double& x : out.mean) x /= static_cast<double>(m);
  }
  std::vector<std::vector<double>> shifted(columns.begin(), columns.end());
  for (auto& col : shifted) {
    for (std::size_t i = 0; i < d; ++i) col[i] -= out.mean[i];
  }

  SymMatrix gram(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) gram.set(i, j, dot(shifted[i], shifted[j]));
  }
  const auto eig = sym_eigen(gram);
  if (eig.values.empty() || eig.values.front() <= 0.0) return out;
  const double floor = retention_floor(eig.values.front());

  for (std::size_t r = 0; r < eig.values.size() && eig.values[r] > floor; ++r) {
    const double lambda = eig.values[r];
    std::vector<double> e(d, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const double w = eig.vectors[r][j];
      for (std::size_t i = 0; i < d; ++i) e[i] += shifted[j][i] * w;
    }
    for (double& x : e) x /= std::sqrt(lambda);
    // lifting amplifies round-off for small eigenvalues; restore orthonormality
    for (const auto& prev : out.basis) {
      const double proj = dot(prev, e);
      for (std::size_t i = 0; i < d; ++i) e[i] -= proj * prev[i];
    }
    const double len = norm2(e);
    if (!(len > 0.5)) break;
    for (double& x : e) x /= len;
    canonicalize_sign(e);
    out.eigenvalues.push_back(lambda);
    out.basis.push_back(std::move(e));
  }
  return out;
}

std::size_t choose_k(std::span<const double> eigenvalues, double energy_threshold) {
  if (!(energy_threshold > 0.0) || energy_threshold > 1.0)
    throw Error(ErrorCode::InvalidArgument, "energy threshold must be in (0, 1]");
  double total = 0.0;
  std::size_t positive = 0;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues[i] > 0.0) {
      total += eigenvalues[i];
      positive = i + 1;
    }
  }
  if (total <= 0.0) throw Error(ErrorCode::AllZero, "no positive eigenvalue");
  double cumulative = 0.0;
  for (std::size_t k = 1; k <= positive; ++k) {
    cumulative += std::max(0.0, eigenvalues[k - 1]);
    if (cumulative / total >= energy_threshold) return k;
  }
  // round-off kept the ratio a hair below a threshold of 1
  return positive;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace eigengaze
