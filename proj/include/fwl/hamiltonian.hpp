// Complex-rotated Hamiltonian in the Cartesian two-dimensional oscillator
// basis |nx, ny>, truncated to polyads nx + ny <= n_max.
//
// Under q -> q e^{i theta}, p -> p e^{-i theta} the operator becomes
//
//   H(theta) = e^{-2 i theta} T + e^{2 i theta} V2 + e^{3 i theta} V3 - omega L
//
// with T, V2, V3 real symmetric and L = i * Lim Hermitian. All four pieces are
// assembled from ladder operators with x = sqrt(hbar/2) (a + a^+) and
// p = i sqrt(hbar/2) (a^+ - a).
#pragma once

#include "fwl/model.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <utility>

namespace fwl {

using cplx = std::complex<double>;
using SparseMatrixd = Eigen::SparseMatrix<double>;
using SparseMatrixc = Eigen::SparseMatrix<cplx>;

struct BasisSpec {
  int n_max = 80;
  double hbar = 1.0;

  Eigen::Index size() const { return static_cast<Eigen::Index>(n_max + 1) * (n_max + 2) / 2; }
  void validate() const;
};

/// Polyad-major ordering: polyad N occupies [N(N+1)/2, (N+1)(N+2)/2), and
/// within it the offset is ny. Truncating to a smaller n_max keeps a leading block.
inline Eigen::Index basis_index(int nx, int ny) {
  const Eigen::Index N = nx + ny;
  return N * (N + 1) / 2 + ny;
}

inline std::pair<int, int> basis_state(Eigen::Index i) {
  int N = static_cast<int>((std::sqrt(8.0 * static_cast<double>(i) + 1.0) - 1.0) / 2.0);
  while (static_cast<Eigen::Index>(N + 1) * (N + 2) / 2 <= i) ++N;
  while (static_cast<Eigen::Index>(N) * (N + 1) / 2 > i) --N;
  const int ny = static_cast<int>(i - static_cast<Eigen::Index>(N) * (N + 1) / 2);
  return {N - ny, ny};
}

/// Lowering operators (a_x, a_y) on the basis truncated at n_max.
std::pair<SparseMatrixd, SparseMatrixd> lowering_operators(int n_max);

class RotatedHamiltonian {
 public:
  RotatedHamiltonian() = default;

  double theta() const { return theta_; }
  const BasisSpec& basis() const { return basis_; }
  const ModelParams& params() const { return params_; }
  Eigen::Index size() const { return basis_.size(); }

  const SparseMatrixd& kinetic() const { return kinetic_; }
  const SparseMatrixd& harmonic() const { return harmonic_; }
  const SparseMatrixd& cubic() const { return cubic_; }
  /// Lim with L = i * Lim; real antisymmetric.
  const SparseMatrixd& angular_imag() const { return angular_imag_; }

  /// The rotated matrix at this object's theta.
  const SparseMatrixc& matrix() const { return matrix_; }

  /// Recombines the stored components at another angle.
  SparseMatrixc combine(double theta) const;

  /// Same components, different angle.
  RotatedHamiltonian rotated(double theta) const;

  friend RotatedHamiltonian assemble(double theta, const BasisSpec& basis, const ModelParams& p);

 private:
  double theta_ = 0.0;
  BasisSpec basis_;
  ModelParams params_;
  SparseMatrixd kinetic_, harmonic_, cubic_, angular_imag_;
  SparseMatrixc matrix_;
};

/// Requires 0 <= theta < pi/4.
RotatedHamiltonian assemble(double theta, const BasisSpec& basis, const ModelParams& p);

}  // namespace fwl
