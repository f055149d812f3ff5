// Eigensolvers for the complex-rotated Hamiltonian.
//
// The dense path splits the matrix by the threefold rotational symmetry of the
// model: inside each polyad, L_z is diagonalized and its eigenstates are
// grouped by l mod 3. H(theta) has no couplings between the three groups, so
// each is solved on its own. The iterative path is a restarted shift-invert
// Krylov method around a complex target.
#pragma once

#include "fwl/hamiltonian.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace fwl {

class EigensolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unitary change of basis to l-mod-3 symmetry classes.
struct SymmetryBlocks {
  /// transforms[c] is n x n_c with orthonormal columns (angular-momentum eigenstates).
  std::array<SparseMatrixc, 3> transforms;
  /// Integer angular momentum of every symmetry-adapted column, per class.
  std::array<std::vector<int>, 3> ell;
};

SymmetryBlocks c3_blocks(const RotatedHamiltonian& h);

/// Largest |element| coupling two different symmetry classes.
double max_offblock(const SparseMatrixc& h, const SymmetryBlocks& blocks);

struct DenseOptions {
  /// Largest dense matrix (or symmetry block) the solver will factor.
  Eigen::Index max_dense = 6000;
  bool use_symmetry = true;
  bool vectors = false;
};

struct EigenSystem {
  Eigen::VectorXcd values;
  /// Columns are right eigenvectors, filled when vectors were requested.
  Eigen::MatrixXcd right;
  /// Columns are left eigenvectors (H^T l = E l) with l^T r = 1.
  Eigen::MatrixXcd left;
  /// l mod 3 class of every eigenvalue; empty when no symmetry split was used.
  std::vector<int> symmetry;
};

/// All eigenvalues of the rotated matrix.
EigenSystem eigensolve_dense(const RotatedHamiltonian& h, const DenseOptions& opts = {});

struct IterativeOptions {
  int k = 20;
  cplx center{0.0, 0.0};
  /// Krylov subspace size; 0 picks max(2k + 20, 60) capped by the matrix size.
  int krylov_dim = 0;
  int max_restarts = 200;
  /// Relative residual of the shift-inverted problem.
  double tol = 1e-13;
  /// Eigenvalues farther than this from the center are flagged `distant`.
  double max_distance = std::numeric_limits<double>::infinity();
};

struct IterativeResult {
  /// Ordered by distance to the center.
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;
  std::vector<bool> converged;
  std::vector<bool> distant;
  /// ||H v - E v|| / ||v|| for each returned pair.
  Eigen::VectorXd residuals;
  Eigen::VectorXd distances;
  int restarts = 0;
  bool all_converged = false;
};

/// k eigenvalues of H nearest `center`, by Krylov iteration on (H - center)^-1.
IterativeResult eigensolve_iterative(const RotatedHamiltonian& h, const IterativeOptions& opts);
IterativeResult eigensolve_iterative(const SparseMatrixc& h, const IterativeOptions& opts);

/// Right and left eigenvectors for the given (already accurate) eigenvalues by
/// inverse iteration on the sparse matrix; pairs are bi-orthonormalized.
EigenSystem eigenvectors_for(const SparseMatrixc& h, const Eigen::VectorXcd& values);

/// Same, but each iteration runs inside the eigenvalue's symmetry class
/// (symmetry[j] in {0, 1, 2}; -1 falls back to the full matrix). Keeps nearly
/// degenerate states of different classes from mixing.
EigenSystem eigenvectors_for(const RotatedHamiltonian& h, const Eigen::VectorXcd& values,
                             const std::vector<int>& symmetry);

}  // namespace fwl
