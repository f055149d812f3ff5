#include "fwl/eigensolvers.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace fwl {

SymmetryBlocks c3_blocks(const RotatedHamiltonian& h) {
  const int n_max = h.basis().n_max;
  const double hbar = h.basis().hbar;
  const Eigen::Index n = h.size();
  std::array<std::vector<Eigen::Triplet<cplx>>, 3> trips;
  SymmetryBlocks out;
  std::array<Eigen::Index, 3> cols{0, 0, 0};

  for (int N = 0; N <= n_max; ++N) {
    const Eigen::Index off = static_cast<Eigen::Index>(N) * (N + 1) / 2;
    const Eigen::Index dim = N + 1;
    // L_z restricted to the polyad is i * Lim, Hermitian.
    const Eigen::MatrixXcd lz = cplx(0.0, 1.0) * Eigen::MatrixXd(h.angular_imag().block(off, off, dim, dim)).cast<cplx>();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(lz);
    for (Eigen::Index k = 0; k < dim; ++k) {
      const int ell = static_cast<int>(std::lround(es.eigenvalues()[k] / hbar));
      const int c = ((ell % 3) + 3) % 3;
      for (Eigen::Index r = 0; r < dim; ++r) {
        const cplx v = es.eigenvectors()(r, k);
        if (v != cplx(0.0)) trips[static_cast<std::size_t>(c)].emplace_back(off + r, cols[static_cast<std::size_t>(c)], v);
      }
      out.ell[static_cast<std::size_t>(c)].push_back(ell);
      ++cols[static_cast<std::size_t>(c)];
    }
  }
  for (std::size_t c = 0; c < 3; ++c) {
    out.transforms[c].resize(n, cols[c]);
    out.transforms[c].setFromTriplets(trips[c].begin(), trips[c].end());
  }
  return out;
}

double max_offblock(const SparseMatrixc& h, const SymmetryBlocks& blocks) {
  double worst = 0.0;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t d = 0; d < 3; ++d) {
      if (c == d || blocks.transforms[c].cols() == 0 || blocks.transforms[d].cols() == 0) continue;
      const SparseMatrixc cross = SparseMatrixc(blocks.transforms[c].adjoint()) * h * blocks.transforms[d];
      for (Eigen::Index k = 0; k < cross.outerSize(); ++k)
        for (SparseMatrixc::InnerIterator it(cross, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
    }
  return worst;
}

namespace {

void check_budget(Eigen::Index size, const DenseOptions& opts) {
  if (size > opts.max_dense) {
    std::ostringstream msg;
    msg << "dense block of size " << size << " exceeds the dense budget " << opts.max_dense;
    throw EigensolveError(msg.str());
  }
}

[[noreturn]] void report_failure(const Eigen::MatrixXcd& a) {
  std::ostringstream msg;
  msg << "dense eigensolve failed to converge (size " << a.rows() << ", Frobenius norm " << a.norm()
      << ", max |entry| " << a.cwiseAbs().maxCoeff() << ")";
  throw EigensolveError(msg.str());
}

// Eigenvalues only: zgeev skips the Schur vectors and the full triangular form.
Eigen::VectorXcd eigenvalues_only(const Eigen::MatrixXcd& a) {
  Eigen::MatrixXcd work = a;
  Eigen::VectorXcd w(a.rows());
  const auto n = static_cast<lapack_int>(a.rows());
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, reinterpret_cast<lapack_complex_double*>(work.data()), n,
                    reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1, nullptr, 1);
  if (info != 0) report_failure(a);
  return w;
}

EigenSystem solve_block(const Eigen::MatrixXcd& a, bool vectors) {
  if (!vectors) return {eigenvalues_only(a), {}, {}, {}};
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a, vectors);
  if (es.info() != Eigen::Success) report_failure(a);
  EigenSystem out;
  out.values = es.eigenvalues();
  {
    out.right = es.eigenvectors();
    for (Eigen::Index j = 0; j < out.right.cols(); ++j) out.right.col(j).normalize();
    // Rows of the inverse are the left eigenvectors, already bi-orthonormal.
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(out.right);
    out.left = lu.inverse().transpose();
  }
  return out;
}

}  // namespace

EigenSystem eigensolve_dense(const RotatedHamiltonian& h, const DenseOptions& opts) {
  const Eigen::Index n = h.size();
  if (!opts.use_symmetry) {
    check_budget(n, opts);
    return solve_block(Eigen::MatrixXcd(h.matrix()), opts.vectors);
  }

  const SymmetryBlocks blocks = c3_blocks(h);
  EigenSystem out;
  out.values.resize(n);
  out.symmetry.resize(static_cast<std::size_t>(n));
  if (opts.vectors) {
    out.right.setZero(n, n);
    out.left.setZero(n, n);
  }
  Eigen::Index filled = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    const SparseMatrixc& u = blocks.transforms[c];
    const Eigen::Index nc = u.cols();
    if (nc == 0) continue;
    check_budget(nc, opts);
    const Eigen::MatrixXcd block = Eigen::MatrixXcd(SparseMatrixc(SparseMatrixc(u.adjoint()) * h.matrix() * u));
    EigenSystem part = solve_block(block, opts.vectors);
    out.values.segment(filled, nc) = part.values;
    std::fill_n(out.symmetry.begin() + filled, nc, static_cast<int>(c));
    if (opts.vectors) {
      out.right.middleCols(filled, nc) = u * part.right;
      out.left.middleCols(filled, nc) = SparseMatrixc(u.conjugate()) * part.left;
    }
    filled += nc;
  }
  return out;
}

IterativeResult eigensolve_iterative(const RotatedHamiltonian& h, const IterativeOptions& opts) {
  return eigensolve_iterative(h.matrix(), opts);
}

IterativeResult eigensolve_iterative(const SparseMatrixc& h, const IterativeOptions& opts) {
  const Eigen::Index n = h.rows();
  if (opts.k < 1 || opts.k >= n) throw std::invalid_argument("iterative solver: need 1 <= k < matrix size");
  const Eigen::Index k = opts.k;
  const Eigen::Index m = std::min<Eigen::Index>(n, opts.krylov_dim > 0 ? opts.krylov_dim : std::max<Eigen::Index>(2 * k + 20, 60));
  if (m <= k) throw std::invalid_argument("iterative solver: Krylov dimension must exceed k");

  SparseMatrixc shifted = h;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= opts.center;
  shifted.makeCompressed();
  Eigen::SparseLU<SparseMatrixc> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) throw EigensolveError("iterative solver: factorization of H - center failed");

  Eigen::MatrixXcd basis(n, m + 1);
  Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(m + 1, m);
  {
    Eigen::VectorXcd v0(n);
    for (Eigen::Index i = 0; i < n; ++i)
      v0[i] = cplx(1.0 + 0.25 * std::sin(1.3 * static_cast<double>(i)), 0.2 * std::cos(0.7 * static_cast<double>(i)));
    basis.col(0) = v0.normalized();
  }

  IterativeResult res;
  Eigen::Index kept = 0;
  Eigen::VectorXcd mu;
  Eigen::MatrixXcd ritz;
  std::vector<Eigen::Index> order;
  for (res.restarts = 0; res.restarts <= opts.max_restarts; ++res.restarts) {
    for (Eigen::Index j = kept; j < m; ++j) {
      Eigen::VectorXcd w = lu.solve(basis.col(j));
      Eigen::VectorXcd coef = basis.leftCols(j + 1).adjoint() * w;
      w -= basis.leftCols(j + 1) * coef;
      const Eigen::VectorXcd again = basis.leftCols(j + 1).adjoint() * w;
      w -= basis.leftCols(j + 1) * again;
      coef += again;
      proj.col(j).head(j + 1) = coef;
      double beta = w.norm();
      if (beta < 1e-14 * coef.norm()) {
        // Invariant subspace: continue from a fresh direction.
        w = Eigen::VectorXcd::Random(n);
        for (int pass = 0; pass < 2; ++pass) w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
        proj(j + 1, j) = 0.0;
        basis.col(j + 1) = w.normalized();
        continue;
      }
      proj(j + 1, j) = beta;
      basis.col(j + 1) = w / beta;
    }

    const Eigen::MatrixXcd square = proj.topRows(m);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(square);
    if (es.info() != Eigen::Success) throw EigensolveError("iterative solver: projected eigenproblem failed");
    mu = es.eigenvalues();
    ritz = es.eigenvectors();
    order.resize(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return std::abs(mu[a]) > std::abs(mu[b]); });

    int n_conv = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const Eigen::Index idx = order[static_cast<std::size_t>(i)];
      const double r = std::abs(proj.row(m).dot(ritz.col(idx).conjugate()));
      if (r <= opts.tol * std::abs(mu[idx])) ++n_conv;
    }
    if (n_conv == k || res.restarts == opts.max_restarts) break;

    // Keep the wanted Ritz subspace plus a buffer, then extend again.
    kept = std::min<Eigen::Index>(m - 1, k + (m - k) / 2);
    Eigen::MatrixXcd wanted(m, kept);
    for (Eigen::Index i = 0; i < kept; ++i) wanted.col(i) = ritz.col(order[static_cast<std::size_t>(i)]);
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(wanted);
    const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(m, kept);
    const Eigen::MatrixXcd s = q.adjoint() * square * q;
    const Eigen::RowVectorXcd tail = proj.row(m) * q;
    const Eigen::VectorXcd next = basis.col(m);
    basis.leftCols(kept) = basis.leftCols(m) * q;
    basis.col(kept) = next;
    proj.setZero();
    proj.topLeftCorner(kept, kept) = s;
    proj.row(kept).head(kept) = tail;
  }

  res.values.resize(k);
  res.vectors.resize(n, k);
  res.residuals.resize(k);
  res.distances.resize(k);
  res.converged.assign(static_cast<std::size_t>(k), false);
  res.distant.assign(static_cast<std::size_t>(k), false);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index idx = order[static_cast<std::size_t>(i)];
    const double r = std::abs(proj.row(m).dot(ritz.col(idx).conjugate()));
    res.converged[static_cast<std::size_t>(i)] = r <= opts.tol * std::abs(mu[idx]);
    res.values[i] = opts.center + 1.0 / mu[idx];
    Eigen::VectorXcd x = basis.leftCols(m) * ritz.col(idx);
    x.normalize();
    res.vectors.col(i) = x;
    res.residuals[i] = (h * x - res.values[i] * x).norm();
    res.distances[i] = std::abs(res.values[i] - opts.center);
    res.distant[static_cast<std::size_t>(i)] = res.distances[i] > opts.max_distance;
  }
  res.all_converged = std::all_of(res.converged.begin(), res.converged.end(), [](bool b) { return b; });
  return res;
}

namespace {

// Inverse iteration for one eigenvalue; l is scaled so that l^T r = 1.
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> inverse_pair(const SparseMatrixc& h, cplx value) {
  const Eigen::Index n = h.rows();
  const cplx shift = value + cplx(1e-9, 1e-9) * std::max(1.0, std::abs(value));
  SparseMatrixc a = h;
  for (Eigen::Index i = 0; i < n; ++i) a.coeffRef(i, i) -= shift;
  a.makeCompressed();
  Eigen::SparseLU<SparseMatrixc> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw EigensolveError("inverse iteration: factorization failed");
  Eigen::VectorXcd r = Eigen::VectorXcd::Ones(n).normalized();
  Eigen::VectorXcd l = r;
  for (int it = 0; it < 4; ++it) {
    r = lu.solve(r).eval().normalized();
    l = lu.transpose().solve(l).eval().normalized();
  }
  const cplx overlap = l.transpose() * r;
  if (std::abs(overlap) < 1e-14) throw EigensolveError("inverse iteration: left and right vectors are orthogonal");
  return {r, l / overlap};
}

}  // namespace

EigenSystem eigenvectors_for(const SparseMatrixc& h, const Eigen::VectorXcd& values) {
  EigenSystem out;
  out.values = values;
  out.right.resize(h.rows(), values.size());
  out.left.resize(h.rows(), values.size());
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    auto [r, l] = inverse_pair(h, values[j]);
    out.right.col(j) = r;
    out.left.col(j) = l;
  }
  return out;
}

EigenSystem eigenvectors_for(const RotatedHamiltonian& h, const Eigen::VectorXcd& values,
                             const std::vector<int>& symmetry) {
  if (symmetry.size() != static_cast<std::size_t>(values.size()))
    throw std::invalid_argument("eigenvectors_for: one symmetry label per eigenvalue is required");
  const SymmetryBlocks blocks = c3_blocks(h);
  std::array<SparseMatrixc, 3> sub;
  for (std::size_t c = 0; c < 3; ++c)
    if (blocks.transforms[c].cols() > 0)
      sub[c] = SparseMatrixc(blocks.transforms[c].adjoint()) * h.matrix() * blocks.transforms[c];

  EigenSystem out;
  out.values = values;
  out.symmetry = symmetry;
  out.right.resize(h.size(), values.size());
  out.left.resize(h.size(), values.size());
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const int c = symmetry[static_cast<std::size_t>(j)];
    if (c < 0 || c > 2) {
      auto [r, l] = inverse_pair(h.matrix(), values[j]);
      out.right.col(j) = r;
      out.left.col(j) = l;
      continue;
    }
    const SparseMatrixc& u = blocks.transforms[static_cast<std::size_t>(c)];
    if (u.cols() == 0) throw std::invalid_argument("eigenvectors_for: empty symmetry class");
    auto [r, l] = inverse_pair(sub[static_cast<std::size_t>(c)], values[j]);
    out.right.col(j) = u * r;
    out.left.col(j) = SparseMatrixc(u.conjugate()) * l;
  }
  return out;
}

}  // namespace fwl
