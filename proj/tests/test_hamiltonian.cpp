#include "doctest.h"

#include "fwl/hamiltonian.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

using namespace fwl;

namespace {

Eigen::MatrixXcd dense(const SparseMatrixc& m) { return Eigen::MatrixXcd(m); }

// Exact lambda = 0 levels hbar (N + 1) - omega hbar l, l = -N, -N + 2, ..., N.
std::vector<double> oscillator_levels(int n_max, double hbar, double omega) {
  std::vector<double> out;
  for (int N = 0; N <= n_max; ++N)
    for (int l = -N; l <= N; l += 2) out.push_back(hbar * (N + 1) - omega * hbar * l);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("basis index and state are inverse bijections") {
  const BasisSpec b{50, 1.0};
  std::vector<char> seen(static_cast<std::size_t>(b.size()), 0);
  for (int N = 0; N <= b.n_max; ++N)
    for (int ny = 0; ny <= N; ++ny) {
      const Eigen::Index i = basis_index(N - ny, ny);
      REQUIRE(i < b.size());
      CHECK_FALSE(seen[static_cast<std::size_t>(i)]);
      seen[static_cast<std::size_t>(i)] = 1;
      const auto [nx2, ny2] = basis_state(i);
      CHECK(nx2 == N - ny);
      CHECK(ny2 == ny);
    }
  CHECK(b.size() == 51 * 52 / 2);
}

TEST_CASE("lambda = 0, theta = 0: exact oscillator spectrum") {
  ModelParams p;
  p.lambda = 0.0;
  const BasisSpec b{20, 1.0};
  const auto h = assemble(0.0, b, p);
  const Eigen::MatrixXcd H = dense(h.matrix());
  CHECK((H - H.adjoint()).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  const auto ref = oscillator_levels(b.n_max, b.hbar, p.omega);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    CHECK(std::abs(es.eigenvalues()[i] - ref[static_cast<std::size_t>(i)]) < 1e-10);
}

TEST_CASE("lambda = 0, theta = 0.2: low states are rotation invariant") {
  ModelParams p;
  p.lambda = 0.0;
  const auto h = assemble(0.2, BasisSpec{30, 1.0}, p);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dense(h.matrix()), false);
  std::vector<cplx> v(es.eigenvalues().begin(), es.eigenvalues().end());
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  // The ground state only feels the truncation through far-off couplings.
  CHECK(std::abs(v[0] - cplx(1.0, 0.0)) < 1e-6);
}

TEST_CASE("component symmetries") {
  const auto h = assemble(0.17, BasisSpec{15, 0.9}, ModelParams{});
  const auto sym = [](const SparseMatrixd& m) { return (Eigen::MatrixXd(m) - Eigen::MatrixXd(m).transpose()).norm(); };
  const auto anti = [](const SparseMatrixd& m) { return (Eigen::MatrixXd(m) + Eigen::MatrixXd(m).transpose()).norm(); };
  CHECK(sym(h.kinetic()) < 1e-13);
  CHECK(sym(h.harmonic()) < 1e-13);
  CHECK(sym(h.cubic()) < 1e-13);
  CHECK(anti(h.angular_imag()) < 1e-13);
  // theta = 0 gives a Hermitian matrix; omega = 0 a complex symmetric one.
  const Eigen::MatrixXcd h0 = dense(h.rotated(0.0).matrix());
  CHECK((h0 - h0.adjoint()).norm() < 1e-12);
  ModelParams p;
  p.omega = 0.0;
  const Eigen::MatrixXcd hs = dense(assemble(0.3, BasisSpec{15, 1.0}, p).matrix());
  CHECK((hs - hs.transpose()).norm() < 1e-12);
}

TEST_CASE("the matrix is the stated combination of the components") {
  const ModelParams p;
  const auto h = assemble(0.25, BasisSpec{12, 1.0}, p);
  const cplx i(0, 1);
  const double t = 0.25;
  const Eigen::MatrixXcd expect =
      std::exp(-2.0 * i * t) * Eigen::MatrixXd(h.kinetic()).cast<cplx>() +
      std::exp(2.0 * i * t) * Eigen::MatrixXd(h.harmonic()).cast<cplx>() +
      std::exp(3.0 * i * t) * Eigen::MatrixXd(h.cubic()).cast<cplx>() -
      p.omega * i * Eigen::MatrixXd(h.angular_imag()).cast<cplx>();
  CHECK((dense(h.matrix()) - expect).norm() < 1e-13);
  CHECK((dense(h.rotated(0.1).matrix()) - dense(assemble(0.1, BasisSpec{12, 1.0}, p).matrix())).norm() < 1e-13);
}

TEST_CASE("known matrix elements") {
  const double hbar = 0.8;
  const ModelParams p;
  const auto h = assemble(0.0, BasisSpec{10, hbar}, p);
  const double s = std::sqrt(hbar / 2);
  // <0, 3| -lambda y^3 / 3 |0, 0> = -lambda s^3 sqrt(6) / 3
  CHECK(h.cubic().coeff(basis_index(0, 3), basis_index(0, 0)) ==
        doctest::Approx(-p.lambda * s * s * s * std::sqrt(6.0) / 3.0).epsilon(1e-14));
  // <2, 1| lambda x^2 y |0, 0> = lambda s^3 sqrt(2)
  CHECK(h.cubic().coeff(basis_index(2, 1), basis_index(0, 0)) ==
        doctest::Approx(p.lambda * s * s * s * std::sqrt(2.0)).epsilon(1e-14));
  // Diagonal of T + V2 is hbar (N + 1).
  const SparseMatrixd tv = h.kinetic() + h.harmonic();
  CHECK(tv.coeff(basis_index(3, 4), basis_index(3, 4)) == doctest::Approx(8.0 * hbar));
  CHECK(tv.coeff(basis_index(5, 0), basis_index(3, 0)) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("hbar scaling of the components") {
  const ModelParams p;
  const auto a = assemble(0.0, BasisSpec{10, 1.0}, p);
  const auto b = assemble(0.0, BasisSpec{10, 0.64}, p);
  CHECK((Eigen::MatrixXd(b.kinetic()) - 0.64 * Eigen::MatrixXd(a.kinetic())).norm() < 1e-13);
  CHECK((Eigen::MatrixXd(b.harmonic()) - 0.64 * Eigen::MatrixXd(a.harmonic())).norm() < 1e-13);
  CHECK((Eigen::MatrixXd(b.angular_imag()) - 0.64 * Eigen::MatrixXd(a.angular_imag())).norm() < 1e-13);
  CHECK((Eigen::MatrixXd(b.cubic()) - 0.512 * Eigen::MatrixXd(a.cubic())).norm() < 1e-13);
}

TEST_CASE("a smaller cutoff is the leading block") {
  const ModelParams p;
  const auto big = assemble(0.2, BasisSpec{25, 1.0}, p);
  const auto small = assemble(0.2, BasisSpec{18, 1.0}, p);
  const Eigen::Index m = small.size();
  CHECK((dense(big.matrix()).topLeftCorner(m, m) - dense(small.matrix())).norm() < 1e-13);
}

TEST_CASE("sparsity: at most 15 non-zeros per row") {
  const auto h = assemble(0.2, BasisSpec{40, 1.0}, ModelParams{});
  const SparseMatrixc rows = h.matrix().transpose();  // column-major: columns of the transpose are rows
  Eigen::Index worst = 0;
  for (Eigen::Index r = 0; r < rows.outerSize(); ++r) {
    Eigen::Index n = 0;
    for (SparseMatrixc::InnerIterator it(rows, r); it; ++it) ++n;
    worst = std::max(worst, n);
  }
  CHECK(worst <= 15);
  CHECK(worst >= 10);
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(assemble(-0.1, BasisSpec{5, 1.0}, ModelParams{}), std::invalid_argument);
  CHECK_THROWS_AS(assemble(0.8, BasisSpec{5, 1.0}, ModelParams{}), std::invalid_argument);
  CHECK_THROWS_WITH_AS(assemble(0.1, BasisSpec{5, 0.0}, ModelParams{}), doctest::Contains("hbar"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(assemble(0.1, BasisSpec{-1, 1.0}, ModelParams{}), doctest::Contains("n_max"),
                       std::invalid_argument);
}
