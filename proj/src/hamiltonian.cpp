#include "fwl/hamiltonian.hpp"

#include <numbers>
#include <stdexcept>
#include <vector>

namespace fwl {

void BasisSpec::validate() const {
  if (n_max < 0) throw std::invalid_argument("quantum.n_max must be >= 0");
  if (!(hbar > 0.0)) throw std::invalid_argument("quantum.hbar must be > 0");
}

std::pair<SparseMatrixd, SparseMatrixd> lowering_operators(int n_max) {
  const Eigen::Index n = static_cast<Eigen::Index>(n_max + 1) * (n_max + 2) / 2;
  std::vector<Eigen::Triplet<double>> ax, ay;
  ax.reserve(static_cast<std::size_t>(n));
  ay.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto [nx, ny] = basis_state(j);
    if (nx > 0) ax.emplace_back(basis_index(nx - 1, ny), j, std::sqrt(static_cast<double>(nx)));
    if (ny > 0) ay.emplace_back(basis_index(nx, ny - 1), j, std::sqrt(static_cast<double>(ny)));
  }
  SparseMatrixd a(n, n), b(n, n);
  a.setFromTriplets(ax.begin(), ax.end());
  b.setFromTriplets(ay.begin(), ay.end());
  return {std::move(a), std::move(b)};
}

namespace {

SparseMatrixd leading_block(const SparseMatrixd& m, Eigen::Index size) {
  SparseMatrixd out = m.topLeftCorner(size, size);
  out.prune([](Eigen::Index, Eigen::Index, const double& v) { return v != 0.0; });
  out.makeCompressed();
  return out;
}

}  // namespace

SparseMatrixc RotatedHamiltonian::combine(double theta) const {
  const cplx i(0.0, 1.0);
  SparseMatrixc h = std::exp(-2.0 * i * theta) * kinetic_.cast<cplx>() + std::exp(2.0 * i * theta) * harmonic_.cast<cplx>() +
                    std::exp(3.0 * i * theta) * cubic_.cast<cplx>() - (params_.omega * i) * angular_imag_.cast<cplx>();
  h.makeCompressed();
  return h;
}

RotatedHamiltonian RotatedHamiltonian::rotated(double theta) const {
  if (!(theta >= 0.0 && theta < std::numbers::pi / 4))
    throw std::invalid_argument("rotation angle must satisfy 0 <= theta < pi/4");
  RotatedHamiltonian h = *this;
  h.theta_ = theta;
  h.matrix_ = combine(theta);
  return h;
}

RotatedHamiltonian assemble(double theta, const BasisSpec& basis, const ModelParams& p) {
  basis.validate();
  p.validate();
  if (!(theta >= 0.0 && theta < std::numbers::pi / 4))
    throw std::invalid_argument("rotation angle must satisfy 0 <= theta < pi/4");

  // Cubic products reach two polyads above the target block; one more for margin.
  const auto [ax, ay] = lowering_operators(basis.n_max + 3);
  const double s = std::sqrt(basis.hbar / 2.0);
  const SparseMatrixd ax_dag = ax.transpose(), ay_dag = ay.transpose();
  const SparseMatrixd x = s * (ax + ax_dag);
  const SparseMatrixd y = s * (ay + ay_dag);
  // p = i * q with q real.
  const SparseMatrixd qx = s * (ax_dag - ax);
  const SparseMatrixd qy = s * (ay_dag - ay);

  const SparseMatrixd xx = x * x, yy = y * y;
  const Eigen::Index m = basis.size();

  RotatedHamiltonian h;
  h.basis_ = basis;
  h.params_ = p;
  h.theta_ = theta;
  h.kinetic_ = leading_block(SparseMatrixd(-0.5 * (qx * qx + qy * qy)), m);
  h.harmonic_ = leading_block(SparseMatrixd(0.5 * (xx + yy)), m);
  h.cubic_ = leading_block(SparseMatrixd(p.lambda * (SparseMatrixd(xx * y) - SparseMatrixd(yy * y) / 3.0)), m);
  h.angular_imag_ = leading_block(SparseMatrixd(x * qy - y * qx), m);
  h.matrix_ = h.combine(theta);
  return h;
}

}  // namespace fwl
