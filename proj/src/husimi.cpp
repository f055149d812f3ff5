#include "fwl/husimi.hpp"

#include "fwl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fwl {

Eigen::VectorXcd coherent_amplitudes(cplx alpha, int n_max) {
  Eigen::VectorXcd a(n_max + 1);
  a[0] = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n < n_max; ++n) a[n + 1] = alpha * a[n] / std::sqrt(static_cast<double>(n + 1));
  return a;
}

cplx coherent_overlap(int nx, int ny, const Eigen::Vector4d& omega, double hbar) {
  const auto ax = coherent_amplitudes(coherent_alpha(omega[0], omega[2], hbar), nx);
  const auto ay = coherent_amplitudes(coherent_alpha(omega[1], omega[3], hbar), ny);
  return ax[nx] * ay[ny];
}

Eigen::VectorXcd coherent_vector(const Eigen::Vector4d& omega, const BasisSpec& basis) {
  const auto ax = coherent_amplitudes(coherent_alpha(omega[0], omega[2], basis.hbar), basis.n_max);
  const auto ay = coherent_amplitudes(coherent_alpha(omega[1], omega[3], basis.hbar), basis.n_max);
  Eigen::VectorXcd c(basis.size());
  for (int N = 0; N <= basis.n_max; ++N)
    for (int ny = 0; ny <= N; ++ny) c[basis_index(N - ny, ny)] = ax[N - ny] * ay[ny];
  return c;
}

std::string to_string(HusimiKernel k) { return k == HusimiKernel::Resolvent ? "resolvent" : "literal"; }
std::string to_string(RotationApprox r) { return r == RotationApprox::Identity ? "identity" : "diagonal"; }

HusimiKernel kernel_from_string(const std::string& s) {
  if (s == "resolvent") return HusimiKernel::Resolvent;
  if (s == "literal") return HusimiKernel::Literal;
  throw std::invalid_argument("husimi.kernel must be 'resolvent' or 'literal'");
}

RotationApprox rotation_from_string(const std::string& s) {
  if (s == "identity") return RotationApprox::Identity;
  if (s == "diagonal") return RotationApprox::Diagonal;
  throw std::invalid_argument("husimi.rotation must be 'identity' or 'diagonal'");
}

void HusimiConfig::validate() const {
  if (!(E0 > 0.0)) throw std::invalid_argument("husimi.E0 must be > 0");
  if (n_each_side < 1) throw std::invalid_argument("husimi.n_each_side must be >= 1");
  if (!(gamma_cut >= 0.0)) throw std::invalid_argument("husimi.gamma_cut must be > 0 (or 0 for automatic)");
  if (grid < 2) throw std::invalid_argument("husimi.grid must be >= 2");
  if (!(theta >= 0.0 && theta < std::numbers::pi / 4)) throw std::invalid_argument("husimi.theta must lie in [0, pi/4)");
}

namespace {

std::vector<Resonance> nearest_each_side(const std::vector<Resonance>& pool, double E, int n, double cut) {
  std::vector<Resonance> below, above;
  for (const auto& r : pool) {
    if (!(r.width < cut)) continue;
    (r.energy < E ? below : above).push_back(r);
  }
  const auto closer = [E](const Resonance& a, const Resonance& b) {
    return std::abs(a.energy - E) < std::abs(b.energy - E);
  };
  std::sort(below.begin(), below.end(), closer);
  std::sort(above.begin(), above.end(), closer);
  below.resize(std::min<std::size_t>(below.size(), static_cast<std::size_t>(n)));
  above.resize(std::min<std::size_t>(above.size(), static_cast<std::size_t>(n)));
  std::vector<Resonance> out(below.rbegin(), below.rend());
  out.insert(out.end(), above.begin(), above.end());
  return out;
}

}  // namespace

std::vector<Resonance> select_states(const SpectrumCatalog& catalog, const HusimiConfig& cfg, double* gamma_cut_used) {
  cfg.validate();
  const double E = cfg.E0 * saddle_energy(catalog.params);
  double cut = cfg.gamma_cut;
  if (cut == 0.0) {
    auto first = nearest_each_side(catalog.resonances, E, cfg.n_each_side, std::numeric_limits<double>::infinity());
    if (first.empty()) throw std::runtime_error("husimi: catalog has no resonances");
    std::vector<double> w;
    for (const auto& r : first) w.push_back(r.width);
    std::nth_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(w.size() / 2), w.end());
    cut = 3.0 * w[w.size() / 2];
    // All widths zero (bound states): keep everything that was picked.
    if (!(cut > 0.0)) cut = std::numeric_limits<double>::min();
  }
  if (gamma_cut_used) *gamma_cut_used = cut;
  return nearest_each_side(catalog.resonances, E, cfg.n_each_side, cut);
}

HusimiStates prepare_states(const SpectrumCatalog& catalog, const HusimiConfig& cfg) {
  if (std::abs(cfg.theta - catalog.reference_theta) > 1e-12)
    throw std::invalid_argument("husimi.theta does not match the spectrum's reference angle");
  HusimiStates out;
  out.resonances = select_states(catalog, cfg, &out.gamma_cut);
  if (out.resonances.empty()) throw std::runtime_error("husimi: no resonance passes the width cutoff");
  const double E = cfg.E0 * saddle_energy(catalog.params);
  for (const auto& r : out.resonances) ++(r.energy < E ? out.below : out.above);

  const RotatedHamiltonian h = assemble(cfg.theta, catalog.basis, catalog.params);
  Eigen::VectorXcd values(static_cast<Eigen::Index>(out.resonances.size()));
  std::vector<int> sym;
  for (std::size_t i = 0; i < out.resonances.size(); ++i) {
    values[static_cast<Eigen::Index>(i)] = out.resonances[i].eigenvalue();
    sym.push_back(out.resonances[i].symmetry);
  }
  out.system = eigenvectors_for(h, values, sym);
  return out;
}

HusimiGrid averaged_husimi(const EigenSystem& states, const BasisSpec& basis, double E, const HusimiConfig& cfg,
                           const ModelParams& p) {
  cfg.validate();
  basis.validate();
  const Eigen::Index m = states.values.size();
  if (m == 0) throw std::invalid_argument("husimi: no states");
  if (states.right.rows() != basis.size() || states.left.rows() != basis.size() || states.right.cols() != m ||
      states.left.cols() != m)
    throw std::invalid_argument("husimi: eigenvector shape does not match the basis");

  HusimiGrid g;
  g.n = cfg.grid;
  g.frame = sos_frame(E, p);
  g.energy = E;
  g.config = cfg;
  g.states_used = static_cast<int>(m);
  const std::size_t cells = static_cast<std::size_t>(g.n) * g.n;
  g.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cells));
  g.masked.assign(cells, 0);

  // Normalize each pair to l^T r = 1; the literal kernel also carries r^T r.
  Eigen::MatrixXcd L = states.left;
  Eigen::VectorXcd weight(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const cplx lr = L.col(i).transpose() * states.right.col(i);
    if (std::abs(lr) < 1e-300) throw std::invalid_argument("husimi: left and right vectors are orthogonal");
    L.col(i) /= lr;
    const cplx rr = states.right.col(i).transpose() * states.right.col(i);
    weight[i] = (cfg.kernel == HusimiKernel::Literal ? rr : cplx(1.0)) / (states.values[i] - E) / std::numbers::pi;
  }
  const Eigen::MatrixXcd Lt = L.transpose();
  const Eigen::MatrixXcd Rt = cfg.kernel == HusimiKernel::Resolvent ? Eigen::MatrixXcd(states.right.transpose())
                                                                   : Eigen::MatrixXcd();

  Eigen::VectorXcd rot = Eigen::VectorXcd::Ones(basis.size());
  if (cfg.rotation == RotationApprox::Diagonal) {
    const double t2 = cfg.theta * cfg.theta;
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
      const auto [nx, ny] = basis_state(i);
      rot[i] = (1.0 + 0.25 * t2 * (nx * nx + nx + 1.0)) * (1.0 + 0.25 * t2 * (ny * ny + ny + 1.0));
    }
  }

  // One mesh row (fixed y) at a time: coherent vectors as columns, then two
  // matrix products give every state's amplitude at every point of the row.
  parallel_for(static_cast<std::size_t>(g.n), cfg.workers, [&](std::size_t row) {
    const int iy = static_cast<int>(row);
    std::vector<int> cols;
    Eigen::MatrixXcd C(basis.size(), g.n), Cbar(basis.size(), g.n);
    for (int ipy = 0; ipy < g.n; ++ipy) {
      const Eigen::Vector2d q = g.frame.from_unit((iy + 0.5) / g.n, (ipy + 0.5) / g.n);
      const auto s = sos_state(q[0], q[1], E, p);
      if (!s) {
        g.masked[g.index(iy, ipy)] = 1;
        continue;
      }
      const Eigen::VectorXcd c = coherent_vector(s->z, basis);
      const auto k = static_cast<Eigen::Index>(cols.size());
      C.col(k) = rot.cwiseProduct(c);
      Cbar.col(k) = rot.cwiseProduct(c.conjugate());
      cols.push_back(ipy);
    }
    if (cols.empty()) return;
    const auto nc = static_cast<Eigen::Index>(cols.size());
    const Eigen::MatrixXcd a = Lt * C.leftCols(nc);
    const Eigen::MatrixXcd b = (cfg.kernel == HusimiKernel::Resolvent ? Rt : Lt) * Cbar.leftCols(nc);
    for (Eigen::Index k = 0; k < nc; ++k) {
      const cplx sum = a.col(k).cwiseProduct(b.col(k)).cwiseProduct(weight).sum();
      g.values[static_cast<Eigen::Index>(g.index(iy, cols[static_cast<std::size_t>(k)]))] = sum.imag();
    }
  });
  return g;
}

std::vector<char> near_repeller(const HusimiGrid& grid, const Eigen::MatrixX2d& unit_points, double eps) {
  const int n = grid.n;
  std::vector<char> near(static_cast<std::size_t>(n) * n, 0);
  const int reach = static_cast<int>(std::ceil(eps * n)) + 1;
  for (Eigen::Index k = 0; k < unit_points.rows(); ++k) {
    const double u = unit_points(k, 0), v = unit_points(k, 1);
    const int cu = static_cast<int>(std::floor(u * n)), cv = static_cast<int>(std::floor(v * n));
    for (int i = std::max(0, cu - reach); i <= std::min(n - 1, cu + reach); ++i)
      for (int j = std::max(0, cv - reach); j <= std::min(n - 1, cv + reach); ++j) {
        const Eigen::Vector2d c = grid.unit_center(i, j);
        if ((c[0] - u) * (c[0] - u) + (c[1] - v) * (c[1] - v) <= eps * eps) near[grid.index(i, j)] = 1;
      }
  }
  return near;
}

namespace {

double default_eps(const HusimiGrid& g, double eps) { return eps > 0.0 ? eps : 2.0 / g.n; }

std::vector<char> near_cells(const HusimiGrid& grid, const RepellerSet& repeller, double eps) {
  SosFrame f = repeller.frame;
  const bool same = std::abs(f.y_lo - grid.frame.y_lo) < 1e-9 && std::abs(f.y_hi - grid.frame.y_hi) < 1e-9 &&
                    std::abs(f.py_hi - grid.frame.py_hi) < 1e-9 && std::abs(f.py_lo - grid.frame.py_lo) < 1e-9;
  if (!same) throw std::invalid_argument("repeller and Husimi grid use different section frames");
  return near_repeller(grid, repeller.unit_points(), default_eps(grid, eps));
}

}  // namespace

double repeller_overlap_score(const HusimiGrid& grid, const RepellerSet& repeller, double eps) {
  const auto near = near_cells(grid, repeller, eps);
  double total = 0.0, hit = 0.0;
  for (std::size_t i = 0; i < near.size(); ++i) {
    if (grid.masked[i]) continue;
    const double w = std::max(0.0, grid.values[static_cast<Eigen::Index>(i)]);
    total += w;
    if (near[i]) hit += w;
  }
  return total > 0.0 ? hit / total : 0.0;
}

double uniform_baseline_score(const HusimiGrid& grid, const RepellerSet& repeller, double eps) {
  const auto near = near_cells(grid, repeller, eps);
  std::size_t total = 0, hit = 0;
  for (std::size_t i = 0; i < near.size(); ++i) {
    if (grid.masked[i]) continue;
    ++total;
    if (near[i]) ++hit;
  }
  return total > 0 ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

}  // namespace fwl
