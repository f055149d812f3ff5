#include "doctest.h"

#include "fwl/model.hpp"

#include <random>

using namespace fwl;

namespace {

// Direct transcription of the Hamiltonian, evaluated term by term.
double h_ref(double x, double y, double px, double py, double l, double w) {
  const double kinetic = 0.5 * px * px + 0.5 * py * py;
  const double harmonic = 0.5 * x * x + 0.5 * y * y;
  const double cubic = l * x * x * y - l * y * y * y / 3.0;
  const double coriolis = -w * x * py + w * y * px;
  return kinetic + harmonic + cubic + coriolis;
}

}  // namespace

TEST_CASE("energy at the origin vanishes") {
  CHECK(energy(Eigen::Vector4d::Zero(), ModelParams{}) == 0.0);
}

TEST_CASE("energy with omega = 0 at (0, 1, 0, 0)") {
  ModelParams p;
  p.omega = 0.0;
  CHECK(energy(Eigen::Vector4d(0, 1, 0, 0), p) == doctest::Approx(0.5 - 0.1 / 3.0).epsilon(1e-15));
}

TEST_CASE("energy matches an independent evaluation at random points") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  const ModelParams p;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector4d z(u(rng), u(rng), u(rng), u(rng));
    CHECK(energy(z, p) == doctest::Approx(h_ref(z[0], z[1], z[2], z[3], p.lambda, p.omega)).epsilon(1e-13));
  }
}

TEST_CASE("saddle energy") {
  ModelParams p;
  CHECK(saddle_energy(p) == doctest::Approx(16.17165).epsilon(1e-6));
  CHECK(std::abs(saddle_energy(p) - 16.17165) < 5e-6);
  p.omega = 0.0;
  CHECK(saddle_energy(p) == doctest::Approx(1.0 / 0.06).epsilon(1e-14));
}

TEST_CASE("the saddle is an equilibrium at the saddle energy") {
  const ModelParams p;
  // Rotating-frame equilibrium on the +y axis: y = (1 - w^2) / l, px = -w y.
  const double y = saddle_distance(p);
  const Eigen::Vector4d z(0.0, y, -p.omega * y, 0.0);
  CHECK(eom(z, p).norm() < 1e-12);
  CHECK(energy(z, p) == doctest::Approx(saddle_energy(p)).epsilon(1e-13));
}

TEST_CASE("eom: origin is a fixed point") { CHECK(eom(Eigen::Vector4d::Zero(), ModelParams{}).norm() == 0.0); }

TEST_CASE("eom is the symplectic gradient of the energy") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-4, 4);
  const ModelParams p;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Vector4d z(u(rng), u(rng), u(rng), u(rng));
    Eigen::Vector4d grad;
    for (int k = 0; k < 4; ++k) {
      const double h = 1e-5 * std::max(1.0, std::abs(z[k]));
      Eigen::Vector4d a = z, b = z;
      a[k] += h;
      b[k] -= h;
      grad[k] = (h_ref(a[0], a[1], a[2], a[3], p.lambda, p.omega) - h_ref(b[0], b[1], b[2], b[3], p.lambda, p.omega)) /
                (2 * h);
    }
    const Eigen::Vector4d v = eom(z, p);
    // (xdot, ydot) = dH/dp, (pxdot, pydot) = -dH/dq.
    const Eigen::Vector4d expect(grad[2], grad[3], -grad[0], -grad[1]);
    for (int k = 0; k < 4; ++k) CHECK(v[k] == doctest::Approx(expect[k]).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("eom works with other scalar types") {
  const Eigen::Vector4f z(0.1f, 0.2f, 0.3f, 0.4f);
  const auto v = eom(z, ModelParams{});
  const auto vd = eom(z.cast<double>(), ModelParams{});
  CHECK((v.cast<double>() - vd).norm() < 1e-6);
}

TEST_CASE("sos_momentum") {
  const ModelParams p;
  const double E = 1.8 * saddle_energy(p);

  SUBCASE("origin of the section") {
    const auto px = sos_momentum(0.0, 0.0, E, p);
    REQUIRE(px);
    CHECK(*px == doctest::Approx(-std::sqrt(2 * E)).epsilon(1e-15));
  }
  SUBCASE("returned px restores the energy and the orientation") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uy(-7, 10), upy(-8, 8);
    int inside = 0;
    for (int i = 0; i < 2000; ++i) {
      const double y = uy(rng), py = upy(rng);
      const auto px = sos_momentum(y, py, E, p);
      if (!px) {
        CHECK(sos_discriminant(y, py, E, p) < 0.0);
        continue;
      }
      ++inside;
      CHECK(std::abs(energy(Eigen::Vector4d(0, y, *px, py), p) - E) < 1e-12 * E);
      CHECK(*px + p.omega * y < 0.0);
    }
    CHECK(inside > 500);
  }
  SUBCASE("on the bounding curve the root is double") {
    const double y = 2.0;
    const double py = sos_py_max(y, E, p);
    // Shave the rounding so the discriminant is not negative by an ulp.
    const double d = sos_discriminant(y, py, E, p);
    CHECK(std::abs(d) < 1e-12);
    const auto px = sos_momentum(y, py * (1 - 1e-15), E, p);
    REQUIRE(px);
    CHECK(*px == doctest::Approx(-p.omega * y).epsilon(1e-6));
  }
  SUBCASE("outside the curve") { CHECK_FALSE(sos_momentum(0.0, 100.0, E, p)); }
}

TEST_CASE("section turning points and frame") {
  const ModelParams p;
  const double E = 1.8 * saddle_energy(p);
  const double ymin = sos_y_min(E, p);
  CHECK(std::abs(sos_discriminant(ymin, 0, E, p)) < 1e-9);
  CHECK(ymin == doctest::Approx(-6.409).epsilon(1e-3));
  CHECK(std::isinf(sos_y_max(E, p)));  // open towards the saddle above E_s

  const SosFrame f = sos_frame(E, p);
  CHECK(f.y_lo == ymin);
  CHECK(f.y_hi == doctest::Approx(saddle_distance(p)));
  CHECK(f.py_hi == doctest::Approx(std::sqrt(2 * E)));
  const Eigen::Vector2d u = f.to_unit(1.0, -2.0);
  const Eigen::Vector2d q = f.from_unit(u[0], u[1]);
  CHECK(q[0] == doctest::Approx(1.0));
  CHECK(q[1] == doctest::Approx(-2.0));

  // Below the saddle the section is closed on both sides.
  const double Elow = 0.5 * saddle_energy(p);
  const double ymax = sos_y_max(Elow, p);
  CHECK(ymax < saddle_distance(p));
  CHECK(std::abs(sos_discriminant(ymax, 0, Elow, p)) < 1e-9);
  CHECK(sos_frame(Elow, p).y_hi == ymax);
}

TEST_CASE("harmonic limit") {
  ModelParams p;
  p.lambda = 0.0;
  CHECK_NOTHROW(p.validate());
  CHECK(std::isinf(saddle_energy(p)));
  const double E = 3.0;
  const double r = std::sqrt(2 * E / (1 - p.omega * p.omega));
  CHECK(sos_y_max(E, p) == doctest::Approx(r));
  CHECK(sos_y_min(E, p) == doctest::Approx(-r));
}

TEST_CASE("parameter validation names the field") {
  ModelParams p;
  p.lambda = -1;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("lambda"), std::invalid_argument);
  p = {};
  p.omega = 1.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("omega"), std::invalid_argument);
  p = {};
  p.hbar = 0.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("hbar"), std::invalid_argument);
}

TEST_CASE("branch names round-trip") {
  CHECK(branch_from_string(to_string(Branch::Forward)) == Branch::Forward);
  CHECK(branch_from_string(to_string(Branch::Backward)) == Branch::Backward);
  CHECK_THROWS_AS(branch_from_string("sideways"), std::invalid_argument);
}
