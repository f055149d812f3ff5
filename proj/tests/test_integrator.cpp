#include "doctest.h"

#include "fwl/integrator.hpp"
#include "support.hpp"

#include <unsupported/Eigen/MatrixFunctions>

using namespace fwl;

namespace {

// With lambda = 0 the flow is linear, zdot = A z.
Eigen::Matrix4d linear_generator(double w) {
  Eigen::Matrix4d A;
  A << 0, w, 1, 0,
      -w, 0, 0, 1,
      -1, 0, 0, w,
      0, -1, -w, 0;
  return A;
}

}  // namespace

TEST_CASE("lambda = 0 matches the matrix exponential over T = 100") {
  ModelParams p;
  p.lambda = 0.0;
  const Eigen::Vector4d z0(0.3, -1.2, 0.7, 2.0);
  const auto traj = integrate({z0, 0.0}, p, IntegratorConfig{}, 100.0, Direction::Forward);
  REQUIRE(traj.size() == 5001);
  const Eigen::Matrix4d A = linear_generator(p.omega);
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); k += 250) {
    const Eigen::Matrix4d M = (A * traj[k].t).exp();
    worst = std::max(worst, (traj[k].z - M * z0).norm());
  }
  CHECK(worst < 1e-8);
  CHECK(traj.back().t == doctest::Approx(100.0));
}

TEST_CASE("backward integration of the linear flow") {
  ModelParams p;
  p.lambda = 0.0;
  const Eigen::Vector4d z0(1.0, 0.5, -0.2, 0.1);
  const auto res = propagate({z0, 0.0}, p, IntegratorConfig{}, 7.3, Direction::Backward);
  const Eigen::Matrix4d M = (linear_generator(p.omega) * -7.3).exp();
  CHECK((res.final_state.z - M * z0).norm() < 1e-10);
  CHECK(res.final_state.t == doctest::Approx(-7.3));
}

TEST_CASE("energy drift at 1.8 E_s over T = 100 on a periodic orbit") {
  // Orbits at this energy escape within a few dozen time units; an unstable
  // periodic orbit stays bounded long enough, until round-off pushes it off.
  const ModelParams p;
  const double E = 1.8 * saddle_energy(p);
  const auto q = testing::periodic_orbit({4.0, 0.0}, E, p);
  REQUIRE(q);
  const PhaseState s = *sos_state((*q)[0], (*q)[1], E, p);
  const auto traj = integrate(s, p, IntegratorConfig{}, 100.0, Direction::Forward, 20.0);
  REQUIRE(traj.back().t == doctest::Approx(100.0));
  double drift = 0.0;
  for (const auto& q : traj) drift = std::max(drift, std::abs(energy(q, p) - E));
  CHECK(drift < 1e-8);
}

TEST_CASE("forward then backward returns to the start") {
  const ModelParams p;
  SUBCASE("bounded orbit below the saddle, T = 100") {
    const double E = 0.5 * saddle_energy(p);
    const PhaseState s0 = *sos_state(1.0, 0.5, E, p);
    const auto fwd = propagate(s0, p, IntegratorConfig{}, 100.0, Direction::Forward);
    const auto back = propagate(fwd.final_state, p, IntegratorConfig{}, 100.0, Direction::Backward);
    CHECK((back.final_state.z - s0.z).norm() < 1e-6);
    CHECK(std::abs(back.final_state.t) < 1e-9);
  }
  SUBCASE("chaotic orbit at 1.8 E_s, T = 20") {
    const double E = 1.8 * saddle_energy(p);
    const auto s0 = testing::trapped_orbit(E, p, 40.0);
    REQUIRE(s0);
    const auto fwd = propagate(*s0, p, IntegratorConfig{}, 20.0, Direction::Forward);
    const auto back = propagate(fwd.final_state, p, IntegratorConfig{}, 20.0, Direction::Backward);
    CHECK((back.final_state.z - s0->z).norm() < 1e-6);
  }
}

TEST_CASE("partial last step lands on the requested time") {
  ModelParams p;
  p.lambda = 0.0;
  const auto res = propagate({Eigen::Vector4d(1, 0, 0, 0), 0.0}, p, IntegratorConfig{}, 0.013, Direction::Forward);
  CHECK(res.final_state.t == doctest::Approx(0.013).epsilon(1e-15));
  const Eigen::Matrix4d M = (linear_generator(p.omega) * 0.013).exp();
  CHECK((res.final_state.z - M * Eigen::Vector4d(1, 0, 0, 0)).norm() < 1e-13);
}

TEST_CASE("escape stops the run") {
  const ModelParams p;
  PhaseState s;
  s.z << 0.0, 25.0, 0.0, 5.0;
  const auto res = propagate(s, p, IntegratorConfig{}, 50.0, Direction::Forward, 20.0);
  CHECK(res.escaped);
  CHECK(res.final_state.t < 1.0);
}

TEST_CASE("observer can stop the run") {
  const ModelParams p;
  int calls = 0;
  const auto res = propagate({Eigen::Vector4d(0.1, 0, 0, 0.1), 0.0}, p, IntegratorConfig{}, 10.0, Direction::Forward,
                             0.0, [&](const PhaseState&, const PhaseState&) {
                               return ++calls == 10 ? Control::Stop : Control::Continue;
                             });
  CHECK(res.stopped);
  CHECK(calls == 10);
  CHECK(res.final_state.t == doctest::Approx(0.2));
}

TEST_CASE("a step too coarse for the tolerance is rejected") {
  const ModelParams p;
  IntegratorConfig cfg;
  cfg.step = 1.5;
  cfg.order = 4;
  const PhaseState s0 = *sos_state(0.0, 1.0, 1.8 * saddle_energy(p), p);
  CHECK_THROWS_AS(propagate(s0, p, cfg, 30.0, Direction::Forward, 20.0), IntegrationError);
}

TEST_CASE("integrator config validation") {
  IntegratorConfig c;
  c.order = 7;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("order"), std::invalid_argument);
  c = {};
  c.step = 0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("step"), std::invalid_argument);
  c = {};
  c.tolerance = -1;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("tolerance"), std::invalid_argument);
}

TEST_CASE("gbs_step order: halving the step cuts the error by about 2^order") {
  ModelParams p;
  p.lambda = 0.0;
  const Eigen::Vector4d z0(1, 0, 0, 0.5);
  const Eigen::Matrix4d A = linear_generator(p.omega);
  const double h = 0.4;
  const double e1 = (gbs_step(z0, h, p, 6) - (A * h).exp() * z0).norm();
  const double e2 = (gbs_step(gbs_step(z0, h / 2, p, 6), h / 2, p, 6) - (A * h).exp() * z0).norm();
  // Global order 6: the ratio is near 2^6 = 64.
  CHECK(e1 / e2 > 30.0);
}
