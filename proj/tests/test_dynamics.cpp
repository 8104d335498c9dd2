#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lla/dynamics.hpp"
#include "oracles.hpp"

using namespace lla;

namespace {

VehicleFixedParams test_fixed() { return VehicleFixedParams{}; }

TireSurfaceParams test_theta() {
    return {2.579, 3.3852, 1.2, 1.2663, 0.192, 0.1737, 0.0518, 0.00035};
}

oracles::Params oracle_params(const VehicleFixedParams& f, const TireSurfaceParams& t) {
    return {f.m,   f.i_z, f.l_f, f.l_r, f.c_m1, f.c_m2, t.b_f,      t.b_r,
            t.c_f, t.c_r, t.d_f, t.d_r, t.c_ro, t.c_d,  f.vx_floor};
}

}  // namespace

TEST_CASE("slip angles") {
    SUBCASE("straight rolling has zero slip") {
        VehicleState s;
        s.vx = 1.0;
        auto a = slip_angles(s, 0.05, 0.05, 0.05);
        CHECK(a.front == 0.0);
        CHECK(a.rear == 0.0);
    }
    SUBCASE("steering angle shifts the front slip directly") {
        VehicleState s;
        s.vx = 1.0;
        s.delta = 0.1;
        auto a = slip_angles(s, 0.05, 0.05, 0.05);
        CHECK(a.front == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(a.rear == 0.0);
    }
    SUBCASE("kinematic terms enter as documented") {
        VehicleState s;
        s.vx = 1.0;
        s.vy = 0.05;
        s.omega = 0.5;
        auto a = slip_angles(s, 0.05, 0.05, 0.05);
        CHECK(a.front == doctest::Approx(-std::atan(0.075)).epsilon(1e-14));
        CHECK(a.rear == doctest::Approx(std::atan(-0.025)).epsilon(1e-14));
    }
    SUBCASE("vx floor removes the standstill singularity") {
        VehicleState s;
        s.vx = 0.0;
        s.vy = 0.01;
        auto a = slip_angles(s, 0.05, 0.05, 0.05);
        CHECK(std::isfinite(a.front));
        CHECK(a.front == doctest::Approx(-std::atan(0.01 / 0.05)));
    }
}

TEST_CASE("pacejka lateral force") {
    SUBCASE("zero at zero slip") { CHECK(pacejka_lateral(0.0, 2.5, 1.2, 0.2) == 0.0); }
    SUBCASE("small-angle linearization") {
        double b = 2.5, c = 1.2, d = 0.2;
        for (double alpha = -0.02; alpha <= 0.02; alpha += 0.004) {
            if (std::abs(b * alpha) > 0.05 || alpha == 0.0) continue;
            double f = pacejka_lateral(alpha, b, c, d);
            CHECK(f == doctest::Approx(b * c * d * alpha).epsilon(0.01));
        }
    }
    SUBCASE("peak bound for c <= 2") {
        for (double alpha = -50.0; alpha <= 50.0; alpha += 0.37) {
            CHECK(std::abs(pacejka_lateral(alpha, 4.0, 1.9, 0.3)) <= 0.3);
        }
    }
    SUBCASE("odd symmetry is exact") {
        for (double alpha = 0.01; alpha < 2.0; alpha += 0.173) {
            CHECK(pacejka_lateral(-alpha, 2.579, 1.2, 0.192) ==
                  -pacejka_lateral(alpha, 2.579, 1.2, 0.192));
        }
    }
}

TEST_CASE("longitudinal force") {
    CHECK(longitudinal_force(0.0, 0.0, 8.0, 0.5, 0.0, 0.02) == 0.0);
    CHECK(longitudinal_force(0.0, 1.0, 8.0, 0.5, 0.1, 0.02) == doctest::Approx(7.9));
    CHECK(longitudinal_force(2.0, 0.5, 8.0, 0.5, 0.1, 0.02) == doctest::Approx(3.32).epsilon(1e-12));
}

TEST_CASE("bicycle model derivative") {
    VehicleFixedParams fixed = test_fixed();
    TireSurfaceParams theta = test_theta();

    SUBCASE("coasting equilibrium") {
        // duty chosen so the longitudinal force vanishes
        VehicleState s;
        s.vx = 1.5;
        double d = (theta.c_ro + theta.c_d * s.vx * s.vx) / (fixed.c_m1 - fixed.c_m2 * s.vx);
        auto der = dbm_derivative(s, {d, 0.0}, fixed, theta, 0.02);
        CHECK(der.x == doctest::Approx(1.5));
        CHECK(der.vx == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(der.vy == 0.0);
        CHECK(der.omega == 0.0);
    }
    SUBCASE("frame rotation") {
        VehicleState s;
        s.vx = 1.0;
        s.phi = M_PI / 2;
        double d = (theta.c_ro + theta.c_d) / (fixed.c_m1 - fixed.c_m2);
        auto der = dbm_derivative(s, {d, 0.0}, fixed, theta, 0.02);
        CHECK(std::abs(der.x) < 1e-12);
        CHECK(der.y == doctest::Approx(1.0));
    }
    SUBCASE("matches an independently coded evaluation") {
        oracles::Params p = oracle_params(fixed, theta);
        VehicleState s{0.3, -0.2, 0.7, 1.8, 0.12, 2.4, 0.08};
        ControlInput u{0.35, 0.01};
        auto der = dbm_derivative(s, u, fixed, theta, 0.02);
        auto ref = oracles::bicycle_deriv({s.x, s.y, s.phi, s.vx, s.vy, s.omega, s.delta}, u.d,
                                          u.ddelta, 0.02, p);
        CHECK(der.x == doctest::Approx(ref[0]).epsilon(1e-12));
        CHECK(der.y == doctest::Approx(ref[1]).epsilon(1e-12));
        CHECK(der.phi == doctest::Approx(ref[2]).epsilon(1e-12));
        CHECK(der.vx == doctest::Approx(ref[3]).epsilon(1e-12));
        CHECK(der.vy == doctest::Approx(ref[4]).epsilon(1e-12));
        CHECK(der.omega == doctest::Approx(ref[5]).epsilon(1e-12));
        CHECK(der.delta == doctest::Approx(ref[6]).epsilon(1e-12));
    }
    SUBCASE("pose equivariance") {
        VehicleState s{0.5, 1.0, 0.3, 1.6, 0.1, 1.2, 0.05};
        ControlInput u{0.4, 0.005};
        auto d0 = dbm_derivative(s, u, fixed, theta, 0.02);
        double beta = 1.1;
        VehicleState r = s;
        r.x = std::cos(beta) * s.x - std::sin(beta) * s.y;
        r.y = std::sin(beta) * s.x + std::cos(beta) * s.y;
        r.phi = s.phi + beta;
        auto d1 = dbm_derivative(r, u, fixed, theta, 0.02);
        CHECK(d1.x == doctest::Approx(std::cos(beta) * d0.x - std::sin(beta) * d0.y).epsilon(1e-10));
        CHECK(d1.y == doctest::Approx(std::sin(beta) * d0.x + std::cos(beta) * d0.y).epsilon(1e-10));
        CHECK(d1.vx == doctest::Approx(d0.vx).epsilon(1e-10));
        CHECK(d1.vy == doctest::Approx(d0.vy).epsilon(1e-10));
        CHECK(d1.omega == doctest::Approx(d0.omega).epsilon(1e-10));
    }
}

TEST_CASE("rk4 step") {
    VehicleFixedParams fixed = test_fixed();
    TireSurfaceParams theta = test_theta();

    SUBCASE("constant velocity free particle advances exactly") {
        auto zero_forces = [](const VehicleState& s, const ControlInput&) {
            VehicleState d;
            d.x = s.vx * std::cos(s.phi) - s.vy * std::sin(s.phi);
            d.y = s.vx * std::sin(s.phi) + s.vy * std::cos(s.phi);
            return d;
        };
        VehicleState s;
        s.vx = 2.0;
        auto r = rk4_step(zero_forces, s, {}, 0.02);
        CHECK(r.x == doctest::Approx(0.04).epsilon(1e-15));
        CHECK(r.vx == 2.0);
    }
    SUBCASE("dt must be positive") {
        VehicleState s;
        CHECK_THROWS_AS(step_model(s, {}, fixed, theta, 0.0, 0.02), std::invalid_argument);
    }
    SUBCASE("Richardson convergence order") {
        // errors against the dt/2 solution shrink ~16x when dt halves
        VehicleState s{0, 0, 0, 1.5, 0.05, 0.8, 0.06};
        ControlInput u{0.3, 0.0};
        auto integrate = [&](double dt, int n) {
            VehicleState x = s;
            for (int i = 0; i < n; ++i) x = step_model(x, u, fixed, theta, dt, 0.08);
            return x;
        };
        auto diff = [](const VehicleState& a, const VehicleState& b) {
            return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                             (a.vx - b.vx) * (a.vx - b.vx) + (a.vy - b.vy) * (a.vy - b.vy) +
                             (a.omega - b.omega) * (a.omega - b.omega));
        };
        double e1 = diff(integrate(0.02, 4), integrate(0.01, 8));
        double e2 = diff(integrate(0.01, 8), integrate(0.005, 16));
        double order = std::log2(e1 / e2);
        CHECK(order >= 3.8);
    }
    SUBCASE("steering clamps at the stop") {
        VehicleState s;
        s.vx = 1.0;
        s.delta = 0.39;
        auto r = step_model(s, {0.0, 0.06}, test_fixed(), theta, 0.02, 0.02);
        CHECK(r.delta == doctest::Approx(0.40));
    }
}

TEST_CASE("plant step") {
    VehicleFixedParams fixed = test_fixed();
    TireSurfaceParams theta = test_theta();

    SUBCASE("substep integration matches a manual chain") {
        oracles::Params p = oracle_params(fixed, theta);
        VehicleState s{0, 0, 0, 1.2, 0.02, 0.4, 0.03};
        ControlInput u{0.4, 0.004};
        VehicleState got = plant_step(s, u, fixed, theta, 0.02, 4);
        oracles::State7 x{s.x, s.y, s.phi, s.vx, s.vy, s.omega, s.delta};
        for (int i = 0; i < 4; ++i) x = oracles::rk4(x, u.d, u.ddelta, 0.005, 0.02, p);
        CHECK(got.x == doctest::Approx(x[0]).epsilon(1e-12));
        CHECK(got.vy == doctest::Approx(x[4]).epsilon(1e-10));
        CHECK(got.omega == doctest::Approx(x[5]).epsilon(1e-10));
    }
    SUBCASE("non-finite states raise an integration error") {
        VehicleState s;
        s.vx = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(plant_step(s, {}, fixed, theta, 0.02, 4), IntegrationError);
    }
    SUBCASE("diverging parameters raise with the offending state attached") {
        TireSurfaceParams crazy = theta;
        crazy.d_f = 1e300;
        crazy.d_r = 1e300;
        VehicleState s;
        s.vx = 1.0;
        s.vy = 0.5;
        s.omega = 2.0;
        s.delta = 0.2;
        try {
            VehicleState x = s;
            for (int i = 0; i < 50; ++i) x = plant_step(x, {1.0, 0.05}, fixed, crazy, 0.02, 4);
            // huge forces must blow up well before 50 steps
            FAIL("expected integration divergence");
        } catch (const IntegrationError& e) {
            CHECK(std::string(e.what()).find("diverged") != std::string::npos);
        }
    }
}

TEST_CASE("parameter schedules") {
    TireSurfaceParams theta = test_theta();

    SUBCASE("constant is the identity") {
        ParamSchedule sc;
        sc.theta_0 = theta;
        auto t1 = schedule_eval(sc, 12.3, 2, 100.0);
        CHECK(t1.d_f == theta.d_f);
        CHECK(t1.b_f == theta.b_f);
    }
    SUBCASE("linear decay scales the peaks at 2 percent per second") {
        ParamSchedule sc;
        sc.kind = ScheduleKind::linear_decay;
        sc.theta_0 = theta;
        sc.decay_rate = 0.02;
        auto t10 = schedule_eval(sc, 10.0, 0, 0.0);
        CHECK(t10.d_f == doctest::Approx(0.80 * theta.d_f).epsilon(1e-12));
        CHECK(t10.d_r == doctest::Approx(0.80 * theta.d_r).epsilon(1e-12));
        CHECK(t10.b_f == theta.b_f);  // stiffness untouched by default
    }
    SUBCASE("decay floors at 5 percent") {
        ParamSchedule sc;
        sc.kind = ScheduleKind::linear_decay;
        sc.theta_0 = theta;
        sc.decay_rate = 0.02;
        auto t = schedule_eval(sc, 1e4, 0, 0.0);
        CHECK(t.d_f == doctest::Approx(0.05 * theta.d_f));
    }
    SUBCASE("step drop fires on its trigger") {
        ParamSchedule sc;
        sc.kind = ScheduleKind::step_drop;
        sc.theta_0 = theta;
        sc.drop_fraction = 0.4;

        sc.trigger = DropTrigger::lap;
        sc.trigger_lap = 1;
        CHECK(schedule_eval(sc, 3.0, 0, 0.0).d_f == theta.d_f);
        CHECK(schedule_eval(sc, 3.0, 1, 0.0).d_f == doctest::Approx(0.6 * theta.d_f));

        sc.trigger = DropTrigger::time;
        sc.trigger_time = 5.0;
        CHECK(schedule_eval(sc, 4.99, 0, 0.0).d_f == theta.d_f);
        CHECK(schedule_eval(sc, 5.0, 0, 0.0).d_f == doctest::Approx(0.6 * theta.d_f));

        sc.trigger = DropTrigger::position;
        sc.trigger_progress = 3.5;
        CHECK(schedule_eval(sc, 0.0, 0, 3.4).d_f == theta.d_f);
        CHECK(schedule_eval(sc, 0.0, 0, 3.6).d_f == doctest::Approx(0.6 * theta.d_f));
    }
    SUBCASE("optional stiffness co-scaling") {
        ParamSchedule sc;
        sc.kind = ScheduleKind::step_drop;
        sc.theta_0 = theta;
        sc.drop_fraction = 0.4;
        sc.trigger = DropTrigger::time;
        sc.trigger_time = 0.0;
        sc.co_scale_bc = true;
        auto t = schedule_eval(sc, 1.0, 0, 0.0);
        CHECK(t.b_f == doctest::Approx(0.6 * theta.b_f));
        CHECK(t.c_r == doctest::Approx(0.6 * theta.c_r));
    }
    SUBCASE("piecewise continuity of linear decay") {
        ParamSchedule sc;
        sc.kind = ScheduleKind::linear_decay;
        sc.theta_0 = theta;
        sc.decay_rate = 0.02;
        for (double t = 0.0; t < 5.0; t += 0.37) {
            double lhs = schedule_eval(sc, t, 0, 0.0).d_f;
            double rhs = schedule_eval(sc, t + 1e-9, 0, 0.0).d_f;
            CHECK(std::abs(lhs - rhs) < 1e-9);
        }
    }
}
