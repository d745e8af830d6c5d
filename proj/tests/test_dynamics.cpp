#include <doctest.h>

#include <cmath>

#include "msw/dynamics.hpp"
#include "oracles.hpp"

using namespace msw;

TEST_CASE("step: zero-velocity fixed point") {
    const State s{0, 0, 0, 0};
    const State n = step(s, Control{0, 0}, DynamicsParams{0.1, 0.1});
    CHECK(n.x == 0.0);
    CHECK(n.y == 0.0);
    CHECK(n.heading == 0.0);
    CHECK(n.speed == 0.0);
}

TEST_CASE("step: straight-line coasting without friction") {
    const State s{0, 0, 0, 1};
    const State n = step(s, Control{0, 0}, DynamicsParams{0.0, 0.1});
    CHECK(n.x == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(n.y == 0.0);
    CHECK(n.heading == 0.0);
    CHECK(n.speed == 1.0);
}

TEST_CASE("step: hand evaluation of the Euler update") {
    // s=(0,0,pi/4,2), u=(0.5,1), friction 0.1, dt 0.1:
    //   x' = 0.1 * 2 * cos(pi/4), y' = 0.1 * 2 * sin(pi/4)
    //   heading' = pi/4 + 0.1 * 2 * 0.5, v' = 2 + 0.1 * (1 - 0.2)
    const State s{0, 0, M_PI / 4, 2};
    const State n = step(s, Control{0.5, 1.0}, DynamicsParams{0.1, 0.1});
    CHECK(n.x == doctest::Approx(0.14142135623730951).epsilon(1e-14));
    CHECK(n.y == doctest::Approx(0.14142135623730951).epsilon(1e-14));
    CHECK(n.heading == doctest::Approx(M_PI / 4 + 0.1).epsilon(1e-14));
    CHECK(n.speed == doctest::Approx(2.08).epsilon(1e-14));
}

TEST_CASE("step: non-finite input is rejected") {
    State s{0, 0, 0, 1};
    s.x = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(step(s, Control{0, 0}, DynamicsParams{}), Error);
    CHECK_THROWS_AS(step(State{0, 0, 0, 1}, Control{std::nan(""), 0}, DynamicsParams{}), Error);
}

TEST_CASE("step: determinism") {
    const State s{1.2, -0.4, 0.3, 6.1};
    const Control u{0.2, -1.3};
    const DynamicsParams p{0.1, 0.1};
    const State a = step(s, u, p);
    const State b = step(s, u, p);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.heading == b.heading);
    CHECK(a.speed == b.speed);
}

TEST_CASE("rollout: horizon zero returns just the initial state") {
    JointState js;
    js.robot = State{0, 0, 0, 5};
    js.human = State{5, 3, 0, 5};
    const auto traj = rollout(js, ControlSeq{}, ControlSeq{}, {}, DynamicsParams{});
    CHECK(traj.size() == 1);
    CHECK(traj[0].robot.x == js.robot.x);
}

TEST_CASE("rollout: zero controls and zero speeds give a constant trajectory") {
    JointState js;
    js.robot = State{1, 0, 0.2, 0};
    js.human = State{4, 3, -0.1, 0};
    ControlSeq z;
    z.resize(4);
    const auto traj = rollout(js, z, z, {}, DynamicsParams{});
    for (const auto& s : traj) {
        CHECK(s.robot.x == 1.0);
        CHECK(s.human.x == 4.0);
        CHECK(s.robot.speed == 0.0);
    }
}

TEST_CASE("rollout equals chained step calls") {
    JointState js;
    js.robot = State{0, 0, 0.05, 7};
    js.human = State{3, 3, -0.02, 8};
    js.others.push_back(State{10, 0, 0, 8});
    std::vector<Route> routes(1);
    routes[0].controls.assign(8, Control{0.01, 0.3});

    ControlSeq ur, uh;
    for (int k = 0; k < 5; ++k) {
        ur.push_back(Control{0.05 * k, 0.5});
        uh.push_back(Control{-0.03 * k, -0.2});
    }
    const DynamicsParams p{0.1, 0.1};
    const auto traj = rollout(js, ur, uh, routes, p);
    REQUIRE(traj.size() == 6);

    JointState cur = js;
    for (int k = 0; k < 5; ++k) {
        cur.robot = step(cur.robot, ur[k], p);
        cur.human = step(cur.human, uh[k], p);
        cur.others[0] = step(cur.others[0], routes[0].at(k), p);
        CHECK(traj[static_cast<std::size_t>(k + 1)].robot.x == cur.robot.x);
        CHECK(traj[static_cast<std::size_t>(k + 1)].robot.speed == cur.robot.speed);
        CHECK(traj[static_cast<std::size_t>(k + 1)].human.y == cur.human.y);
        CHECK(traj[static_cast<std::size_t>(k + 1)].others[0].x == cur.others[0].x);
    }
}

TEST_CASE("rollout: mismatched horizons are a dimension error") {
    JointState js;
    js.robot = State{0, 0, 0, 5};
    js.human = State{5, 3, 0, 5};
    ControlSeq ur, uh;
    ur.resize(3);
    uh.resize(4);
    CHECK_THROWS_AS(rollout(js, ur, uh, {}, DynamicsParams{}), Error);
}

TEST_CASE("frictionless zero-control rollout conserves speed and heading exactly") {
    JointState js;
    js.robot = State{0, 0, 0.37, 6.5};
    js.human = State{8, 3, -0.2, 7.25};
    ControlSeq z;
    z.resize(6);
    const auto traj = rollout(js, z, z, {}, DynamicsParams{0.0, 0.1});
    for (const auto& s : traj) {
        CHECK(s.robot.speed == 6.5);
        CHECK(s.robot.heading == 0.37);
        CHECK(s.human.speed == 7.25);
        CHECK(s.human.heading == -0.2);
    }
}

TEST_CASE("smooth step derivative matches finite differences") {
    const DynamicsParams p{0.1, 0.1};
    oracles::Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const State s{rng.uniform(-5, 5), rng.uniform(-1, 4), rng.uniform(-0.4, 0.4),
                      rng.uniform(0.5, 9.0)};
        const Control u{rng.uniform(-0.8, 0.8), rng.uniform(-3, 3)};

        // one dual pass over all six inputs
        using D = Dual<double, 6>;
        StateT<D> sd{D(s.x), D(s.y), D(s.heading), D(s.speed)};
        ControlT<D> ud{D(u.steer), D(u.accel)};
        sd.x.n = sd.y.n = sd.heading.n = sd.speed.n = 6;
        ud.steer.n = ud.accel.n = 6;
        sd.x.d[0] = 1;
        sd.y.d[1] = 1;
        sd.heading.d[2] = 1;
        sd.speed.d[3] = 1;
        ud.steer.d[4] = 1;
        ud.accel.d[5] = 1;
        const StateT<D> nd = step_smooth(sd, ud, p);

        auto pack_eval = [&](const std::vector<double>& v, int out) {
            const StateT<double> ss{v[0], v[1], v[2], v[3]};
            const ControlT<double> uu{v[4], v[5]};
            const StateT<double> nn = step_smooth(ss, uu, p);
            switch (out) {
                case 0: return nn.x;
                case 1: return nn.y;
                case 2: return nn.heading;
                default: return nn.speed;
            }
        };
        const std::vector<double> at{s.x, s.y, s.heading, s.speed, u.steer, u.accel};
        for (int out = 0; out < 4; ++out) {
            const auto fd = oracles::fd_gradient(
                [&](const std::vector<double>& v) { return pack_eval(v, out); }, at);
            const double gnorm = oracles::max_abs(fd);
            const D& comp = out == 0 ? nd.x : out == 1 ? nd.y : out == 2 ? nd.heading : nd.speed;
            for (int i = 0; i < 6; ++i) {
                const double ad = i < comp.n ? comp.d[i] : 0.0;
                CHECK(oracles::grads_close(ad, fd[static_cast<std::size_t>(i)], gnorm));
            }
        }
    }
}
