#include "helpers.hpp"
#include "securelat/plant.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace securelat;
using plant::StateVector;

TEST_SUITE("plant") {

TEST_CASE("continuous matrices evaluate the bicycle model entries") {
    const plant::VehicleParams p;
    const auto m = plant::continuous_matrices(p);
    CHECK(m.mat_H(1, 1) == doctest::Approx(-(80000.0 + 80000.0) / (1573.0 * 30.0)).epsilon(1e-14));
    CHECK(m.mat_H(1, 1) == doctest::Approx(-3.39053).epsilon(1e-5));
    CHECK(m.mat_G(1) == doctest::Approx(50.8582).epsilon(1e-5));
    CHECK(m.mat_G(1) == doctest::Approx(80000.0 / 1573.0).epsilon(1e-14));
    // heading-rate input gain L_f C_f / I_z
    CHECK(m.mat_G(3) == doctest::Approx(1.10 * 80000.0 / 2873.0).epsilon(1e-14));
}

TEST_CASE("structural zeros are exact") {
    plant::VehicleParams p;
    p.mass_kg = 1234.5;
    p.speed_long_m_per_s = 17.3;
    const auto m = plant::continuous_matrices(p);
    CHECK(m.mat_H(0, 0) == 0.0);
    CHECK(m.mat_H(0, 1) == 1.0);
    CHECK(m.mat_H(0, 2) == 0.0);
    CHECK(m.mat_H(0, 3) == 0.0);
    CHECK(m.mat_H(2, 0) == 0.0);
    CHECK(m.mat_H(2, 1) == 0.0);
    CHECK(m.mat_H(2, 2) == 0.0);
    CHECK(m.mat_H(2, 3) == 1.0);
    CHECK(m.mat_G(0) == 0.0);
    CHECK(m.mat_G(2) == 0.0);
}

TEST_CASE("parameter validation rejects non-positive or non-finite values") {
    plant::VehicleParams p;
    p.mass_kg = 0.0;
    CHECK_THROWS_AS(plant::continuous_matrices(p), InvalidArgument);
    p = {};
    p.speed_long_m_per_s = -3.0;
    CHECK_THROWS_AS(plant::continuous_matrices(p), InvalidArgument);
    p = {};
    p.inertia_z_kgm2 = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(plant::continuous_matrices(p), InvalidArgument);
    p = {};
    p.stiff_rear_N_per_rad = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(plant::continuous_matrices(p), InvalidArgument);
}

TEST_CASE("origin is an equilibrium for any step size") {
    const auto m = plant::continuous_matrices({});
    for (double dt : {1e-4, 0.01, 0.1, 0.5}) CHECK(plant::step_continuous(m, StateVector::Zero(), 0.0, dt).isZero(0.0));
}

TEST_CASE("lateral offset alone stays put to first order") {
    const auto m = plant::continuous_matrices({});
    const StateVector x = plant::step_continuous(m, StateVector(1, 0, 0, 0), 0.0, 0.01);
    CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("one step matches a ten-times finer integration") {
    const auto m = plant::continuous_matrices({});
    const StateVector x0(0, 1, 0, 0);
    const StateVector coarse = plant::step_continuous(m, x0, 0.0, 0.001);
    StateVector fine = x0;
    for (int i = 0; i < 10; ++i) fine = plant::step_continuous(m, fine, 0.0, 0.0001);
    CHECK((coarse - fine).norm() / fine.norm() < 1e-9);
}

TEST_CASE("integrator is fourth order") {
    const auto m = plant::continuous_matrices({});
    const StateVector x0(0.3, -0.2, 0.1, 0.4);
    auto oracle = [&](double h) {
        StateVector x = x0;
        for (int i = 0; i < 2000; ++i) x = plant::step_continuous(m, x, 0.02, h / 2000.0);
        return x;
    };
    auto err = [&](double h) {
        // two half steps vs one full step would mix orders; compare one step of size h
        return (plant::step_continuous(m, x0, 0.02, h) - oracle(h)).norm();
    };
    // local error of a p-th order method scales as h^(p+1); halving h must gain at least 8x
    const double e1 = err(0.04), e2 = err(0.02);
    CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("non-finite inputs are rejected") {
    const auto m = plant::continuous_matrices({});
    CHECK_THROWS_AS(plant::step_continuous(m, StateVector::Zero(), std::nan(""), 0.01), InvalidArgument);
    CHECK_THROWS_AS(plant::step_continuous(m, StateVector(std::nan(""), 0, 0, 0), 0.0, 0.01), InvalidArgument);
    CHECK_THROWS_AS(plant::step_continuous(m, StateVector::Zero(), 0.0, 0.0), InvalidArgument);
}

TEST_CASE("trajectory length contract and equilibrium") {
    const auto m = plant::continuous_matrices({});
    const StateVector x0(0.1, 0, 0, 0);
    const auto one = plant::generate_trajectory(m, x0, {0.01}, 0.01);
    REQUIRE(one.size() == 2);
    CHECK(one[0] == x0);
    CHECK(one[1] == plant::step_continuous(m, x0, 0.01, 0.01));

    const auto zeros = plant::generate_trajectory(m, StateVector::Zero(), std::vector<double>(50, 0.0), 0.01);
    CHECK(zeros.size() == 51);
    for (const auto& x : zeros) CHECK(x.isZero(0.0));
    CHECK_THROWS_AS(plant::generate_trajectory(m, x0, {}, 0.01), InvalidArgument);
}

TEST_CASE("bounded process noise stays within its bound per step") {
    const auto m = plant::continuous_matrices({});
    plant::TrajectoryOptions opt;
    opt.noise_bound = 1e-3;
    opt.noise_seed = 5;
    const std::vector<double> u(200, 0.0);
    const auto noisy = plant::generate_trajectory(m, StateVector::Zero(), u, 0.01, opt);
    for (std::size_t k = 0; k + 1 < noisy.size(); ++k) {
        const StateVector clean = plant::step_continuous(m, noisy[k], 0.0, 0.01);
        CHECK((noisy[k + 1] - clean).cwiseAbs().maxCoeff() <= 1e-3 + 1e-15);
    }
}

TEST_CASE("small-angle counter") {
    CHECK(plant::count_large_angle_inputs({0.0, 0.05, -0.09, 0.2}) == 2);
}

}
