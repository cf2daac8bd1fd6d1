#include "helpers.hpp"
#include "securelat/control.hpp"
#include "securelat/sim.hpp"

#include <doctest.h>

#include <cmath>

using namespace securelat;
using testing::reference_A;
using testing::reference_B;

namespace {

RowVec reference_K() { return Eigen::RowVector4d(-0.5, -0.6, -0.5, -0.4); }

control::SlidingConfig designed(control::SlidingConfig base = {}) {
    return control::make_sliding_config(reference_A(), reference_B(), base);
}

control::SlidingConfig unit_fb() {
    control::SlidingConfig c;
    c.FB = 1.0;
    return c;
}

}  // namespace

TEST_SUITE("control") {

TEST_CASE("riccati: zero dynamics give P = Q") {
    const Mat Q = Eigen::Vector4d(10, 1, 10, 1).asDiagonal();
    const auto r = control::riccati_solve(Mat::Zero(4, 4), reference_B(), Q, Mat::Identity(1, 1));
    CHECK((r.P - Q).norm() == 0.0);
    CHECK(r.iterations <= 2);
}

TEST_CASE("riccati: scalar closed form") {
    const Mat a = Mat::Constant(1, 1, 0.5), b = Mat::Constant(1, 1, 1.0), q = Mat::Identity(1, 1);
    const auto r = control::riccati_solve(a, b, q, q);
    const double root = (0.25 + std::sqrt(4.0625)) / 2.0;
    CHECK(std::abs(r.P(0, 0) - root) < 1e-9);
    CHECK(std::abs(r.P(0, 0) - 1.132782) < 1e-6);
}

TEST_CASE("riccati: reference system residual") {
    const Mat Q = Eigen::Vector4d(10, 1, 10, 1).asDiagonal();
    const Mat R = Mat::Identity(1, 1);
    const auto r = control::riccati_solve(reference_A(), reference_B(), Q, R);
    CHECK(control::riccati_residual(reference_A(), reference_B(), Q, R, r.P) < 1e-9);
    CHECK(linalg::is_symmetric(r.P, 1e-12));
    CHECK(Eigen::LLT<Mat>(r.P).info() == Eigen::Success);
}

TEST_CASE("riccati: invalid weights and budget") {
    const Mat Q = Mat::Identity(4, 4);
    CHECK_THROWS_AS(control::riccati_solve(reference_A(), reference_B(), -Q, Mat::Identity(1, 1)), InvalidArgument);
    CHECK_THROWS_AS(control::riccati_solve(reference_A(), reference_B(), Q, Mat::Zero(1, 1)), InvalidArgument);
    // unstable and unreachable: never settles
    const Mat A = 2.0 * Mat::Identity(2, 2);
    CHECK_THROWS(control::riccati_solve(A, Mat::Zero(2, 1), Mat::Identity(2, 2), Mat::Identity(1, 1), 1e-12, 200));
}

TEST_CASE("GL weights and derivative examples") {
    const auto w = control::gl_weights(0.5, 4);
    CHECK(w[0] == 1.0);
    CHECK(w[1] == doctest::Approx(-0.5));
    CHECK(w[2] == doctest::Approx(-0.125));
    CHECK(w[3] == doctest::Approx(-0.0625));
    CHECK(control::gl_derivative({1, 1, 1, 1}, 0.5, 1.0, 4) == doctest::Approx(0.3125).epsilon(1e-15));
    CHECK(control::gl_derivative({1, 1, 1, 1}, 0.5, 1.0, 500) == doctest::Approx(0.3125).epsilon(1e-15));
    CHECK(control::gl_derivative({0, 0, 0}, 0.5, 0.01, 500) == 0.0);
    CHECK(control::gl_derivative({2.0, 5.0}, 1.0, 1.0, 500) == doctest::Approx(3.0));
    // truncation keeps only the most recent memory_len samples
    CHECK(control::gl_derivative({100.0, 1, 1, 1}, 0.5, 1.0, 3) == doctest::Approx(1.0 - 0.5 - 0.125));
    CHECK_THROWS_AS(control::gl_derivative({}, 0.5, 1.0, 3), InvalidArgument);
}

TEST_CASE("GL weights sum towards zero") {
    const auto w = control::gl_weights(0.5, 4000);
    double partial = 0.0, at200 = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        partial += w[j];
        if (j == 199) at200 = partial;
    }
    // partial sums decay like L^-gamma / Gamma(1 - gamma)
    CHECK(at200 == doctest::Approx(1.0 / (std::sqrt(200.0) * std::sqrt(M_PI))).epsilon(0.02));
    CHECK(std::abs(partial) < 1e-2);
    CHECK(partial > 0.0);
}

TEST_CASE("GL with gamma = 1 is the backward difference") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> h(2 + rng.uniform_int(30));
        for (double& v : h) v = rng.uniform(-10, 10);
        const double ell = rng.uniform(0.001, 1.0);
        const double expect = (h.back() - h[h.size() - 2]) / ell;
        CHECK(std::abs(control::gl_derivative(h, 1.0, ell, 500) - expect) <= 1e-14 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("sign convention") {
    CHECK(control::sgn(0.0) == 0.0);
    CHECK(control::sgn(-3.0) == -1.0);
    CHECK(control::sgn(2.0) == 1.0);
    CHECK(control::sgn(1.0, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("sliding surface: zero state keeps everything at zero") {
    const auto cfg = designed();
    control::SlidingState sl(cfg, Vec::Zero(4));
    for (int k = 0; k < 50; ++k)
        CHECK(control::sliding_surface_step(cfg, Vec::Zero(4), sl, reference_A(), reference_B(), reference_K()) == 0.0);
    CHECK(sl.eps_current() == 0.0);
}

TEST_CASE("sliding surface: no fractional term when lambda = 0") {
    control::SlidingConfig base;
    base.frac_weight_lambda = 0.0;
    const auto cfg = designed(base);
    const Vec x0 = Eigen::Vector4d(0.5, 0, 0.5, 0);
    control::SlidingState sl(cfg, x0);
    Vec x = x0;
    for (int k = 0; k < 10; ++k) {
        const double eps = sl.eps_current();
        const double S = sl.step(cfg, x, reference_A(), reference_B(), reference_K());
        CHECK(S == doctest::Approx(cfg.surface_row_F.dot(x) + eps).epsilon(1e-15));
        x = (reference_A() + reference_B() * reference_K()) * x;
    }
}

TEST_CASE("sliding surface: hand-chained two steps") {
    const auto cfg = designed();
    const Mat Acl = reference_A() + reference_B() * reference_K();
    const RowVec F = cfg.surface_row_F;
    const Vec x0 = Eigen::Vector4d(0.5, 0, 0.5, 0);
    const Vec x1 = Acl * x0;
    control::SlidingState sl(cfg, x0);
    const double S0 = sl.step(cfg, x0, reference_A(), reference_B(), reference_K());
    const double S1 = sl.step(cfg, x1, reference_A(), reference_B(), reference_K());

    const double scale = 0.2 * std::pow(0.01, -0.5);
    const double eps0 = 0.0;
    const double eps1 = eps0 + F.dot(x0) - F.dot(Acl * x0);
    CHECK(S0 == doctest::Approx(F.dot(x0) + eps0 + scale * eps0).epsilon(1e-14));
    CHECK(S1 == doctest::Approx(F.dot(x1) + eps1 + scale * (eps1 - 0.5 * eps0)).epsilon(1e-14));
}

TEST_CASE("sliding surface: zero-surface initialisation gives S(0) = 0") {
    control::SlidingConfig base;
    base.surface_init = control::SurfaceInit::ZeroSurface;
    const auto cfg = designed(base);
    control::SlidingState sl(cfg, Eigen::Vector4d(0.5, 0, 0.5, 0));
    CHECK(std::abs(sl.step(cfg, Eigen::Vector4d(0.5, 0, 0.5, 0), reference_A(), reference_B(), reference_K())) < 1e-14);
}

TEST_CASE("memory never exceeds L") {
    control::SlidingConfig base;
    base.memory_len_L = 7;
    const auto cfg = designed(base);
    control::SlidingState sl(cfg, Eigen::Vector4d(0.1, 0, 0, 0));
    for (int k = 0; k < 30; ++k) sl.step(cfg, Eigen::Vector4d(0.1, 0, 0, 0), reference_A(), reference_B(), reference_K());
    CHECK(sl.eps_history().size() == 7);
}

TEST_CASE("equivalent control examples") {
    CHECK(control::equivalent_control(reference_K(), Vec::Zero(4), 0.0, 0.15) == 0.0);
    CHECK(control::equivalent_control(reference_K(), Eigen::Vector4d(0.5, 0, 0.5, 0), 0.0, 0.15) == doctest::Approx(-0.5));
    CHECK(control::equivalent_control(reference_K(), Vec::Zero(4), -2.0, 0.15) == doctest::Approx(0.15));
}

TEST_CASE("switching control examples") {
    const auto cfg = unit_fb();
    CHECK(control::switching_control(cfg, 0.0) == 0.0);
    CHECK(control::switching_control(cfg, 0.3) == doctest::Approx(-0.5));
    for (double s : {0.01, 0.5, 3.0}) CHECK(control::switching_control(cfg, -s) == -control::switching_control(cfg, s));
    control::SlidingConfig zero;
    CHECK_THROWS_AS(control::switching_control(zero, 1.0), InvalidArgument);
}

TEST_CASE("composite control decomposition") {
    const auto cfg = designed();
    const Vec xs = Eigen::Vector4d(0.3, -0.1, 0.2, 0.05);
    CHECK(control::composite_control(cfg, Mat::Identity(1, 4).eval() * 0.0, Mat::Identity(4, 4), Vec::Zero(4), 0.0) ==
          0.0);
    const Mat E = Eigen::Vector4d(2, 1, 0.5, 4).asDiagonal();
    const Mat Y = reference_K() * E;
    for (double S : {-0.4, 0.0, 0.7}) {
        const double reach = -(cfg.switch_rho + cfg.attack_bound_Qatt * std::abs(cfg.FB)) / cfg.FB * control::sgn(S);
        const double expect = control::equivalent_control(reference_K(), xs, S, cfg.switch_kappa) + reach;
        CHECK(std::abs(control::composite_control(cfg, Y, E, xs, S) - expect) < 1e-12);
        CHECK(std::abs(control::composite_control(cfg, reference_K(), xs, S) - expect) < 1e-12);
    }
    CHECK_THROWS_AS(control::composite_control(cfg, Y, Mat::Zero(4, 4), xs, 0.1), InvalidArgument);
}

TEST_CASE("composite control inside a case III step") {
    auto sc = sim::reference_scenario(sim::CaseId::III);
    sc.duration_s = 10.05;
    const auto tr = sim::run_scenario(sc);
    const auto cfg = designed();
    const std::size_t k = tr.records.size() - 1;
    const auto& r = tr.records[k];
    REQUIRE(r.alpha_att != 0.0);
    // the controller holds the state sent delay_steps ago
    const Vec held = tr.records[k - static_cast<std::size_t>(r.delay_steps)].state;
    const double feedback = reference_K().dot(held);
    const double kappa_term = -cfg.switch_kappa * control::sgn(r.S);
    const double reach = -(cfg.switch_rho + cfg.attack_bound_Qatt * std::abs(cfg.FB)) / cfg.FB * control::sgn(r.S);
    CHECK(std::abs(r.u_applied - (feedback + kappa_term + reach - r.alpha_hat)) < 1e-12);
}

TEST_CASE("secure domain level") {
    auto cfg = unit_fb();
    CHECK(control::secure_domain(cfg).level_xi == doctest::Approx(0.5 / 0.85));
    cfg.attack_bound_Qatt = 0.0;
    cfg.switch_rho = 1e-12;
    CHECK(control::secure_domain(cfg).level_xi < 1e-11);
    auto a = unit_fb(), b = unit_fb();
    a.switch_kappa = 0.5;
    b.switch_kappa = 0.0;
    CHECK(control::secure_domain(a).level_xi == doctest::Approx(2.0 * control::secure_domain(b).level_xi));
    a.switch_kappa = 1.0;
    CHECK_THROWS_AS(control::secure_domain(a), InvalidArgument);
    CHECK(control::secure_domain(designed()).level_xi == doctest::Approx(0.285876842779).epsilon(1e-9));
}

TEST_CASE("sliding Lyapunov diagnostic") {
    const auto zero = control::lyapunov_smc_diagnostic(std::vector<double>(20, 0.0));
    for (double d : zero.delta_V) CHECK(d == 0.0);

    std::vector<double> geo(30);
    for (std::size_t k = 0; k < geo.size(); ++k) geo[k] = std::pow(0.9, static_cast<double>(k));
    const auto g = control::lyapunov_smc_diagnostic(geo);
    for (std::size_t k = 0; k < g.delta_V.size(); ++k) {
        CHECK(g.delta_V[k] == doctest::Approx(geo[k] * (geo[k + 1] - geo[k])));
        CHECK(g.delta_V[k] < 0.0);
    }

    const auto tr = sim::run_scenario(sim::reference_scenario(sim::CaseId::I));
    const auto rep = control::lyapunov_smc_diagnostic(sim::surface_series(tr), tr.xi / 10.0, 200);
    CHECK(rep.fraction_nonpositive() >= 0.99);
}

}
