#include "helpers.hpp"
#include "securelat/observer.hpp"
#include "securelat/sim.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace securelat;
using testing::reference_A;
using testing::reference_B;

namespace {

struct Run {
    std::vector<double> alpha, alpha_hat;
    std::vector<Vec> est_error;  // stacked estimation error per step
};

// Open-loop plant under the additive actuator attack, with the ESO riding along.
template <typename AttackFn>
Run observe(const Vec& x0, int steps, AttackFn attack, double noise = 0.0, double radius = 0.9) {
    const auto aug = observer::augment(reference_A(), reference_B(), Mat::Identity(4, 4));
    auto eso = observer::make_eso(aug, x0, radius);
    Rng rng(77);
    Vec x = x0;
    Run out;
    for (int k = 0; k < steps; ++k) {
        const double a = attack(k);
        Vec y = x;
        for (Eigen::Index i = 0; i < 4; ++i) y(i) += noise > 0 ? rng.uniform(-noise, noise) : 0.0;
        Vec truth(5);
        truth << x, a;
        out.est_error.push_back(truth - eso.stacked());
        out.alpha.push_back(a);
        out.alpha_hat.push_back(eso.est_attack(0));
        eso = observer::eso_step(eso, y, Vec::Zero(1), aug);
        x = reference_A() * x + reference_B() * a;
    }
    return out;
}

}  // namespace

TEST_SUITE("observer") {

TEST_CASE("augmentation block structure") {
    const auto aug = observer::augment(reference_A(), reference_B(), Mat::Identity(4, 4));
    REQUIRE(aug.A_aug.rows() == 5);
    CHECK(aug.A_aug.row(4) == (Eigen::RowVectorXd(5) << 0, 0, 0, 0, 1).finished());
    CHECK(aug.A_aug(1, 4) == 0.1);
    CHECK(aug.A_aug.topLeftCorner(4, 4) == reference_A());
    CHECK(aug.B_aug.topRows(4) == reference_B());
    CHECK(aug.B_aug(4, 0) == 0.0);
    CHECK(aug.C_aug.rightCols(1).isZero(0.0));

    const auto zero_b = observer::augment(reference_A(), Mat::Zero(4, 1), Mat::Identity(4, 4));
    CHECK(zero_b.A_aug.topRightCorner(4, 1).isZero(0.0));
}

TEST_CASE("scalar pole placement") {
    const Mat a = Mat::Constant(1, 1, 1.0), c = Mat::Constant(1, 1, 1.0);
    const Mat L = observer::design_gain(a, c, 0.5);
    CHECK(L(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("designed gain meets the radius on the augmented model") {
    const auto aug = observer::augment(reference_A(), reference_B(), Mat::Identity(4, 4));
    for (double r : {0.5, 0.9, 0.99}) {
        const Mat L = observer::design_gain(aug.A_aug, aug.C_aug, r);
        const Mat err = aug.A_aug - L * aug.C_aug;
        Eigen::EigenSolver<Mat> es(err);
        CHECK(es.eigenvalues().cwiseAbs().maxCoeff() <= r + 1e-9);
    }
}

TEST_CASE("unobservable pairs and bad radii are rejected") {
    Mat C = Mat::Identity(4, 4);
    const auto aug = observer::augment(reference_A(), Mat::Zero(4, 1), C);
    // attack channel never reaches the outputs
    CHECK_THROWS_AS(observer::design_gain(aug.A_aug, aug.C_aug, 0.9), InvalidArgument);
    const auto ok = observer::augment(reference_A(), reference_B(), C);
    CHECK_THROWS_AS(observer::design_gain(ok.A_aug, ok.C_aug, 1.0), InvalidArgument);
    Mat C0 = Mat::Zero(1, 4);
    const auto blind = observer::augment(reference_A(), reference_B(), C0);
    CHECK(observer::observability_rank(blind.A_aug, blind.C_aug) == 0);
}

TEST_CASE("zero attack keeps the estimate at zero") {
    const auto r = observe(Eigen::Vector4d(0.5, 0, 0.5, 0), 300, [](int) { return 0.0; });
    for (double a : r.alpha_hat) CHECK(a == 0.0);
}

TEST_CASE("constant attack converges within 500 steps") {
    const auto r = observe(Eigen::Vector4d(0.2, 0, -0.1, 0), 501, [](int) { return 0.1; });
    CHECK(std::abs(r.alpha_hat[500] - 0.1) < 1e-6);
}

TEST_CASE("error dynamics follow the matrix power exactly") {
    const auto aug = observer::augment(reference_A(), reference_B(), Mat::Identity(4, 4));
    const Mat L = observer::design_gain(aug.A_aug, aug.C_aug, 0.9);
    const Mat Acl = aug.A_aug - L * aug.C_aug;
    const auto r = observe(Eigen::Vector4d(0.2, 0.1, -0.1, 0), 101, [](int) { return 0.07; });
    Mat power = Mat::Identity(5, 5);
    for (int k = 0; k <= 100; ++k) {
        CHECK((r.est_error[static_cast<std::size_t>(k)] - power * r.est_error[0]).norm() < 1e-10);
        power = Acl * power;
    }
}

TEST_CASE("sinusoidal attack is tracked") {
    const auto r = observe(Eigen::Vector4d(0.5, 0, 0.5, 0), 2000, [](int k) {
        const double t = 0.01 * k;
        return t >= 10.0 ? 0.15 * std::sin(2.0 * std::numbers::pi * 0.5 * t) : 0.0;
    });
    Eigen::Map<const Vec> a(r.alpha.data() + 1000, 1000), h(r.alpha_hat.data() + 1000, 1000);
    const Vec ac = a.array() - a.mean(), hc = h.array() - h.mean();
    const double corr = ac.dot(hc) / (ac.norm() * hc.norm());
    CHECK(corr >= 0.85);
    CHECK((a - h).cwiseAbs().maxCoeff() < 0.15);
}

TEST_CASE("bounded measurement noise keeps the error bounded") {
    const double gamma = 1e-4;
    const auto r = observe(Eigen::Vector4d(0.1, 0, 0.1, 0), 1500, [](int) { return 0.05; }, gamma);
    double worst = 0.0;
    for (std::size_t k = 500; k < r.alpha.size(); ++k) worst = std::max(worst, std::abs(r.alpha_hat[k] - r.alpha[k]));
    CHECK(worst <= 50.0 * gamma);
}

TEST_CASE("compensation") {
    CHECK(observer::compensate(0.3, 0.0) == 0.3);
    CHECK(observer::compensate(0.2, 0.15) == doctest::Approx(0.05));
    const double u = 0.37, alpha = 0.11;
    CHECK(observer::compensate(u, alpha) + alpha == doctest::Approx(u).epsilon(1e-15));
    const Vec cv = observer::compensate(Vec::Constant(2, 1.0), Vec::Constant(2, 0.25));
    CHECK(cv.isApprox(Vec::Constant(2, 0.75)));
}

TEST_CASE("attack model validation and kinds") {
    observer::AttackModel m;
    CHECK(m.validate().empty());
    m.bound_Qatt = 0.5;
    CHECK_FALSE(m.validate().empty());
    m.assumption_compliance = true;
    CHECK_THROWS_AS(m.validate(), InvalidArgument);
    m = {};
    m.amplitude = 0.3;
    m.assumption_compliance = true;
    CHECK_THROWS_AS(m.validate(), InvalidArgument);
    CHECK(observer::attack_kind_from_string("constant") == observer::AttackKind::Constant);
    CHECK_THROWS_AS(observer::attack_kind_from_string("laser"), InvalidArgument);
}

TEST_CASE("detector needs persistence") {
    auto det = observer::AttackDetector::for_bound(0.15);
    CHECK(det.threshold() == doctest::Approx(0.045));
    for (int i = 0; i < 4; ++i) CHECK_FALSE(det.update(0.1));
    CHECK(det.update(0.1));
    CHECK_FALSE(det.update(0.0));
}

}
