#include "helpers.hpp"
#include "securelat/sysid.hpp"

#include <doctest.h>

#include <Eigen/SVD>

using namespace securelat;
using testing::reference_A;
using testing::reference_B;

namespace {

Mat row_inputs(const std::vector<double>& u) {
    Mat m(1, static_cast<Eigen::Index>(u.size()));
    for (std::size_t k = 0; k < u.size(); ++k) m(0, static_cast<Eigen::Index>(k)) = u[k];
    return m;
}

sysid::DatasetMatrices dataset_from(const Mat& A, const Mat& B, std::size_t samples, std::uint64_t seed) {
    Rng rng(seed);
    const Mat u = testing::random_matrix(rng, B.cols(), static_cast<Eigen::Index>(samples) - 1, -0.1, 0.1);
    Vec x0 = testing::random_matrix(rng, A.rows(), 1).col(0);
    const Mat states = sysid::simulate_discrete(A, B, x0, u);
    return sysid::build_matrices(states, u, 0.01);
}

// Numerical rank of the depth-(depth) input Hankel matrix, computed directly.
Eigen::Index hankel_rank(const Mat& u, Eigen::Index depth) {
    const Eigen::Index cols = u.cols() - depth + 1;
    Mat H(depth * u.rows(), cols);
    for (Eigen::Index i = 0; i < depth; ++i) H.middleRows(i * u.rows(), u.rows()) = u.middleCols(i, cols);
    Eigen::JacobiSVD<Mat> svd(H);
    const auto& s = svd.singularValues();
    const double tol = static_cast<double>(std::max(H.rows(), H.cols())) * s(0) * Eigen::NumTraits<double>::epsilon();
    return (s.array() > tol).count();
}

}  // namespace

TEST_SUITE("sysid") {

TEST_CASE("minimal data matrices") {
    const std::vector<plant::StateVector> xs{plant::StateVector(1, 2, 3, 4), plant::StateVector(5, 6, 7, 8)};
    const auto d = sysid::build_matrices(xs, {0.5}, 0.01);
    CHECK(d.width() == 1);
    CHECK(d.snap_X.col(0) == Vec(xs[0]));
    CHECK(d.snap_Xp.col(0) == Vec(xs[1]));
    CHECK(d.input_Xi(0, 0) == 0.5);
}

TEST_CASE("width contract and shifted columns") {
    const auto u = sysid::random_excitation(5000, 0.05, 1);
    const Mat states = sysid::simulate_discrete(reference_A(), reference_B(), Vec::Zero(4), row_inputs(u));
    const auto d = sysid::build_matrices(Mat(states.leftCols(5000)), row_inputs(u), 0.01);
    CHECK(d.width() == 4999);
    CHECK(d.snap_X.rows() == 4);
    CHECK(d.snap_Xp.leftCols(4998) == d.snap_X.rightCols(4998));
}

TEST_CASE("too few inputs or samples are rejected") {
    std::vector<plant::StateVector> xs(5, plant::StateVector::Zero());
    CHECK_THROWS_AS(sysid::build_matrices(xs, std::vector<double>(3, 0.0), 0.01), InvalidArgument);
    CHECK_THROWS_AS(sysid::build_matrices(std::vector<plant::StateVector>(1), {0.0}, 0.01), InvalidArgument);
}

TEST_CASE("persistency of excitation") {
    SUBCASE("constant input is not exciting") {
        std::vector<plant::StateVector> xs(200, plant::StateVector::Zero());
        const auto d = sysid::build_matrices(xs, std::vector<double>(199, 0.3), 0.01);
        const auto r = sysid::persistency_check(d, 4, 4);
        CHECK_FALSE(r.passed);
        CHECK(r.hankel_rank == 1);
    }
    SUBCASE("length condition arithmetic") {
        const auto d = dataset_from(reference_A(), reference_B(), 5001, 3);
        const auto r = sysid::persistency_check(d, 4, 1);
        CHECK(r.length_ok);
        CHECK(r.required_length == 9);
    }
    SUBCASE("random input matches the explicit Hankel rank") {
        const auto d = dataset_from(reference_A(), reference_B(), 1001, 4);
        const auto r = sysid::persistency_check(d, 4, 4);
        CHECK(r.passed);
        CHECK(r.hankel_rank == hankel_rank(d.input_Xi, 5));
        CHECK(r.hankel_rows == 5);
    }
    SUBCASE("short data fails the length condition") {
        const auto d = dataset_from(reference_A(), reference_B(), 10, 4);
        CHECK_FALSE(sysid::persistency_check(d, 4, 4).length_ok);
    }
}

TEST_CASE("round trip recovers the reference matrices") {
    const auto d = dataset_from(reference_A(), reference_B(), 5000, 11);
    const auto m = sysid::dmd_identify(d, 5);
    CHECK((m.mat_A - reference_A()).norm() < 1e-8);
    CHECK((m.mat_B - reference_B()).norm() < 1e-8);
    CHECK(m.residual_fro < 1e-8);
    CHECK(m.trunc_order == 5);
}

TEST_CASE("decoupled dynamics are recovered") {
    const Mat A = Eigen::Vector4d(0.95, 0.9, 0.85, 0.8).asDiagonal();
    const Mat B = Mat::Ones(4, 1);
    const auto d = dataset_from(A, B, 400, 21);
    const auto m = sysid::dmd_identify(d, 5);
    CHECK((m.mat_A - A).norm() < 1e-10);
    CHECK((m.mat_B - B).norm() < 1e-10);
}

TEST_CASE("identity dynamics with constant states are rank deficient") {
    const Mat A = Mat::Identity(4, 4);
    Mat B = Mat::Zero(4, 1);
    B(1, 0) = 1.0;
    const auto d = dataset_from(A, B, 400, 21);
    CHECK_THROWS_AS(sysid::dmd_identify(d, 5), NumericalError);
}

TEST_CASE("truncation monotonicity") {
    const auto d = dataset_from(reference_A(), reference_B(), 600, 5);
    const auto r1 = sysid::dmd_identify(d, 1);
    const auto r5 = sysid::dmd_identify(d, 5);
    CHECK(r1.residual_fro > r5.residual_fro);
    CHECK_THROWS_AS(sysid::dmd_identify(d, 6), InvalidArgument);
    CHECK_THROWS_AS(sysid::dmd_identify(d, 0), InvalidArgument);
}

TEST_CASE("rank-deficient data cannot support the requested order") {
    std::vector<plant::StateVector> xs(50, plant::StateVector::Zero());
    const auto d = sysid::build_matrices(xs, std::vector<double>(49, 0.0), 0.01);
    CHECK_THROWS(sysid::dmd_identify(d, 5));
}

TEST_CASE("energy-rule truncation") {
    CHECK(sysid::select_truncation({1, 0, 0}) == 1);
    CHECK(sysid::select_truncation({10, 10, 10, 10, 1e-12}) == 4);
    CHECK(sysid::select_truncation({3, 1}, 0.9) == 1);
    CHECK(sysid::select_truncation({3, 1}, 0.95) == 2);
    CHECK_THROWS_AS(sysid::select_truncation({0, 0}), InvalidArgument);
    CHECK_THROWS_AS(sysid::select_truncation({}), InvalidArgument);
    CHECK_THROWS_AS(sysid::select_truncation({1, 2}), InvalidArgument);
}

TEST_CASE("exact recovery for random stable systems") {
    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_int(4));
        const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.uniform_int(2));
        Mat A = testing::random_matrix(rng, n, n);
        A *= 0.9 / std::max(linalg::spectral_radius(A), 1e-3);
        const Mat B = testing::random_matrix(rng, n, p);
        const auto d = dataset_from(A, B, static_cast<std::size_t>(10 * (n + p) + 1), rng.uniform_int(1000));
        const auto m = sysid::dmd_identify(d, static_cast<int>(n + p));
        CHECK((m.mat_A - A).norm() < 1e-7);
        CHECK((m.mat_B - B).norm() < 1e-7);
    }
}

TEST_CASE("least-squares optimality against perturbed candidates") {
    const Mat A = reference_A();
    const auto d = dataset_from(A, reference_B(), 300, 8);
    // perturb the data so the fit is not exact
    auto noisy = d;
    Rng rng(3);
    noisy.snap_Xp += 1e-3 * testing::random_matrix(rng, 4, d.width());
    const auto m = sysid::dmd_identify(noisy, 5);
    CHECK(m.residual_fro == doctest::Approx(sysid::residual(noisy, m.mat_A, m.mat_B)).epsilon(1e-10));
    for (int i = 0; i < 20; ++i) {
        const Mat dA = 1e-4 * testing::random_matrix(rng, 4, 4);
        CHECK(sysid::residual(noisy, m.mat_A + dA, m.mat_B) >= m.residual_fro);
    }
}

TEST_CASE("simulate_discrete length and excitation bounds") {
    const auto u = sysid::random_excitation(100, 0.2, 4);
    CHECK(u.size() == 100);
    for (double v : u) CHECK(std::abs(v) <= 0.2);
    CHECK(sysid::random_excitation(100, 0.2, 4) == u);
    CHECK(sysid::random_excitation(100, 0.2, 5) != u);
    const Mat x = sysid::simulate_discrete(reference_A(), reference_B(), Vec::Zero(4), row_inputs(u));
    CHECK(x.cols() == 101);
}

}
