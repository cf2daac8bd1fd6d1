#include "securelat/sysid.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace securelat::sysid {

IdentifiedModel reference_model() {
    IdentifiedModel m;
    m.mat_A.resize(4, 4);
    m.mat_A << 0.999, 0.01, 0.0, 0.0,
               -0.05, 0.99, 0.05, 0.0,
               0.0, 0.0, 0.999, 0.01,
               -0.01, 0.0, -0.08, 0.995;
    m.mat_B.resize(4, 1);
    m.mat_B << 0.0, 0.1, 0.0, 0.05;
    m.trunc_order = 5;
    m.residual_fro = 0.0;
    m.sample_period_s = 0.01;
    return m;
}

DatasetMatrices build_matrices(const Mat& states, const Mat& inputs, double sample_period_s) {
    const Eigen::Index m = states.cols();
    if (m < 2) throw InvalidArgument("build_matrices: need at least 2 state samples, got " + std::to_string(m));
    if (inputs.cols() < m - 1)
        throw InvalidArgument("build_matrices: need " + std::to_string(m - 1) + " inputs, got " +
                              std::to_string(inputs.cols()));
    if (!(sample_period_s > 0.0)) throw InvalidArgument("build_matrices: sample period must be > 0");
    if (!states.allFinite() || !inputs.leftCols(m - 1).allFinite())
        throw InvalidArgument("build_matrices: non-finite samples");

    DatasetMatrices d;
    d.snap_X = states.leftCols(m - 1);
    d.snap_Xp = states.rightCols(m - 1);
    d.input_Xi = inputs.leftCols(m - 1);
    d.sample_period_s = sample_period_s;
    return d;
}

DatasetMatrices build_matrices(const std::vector<plant::StateVector>& states, const std::vector<double>& inputs,
                               double sample_period_s) {
    Mat s(4, static_cast<Eigen::Index>(states.size()));
    for (std::size_t k = 0; k < states.size(); ++k) s.col(static_cast<Eigen::Index>(k)) = states[k];
    Mat u(1, static_cast<Eigen::Index>(inputs.size()));
    for (std::size_t k = 0; k < inputs.size(); ++k) u(0, static_cast<Eigen::Index>(k)) = inputs[k];
    return build_matrices(s, u, sample_period_s);
}

PersistencyReport persistency_check(const DatasetMatrices& data, int order_ns, int window_ls) {
    PersistencyReport r;
    if (order_ns < 0 || window_ls < 0) return r;
    // The input sequence has m-1 samples; m counts the states.
    const Eigen::Index m = data.width() + 1;
    r.available_length = m;
    r.required_length = static_cast<Eigen::Index>(order_ns + 1) * (window_ls + 1) - 1;
    r.length_ok = m >= r.required_length;

    const Eigen::Index depth = window_ls + 1;
    const Eigen::Index p = data.p();
    const Eigen::Index cols = data.width() - depth + 1;
    r.hankel_rows = depth * p;
    if (cols < 1 || p == 0) return r;

    Mat hankel(depth * p, cols);
    for (Eigen::Index i = 0; i < depth; ++i) hankel.middleRows(i * p, p) = data.input_Xi.middleCols(i, cols);
    r.hankel_rank = linalg::numerical_rank(hankel);
    r.passed = r.length_ok && r.hankel_rank == r.hankel_rows;
    return r;
}

int select_truncation(const std::vector<double>& sv, double threshold) {
    if (sv.empty()) throw InvalidArgument("select_truncation: empty spectrum");
    if (!(threshold > 0.0 && threshold <= 1.0)) throw InvalidArgument("select_truncation: threshold must be in (0, 1]");
    double total = 0.0;
    for (std::size_t i = 0; i < sv.size(); ++i) {
        if (!(sv[i] >= 0.0) || !std::isfinite(sv[i])) throw InvalidArgument("select_truncation: negative or non-finite value");
        if (i > 0 && sv[i] > sv[i - 1]) throw InvalidArgument("select_truncation: values must be descending");
        total += sv[i] * sv[i];
    }
    if (total == 0.0) throw InvalidArgument("select_truncation: all-zero spectrum");
    double acc = 0.0;
    for (std::size_t i = 0; i < sv.size(); ++i) {
        acc += sv[i] * sv[i];
        // Relative slack so that exact ties such as 9/10 = 0.9 are not lost to rounding.
        if (acc / total >= threshold * (1.0 - 1e-14)) return static_cast<int>(i + 1);
    }
    return static_cast<int>(sv.size());
}

double residual(const DatasetMatrices& data, const Mat& A, const Mat& B) {
    return (data.snap_Xp - A * data.snap_X - B * data.input_Xi).norm();
}

IdentifiedModel dmd_identify(const DatasetMatrices& data, Truncation trunc_order) {
    const Eigen::Index n = data.n(), p = data.p(), w = data.width();
    if (w < 1 || n < 1) throw InvalidArgument("dmd_identify: empty data");

    Mat theta(n + p, w);
    theta.topRows(n) = data.snap_X;
    theta.bottomRows(p) = data.input_Xi;

    Eigen::BDCSVD<Mat> svd(theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& s = svd.singularValues();
    const double tol = static_cast<double>(std::max(theta.rows(), theta.cols())) * s(0) *
                       std::numeric_limits<double>::epsilon();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > tol) ++rank;

    int r = 0;
    if (trunc_order) {
        r = *trunc_order;
        if (r < 1 || r > n + p)
            throw InvalidArgument("dmd_identify: truncation order must be in [1, " + std::to_string(n + p) + "]");
    } else {
        r = select_truncation(std::vector<double>(s.data(), s.data() + s.size()));
    }
    if (r > rank)
        throw NumericalError("dmd_identify: data matrix has numerical rank " + std::to_string(rank) +
                             " below truncation order " + std::to_string(r));

    const Mat Ur = svd.matrixU().leftCols(r);
    const Mat Vr = svd.matrixV().leftCols(r);
    const Vec sinv = s.head(r).cwiseInverse();
    const Mat gamma = data.snap_Xp * Vr * sinv.asDiagonal() * Ur.transpose();

    IdentifiedModel out;
    out.mat_A = gamma.leftCols(n);
    out.mat_B = gamma.rightCols(p);
    out.trunc_order = r;
    out.residual_fro = residual(data, out.mat_A, out.mat_B);
    out.sample_period_s = data.sample_period_s;
    return out;
}

Mat simulate_discrete(const Mat& A, const Mat& B, const Vec& x0, const Mat& inputs) {
    if (A.rows() != A.cols() || A.rows() != x0.size() || B.rows() != A.rows() || inputs.rows() != B.cols())
        throw InvalidArgument("simulate_discrete: dimension mismatch");
    Mat out(A.rows(), inputs.cols() + 1);
    out.col(0) = x0;
    for (Eigen::Index k = 0; k < inputs.cols(); ++k) out.col(k + 1) = A * out.col(k) + B * inputs.col(k);
    return out;
}

std::vector<double> random_excitation(std::size_t count, double amplitude, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> u(count);
    for (auto& v : u) v = rng.uniform(-amplitude, amplitude);
    return u;
}

}  // namespace securelat::sysid
