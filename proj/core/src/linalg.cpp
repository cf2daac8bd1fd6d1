#include "securelat/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace securelat::linalg {

double spectral_radius(const Mat& m) {
    if (m.rows() != m.cols()) throw InvalidArgument("spectral_radius: matrix must be square");
    if (m.size() == 0) return 0.0;
    Eigen::EigenSolver<Mat> es(m, false);
    if (es.info() != Eigen::Success) throw NumericalError("spectral_radius: eigen decomposition failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::Index numerical_rank(const Mat& m) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(m);
    const Vec& s = svd.singularValues();
    const double tol = static_cast<double>(std::max(m.rows(), m.cols())) * s(0) *
                       std::numeric_limits<double>::epsilon();
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > tol) ++r;
    return r;
}

bool is_symmetric(const Mat& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool all_finite(const Mat& m) { return m.allFinite(); }

std::vector<std::vector<double>> to_rows(const Mat& m) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    }
    return out;
}

Mat from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Mat(0, 0);
    const std::size_t cols = rows.front().size();
    Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw InvalidArgument("from_rows: ragged matrix");
        for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return m;
}

}  // namespace securelat::linalg

namespace securelat {

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    if (n == std::numeric_limits<std::uint64_t>::max()) return engine_();
    const std::uint64_t range = n + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % range;
}

}  // namespace securelat
