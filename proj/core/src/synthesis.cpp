#include "securelat/synthesis.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace securelat::synthesis {

Mat LmiBlocks::full() const {
    const Eigen::Index a = block_Psi11.rows(), b = block_Psi22.rows();
    Mat m(a + b, a + b);
    m.topLeftCorner(a, a) = block_Psi11;
    m.topRightCorner(a, b) = block_Psi12;
    m.bottomLeftCorner(b, a) = block_Psi12.transpose();
    m.bottomRightCorner(b, b) = block_Psi22;
    return m;
}

Mat LmiBlocks::schur() const {
    return block_Psi11 - block_Psi12 * block_Psi22.ldlt().solve(block_Psi12.transpose());
}

namespace {

void check_dims(const Mat& A, const Mat& B) {
    if (A.rows() != A.cols() || B.rows() != A.rows() || A.rows() == 0)
        throw InvalidArgument("synthesis: A must be square and B must have matching rows");
}

void check_square(const Mat& m, Eigen::Index n, const char* name) {
    if (m.rows() != n || m.cols() != n) throw InvalidArgument(std::string("synthesis: ") + name + " has wrong shape");
}

/// Upper blocks of Psi11 by (row, col), 0-based; the lower triangle is mirrored.
struct BlockEntry {
    int r, c;
    Mat value;
};

Mat mirror_blocks(Eigen::Index n, const std::vector<BlockEntry>& entries) {
    Mat m = Mat::Zero(4 * n, 4 * n);
    for (const auto& e : entries) {
        m.block(e.r * n, e.c * n, n, n) = e.value;
        if (e.r != e.c) m.block(e.c * n, e.r * n, n, n) = e.value.transpose();
    }
    return m;
}

LmiBlocks finish(const Mat& psi11, const Mat& F, const Mat& left, const Mat& right, int delta_bar, const Mat& d1,
                 const Mat& d2) {
    const Eigen::Index n = F.rows();
    LmiBlocks out;
    out.block_Psi11 = psi11;
    out.row_F = F;
    out.block_Psi12.resize(4 * n, 2 * n);
    out.block_Psi12.leftCols(n) = F.transpose() * left;
    out.block_Psi12.rightCols(n) = static_cast<double>(delta_bar) * F.transpose() * right;
    out.block_Psi22 = Mat::Zero(2 * n, 2 * n);
    out.block_Psi22.topLeftCorner(n, n) = d1;
    out.block_Psi22.bottomRightCorner(n, n) = d2;
    return out;
}

}  // namespace

LmiBlocks assemble_theorem3(const Mat& A, const Mat& B, const Mat& K, double mu, int delta_bar, const Theorem3Vars& v) {
    check_dims(A, B);
    const Eigen::Index n = A.rows();
    if (K.rows() != B.cols() || K.cols() != n) throw InvalidArgument("assemble_theorem3: K has wrong shape");
    check_square(v.P, n, "P");
    check_square(v.R, n, "R");
    check_square(v.T, n, "T");
    check_square(v.Upsilon, n, "Upsilon");
    if (delta_bar < 0) throw InvalidArgument("assemble_theorem3: delta_bar must be >= 0");

    const Mat I = Mat::Identity(n, n);
    const Mat AmI = A - I;
    const Mat BK = B * K;
    const Mat PBK = v.P * BK;
    // The listed (1,2) = 2PBK + T with (2,1) = T is the quadratic form whose symmetric part is PBK + T.
    const Mat psi11 = mirror_blocks(n, {
        {0, 0, v.P * AmI + AmI.transpose() * v.P + v.R - v.T},
        {0, 1, PBK + v.T},
        {0, 3, PBK},
        {1, 1, -2.0 * v.T + mu * v.Upsilon},
        {1, 2, v.T},
        {2, 2, -v.T - v.R},
        {3, 3, -v.Upsilon},
    });
    Mat F = Mat::Zero(n, 4 * n);
    F.block(0, 0, n, n) = AmI;
    F.block(0, n, n, n) = BK;
    F.block(0, 3 * n, n, n) = BK;
    return finish(psi11, F, v.P, v.T, delta_bar, -v.P, -v.T);
}

LmiBlocks assemble_theorem4(const Mat& A, const Mat& B, double mu, int delta_bar, const Theorem4Vars& v) {
    check_dims(A, B);
    const Eigen::Index n = A.rows();
    check_square(v.E, n, "E");
    check_square(v.Qh, n, "Qh");
    check_square(v.Rh, n, "Rh");
    check_square(v.Upsh, n, "Upsh");
    if (v.Y.rows() != B.cols() || v.Y.cols() != n) throw InvalidArgument("assemble_theorem4: Y has wrong shape");
    if (delta_bar < 0) throw InvalidArgument("assemble_theorem4: delta_bar must be >= 0");

    const Mat I = Mat::Identity(n, n);
    const Mat AmIE = (A - I) * v.E;
    const Mat BY = B * v.Y;
    const Mat psi11 = mirror_blocks(n, {
        {0, 0, AmIE + AmIE.transpose() + v.Qh - v.Rh},
        {0, 1, BY + v.Rh},
        {0, 3, BY},
        {1, 1, -2.0 * v.Rh + mu * v.Upsh},
        {1, 2, v.Rh},
        {2, 2, -v.Rh - v.Qh},
        {3, 3, -v.Upsh},
    });
    Mat F = Mat::Zero(n, 4 * n);
    F.block(0, 0, n, n) = AmIE;
    F.block(0, n, n, n) = BY;
    F.block(0, 3 * n, n, n) = BY;
    return finish(psi11, F, I, I, delta_bar, -v.E, v.Rh - 2.0 * v.E);
}

double max_eigenvalue(const Mat& M) {
    if (M.size() == 0) return -std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

namespace {

void require_symmetric(const Mat& M, double tol) {
    if (M.rows() != M.cols()) throw InvalidArgument("check_negative_definite: matrix must be square");
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if (!linalg::is_symmetric(M, tol * scale)) throw InvalidArgument("check_negative_definite: matrix is not symmetric");
}

}  // namespace

bool check_negative_definite(const Mat& M, double tol) {
    require_symmetric(M, tol);
    if (M.size() == 0) return true;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    const Vec& ev = es.eigenvalues();
    const double norm = ev.cwiseAbs().maxCoeff();
    return ev.maxCoeff() < -tol * norm;
}

bool check_negative_definite_factorization(const Mat& M, double tol) {
    require_symmetric(M, tol);
    if (M.size() == 0) return true;
    const Mat S = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
    if (norm == 0.0) return false;
    Eigen::LLT<Mat> llt(-S - tol * norm * Mat::Identity(S.rows(), S.cols()));
    return llt.info() == Eigen::Success;
}

namespace {

std::vector<Mat> symmetric_basis(Eigen::Index n) {
    std::vector<Mat> basis;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            Mat m = Mat::Zero(n, n);
            m(i, j) = m(j, i) = 1.0;
            basis.push_back(std::move(m));
        }
    return basis;
}

Mat from_coords(const std::vector<Mat>& basis, const Vec& x, Eigen::Index offset) {
    Mat m = Mat::Zero(basis.front().rows(), basis.front().cols());
    for (std::size_t k = 0; k < basis.size(); ++k) m += x(offset + static_cast<Eigen::Index>(k)) * basis[k];
    return m;
}

/// Affine matrix function M(x) = M0 + sum x_i M_i restricted to a . x = b.
struct BarrierOutcome {
    Vec x;
    int iterations = 0;
    bool certified = false;
};

/// Minimises t subject to M(x) <= t I by damped Newton steps on c t - logdet(t I - M(x)),
/// increasing c whenever the Newton decrement is small. `certify` decides success.
BarrierOutcome barrier_search(const std::function<Mat(const Vec&)>& assemble, const Vec& x0, const Vec& constraint,
                              int budget, const std::function<bool(const Vec&)>& certify) {
    const Eigen::Index nv = x0.size();
    const Mat M0 = assemble(Vec::Zero(nv));
    std::vector<Mat> Mi(static_cast<std::size_t>(nv));
    for (Eigen::Index i = 0; i < nv; ++i) Mi[static_cast<std::size_t>(i)] = assemble(Vec::Unit(nv, i)) - M0;

    // Null space of the normalisation constraint.
    Mat Z;
    {
        Eigen::JacobiSVD<Mat> svd(constraint.transpose(), Eigen::ComputeFullV);
        Z = svd.matrixV().rightCols(nv - 1);
    }
    const Eigen::Index nz = Z.cols();
    std::vector<Mat> Mz(static_cast<std::size_t>(nz));
    for (Eigen::Index j = 0; j < nz; ++j) {
        Mat acc = Mat::Zero(M0.rows(), M0.cols());
        for (Eigen::Index i = 0; i < nv; ++i)
            if (Z(i, j) != 0.0) acc += Z(i, j) * Mi[static_cast<std::size_t>(i)];
        Mz[static_cast<std::size_t>(j)] = std::move(acc);
    }
    Mat Mbase = M0;
    for (Eigen::Index i = 0; i < nv; ++i) Mbase += x0(i) * Mi[static_cast<std::size_t>(i)];

    const Eigen::Index N = M0.rows();
    auto M_of = [&](const Vec& z) {
        Mat m = Mbase;
        for (Eigen::Index j = 0; j < nz; ++j) m += z(j) * Mz[static_cast<std::size_t>(j)];
        return m;
    };
    auto spectrum = [](const Mat& m) {
        Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    };

    Vec z = Vec::Zero(nz);
    BarrierOutcome out;
    out.x = x0;
    if (certify(x0)) {
        out.certified = true;
        return out;
    }
    const Vec ev0 = spectrum(Mbase);
    double t = ev0.maxCoeff() + 1.0;
    const double scale = std::max(1.0, ev0.cwiseAbs().maxCoeff());
    double c = 1.0;

    auto phi = [&](const Vec& zz, double tt) {
        const Mat S = tt * Mat::Identity(N, N) - M_of(zz);
        Eigen::LLT<Mat> llt(S);
        if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
        const Vec d = Mat(llt.matrixL()).diagonal();
        if ((d.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
        return c * tt - 2.0 * d.array().log().sum();
    };

    for (int it = 1; it <= budget; ++it) {
        out.iterations = it;
        const Mat S = t * Mat::Identity(N, N) - M_of(z);
        const Mat Si = S.llt().solve(Mat::Identity(N, N));
        // dS/dz_j = -Mz_j, dS/dt = I.
        std::vector<Mat> SdS(static_cast<std::size_t>(nz + 1));
        for (Eigen::Index j = 0; j < nz; ++j) SdS[static_cast<std::size_t>(j)] = -Si * Mz[static_cast<std::size_t>(j)];
        SdS[static_cast<std::size_t>(nz)] = Si;
        Vec g(nz + 1);
        Mat H(nz + 1, nz + 1);
        for (Eigen::Index a = 0; a <= nz; ++a) {
            g(a) = -SdS[static_cast<std::size_t>(a)].trace();
            for (Eigen::Index b = a; b <= nz; ++b) {
                const double h = (SdS[static_cast<std::size_t>(a)].array() *
                                  SdS[static_cast<std::size_t>(b)].transpose().array()).sum();
                H(a, b) = H(b, a) = h;
            }
        }
        g(nz) += c;
        // Directions that do not affect M (e.g. Y when B = 0) make H singular; a tiny ridge keeps the solve defined.
        const double ridge = 1e-12 * std::max(1.0, H.diagonal().maxCoeff());
        const Vec dx = -(H + ridge * Mat::Identity(nz + 1, nz + 1)).ldlt().solve(g);
        const double decrement = -g.dot(dx);

        double step = 1.0;
        const double p0 = phi(z, t);
        while (step > 1e-14 && phi(z + step * dx.head(nz), t + step * dx(nz)) > p0 - 0.25 * step * decrement) step *= 0.5;
        if (step > 1e-14) {
            z += step * dx.head(nz);
            t += step * dx(nz);
        }

        const Vec x = x0 + Z * z;
        if (certify(x)) {
            out.x = x;
            out.certified = true;
            return out;
        }
        out.x = x;
        if (!(decrement > 0.0) || decrement / 2.0 < 1e-8 || step <= 1e-14) {
            if (static_cast<double>(N) / c < 1e-12 * scale) break;
            c *= 10.0;
        }
    }
    return out;
}

bool spd_margin(const Mat& m, double tol) { return check_negative_definite(-m, tol); }

}  // namespace

Theorem4Result search_feasible_theorem4(const Mat& A, const Mat& B, double mu, int delta_bar, const SearchOptions& opts) {
    check_dims(A, B);
    if (opts.budget <= 0) throw InvalidArgument("search_feasible_theorem4: budget must be > 0");
    const Eigen::Index n = A.rows(), p = B.cols();
    const auto basis = symmetric_basis(n);
    const Eigen::Index ns = static_cast<Eigen::Index>(basis.size());
    const Eigen::Index nv = 4 * ns + p * n;

    auto unpack = [&](const Vec& x) {
        Theorem4Vars v;
        v.E = from_coords(basis, x, 0);
        v.Qh = from_coords(basis, x, ns);
        v.Rh = from_coords(basis, x, 2 * ns);
        v.Upsh = from_coords(basis, x, 3 * ns);
        v.Y = Eigen::Map<const Mat>(x.data() + 4 * ns, n, p).transpose();
        return v;
    };
    auto assemble = [&](const Vec& x) {
        const auto v = unpack(x);
        const Mat psi = assemble_theorem4(A, B, mu, delta_bar, v).full();
        const Eigen::Index m = psi.rows();
        Mat big = Mat::Zero(m + 4 * n, m + 4 * n);
        big.topLeftCorner(m, m) = psi;
        big.block(m, m, n, n) = -v.E;
        big.block(m + n, m + n, n, n) = -v.Qh;
        big.block(m + 2 * n, m + 2 * n, n, n) = -v.Rh;
        big.block(m + 3 * n, m + 3 * n, n, n) = -v.Upsh;
        return big;
    };
    auto certify = [&](const Vec& x) {
        const auto v = unpack(x);
        return spd_margin(v.E, opts.tol) && spd_margin(v.Qh, opts.tol) && spd_margin(v.Rh, opts.tol) &&
               spd_margin(v.Upsh, opts.tol) &&
               check_negative_definite(assemble_theorem4(A, B, mu, delta_bar, v).full(), opts.tol);
    };

    Vec x0 = Vec::Zero(nv), constraint = Vec::Zero(nv);
    const double init[4] = {1.0, 0.1, 0.5, 0.5};
    for (Eigen::Index k = 0; k < ns; ++k) {
        if (basis[static_cast<std::size_t>(k)].sum() != 1.0) continue;  // diagonal elements only
        for (int blk = 0; blk < 4; ++blk) x0(blk * ns + k) = init[blk];
        constraint(k) = 1.0;
    }

    const auto outcome = barrier_search(assemble, x0, constraint, opts.budget, certify);
    Theorem4Result r;
    r.iterations = outcome.iterations;
    r.vars = unpack(outcome.x);
    r.best_max_eig = max_eigenvalue(assemble_theorem4(A, B, mu, delta_bar, r.vars).full());
    r.feasible = outcome.certified;
    Eigen::FullPivLU<Mat> lu(r.vars.E);
    if (lu.isInvertible()) {
        r.K = r.vars.Y * lu.inverse();
        r.closed_loop_radius = linalg::spectral_radius(A + B * r.K);
    }
    std::ostringstream msg;
    if (r.feasible)
        msg << "certificate found after " << r.iterations << " Newton steps";
    else
        msg << "no certificate within budget; best max eigenvalue " << r.best_max_eig;
    r.message = msg.str();
    return r;
}

Theorem3Result search_feasible_theorem3(const Mat& A, const Mat& B, const Mat& K, double mu, int delta_bar,
                                        const SearchOptions& opts) {
    check_dims(A, B);
    if (opts.budget <= 0) throw InvalidArgument("search_feasible_theorem3: budget must be > 0");
    const Eigen::Index n = A.rows();
    const auto basis = symmetric_basis(n);
    const Eigen::Index ns = static_cast<Eigen::Index>(basis.size());
    const Eigen::Index nv = 4 * ns;

    auto unpack = [&](const Vec& x) {
        Theorem3Vars v;
        v.P = from_coords(basis, x, 0);
        v.R = from_coords(basis, x, ns);
        v.T = from_coords(basis, x, 2 * ns);
        v.Upsilon = from_coords(basis, x, 3 * ns);
        return v;
    };
    auto assemble = [&](const Vec& x) {
        const auto v = unpack(x);
        const Mat psi = assemble_theorem3(A, B, K, mu, delta_bar, v).full();
        const Eigen::Index m = psi.rows();
        Mat big = Mat::Zero(m + 4 * n, m + 4 * n);
        big.topLeftCorner(m, m) = psi;
        big.block(m, m, n, n) = -v.P;
        big.block(m + n, m + n, n, n) = -v.R;
        big.block(m + 2 * n, m + 2 * n, n, n) = -v.T;
        big.block(m + 3 * n, m + 3 * n, n, n) = -v.Upsilon;
        return big;
    };
    auto certify = [&](const Vec& x) {
        const auto v = unpack(x);
        return spd_margin(v.P, opts.tol) && spd_margin(v.R, opts.tol) && spd_margin(v.T, opts.tol) &&
               spd_margin(v.Upsilon, opts.tol) &&
               check_negative_definite(assemble_theorem3(A, B, K, mu, delta_bar, v).full(), opts.tol);
    };

    Vec x0 = Vec::Zero(nv), constraint = Vec::Zero(nv);
    const double init[4] = {1.0, 0.1, 0.5, 0.5};
    for (Eigen::Index k = 0; k < ns; ++k) {
        if (basis[static_cast<std::size_t>(k)].sum() != 1.0) continue;
        for (int blk = 0; blk < 4; ++blk) x0(blk * ns + k) = init[blk];
        constraint(k) = 1.0;
    }
    const auto outcome = barrier_search(assemble, x0, constraint, opts.budget, certify);
    Theorem3Result r;
    r.iterations = outcome.iterations;
    r.vars = unpack(outcome.x);
    r.best_max_eig = max_eigenvalue(assemble_theorem3(A, B, K, mu, delta_bar, r.vars).full());
    r.feasible = outcome.certified;
    std::ostringstream msg;
    if (r.feasible)
        msg << "certificate found after " << r.iterations << " Newton steps";
    else
        msg << "no certificate within budget; best max eigenvalue " << r.best_max_eig;
    r.message = msg.str();
    return r;
}

LkfReport lkf_evaluate(const LkfTrace& trace, const Mat& P, const Mat& R, const Mat& T, int delta_bar,
                       const LmiBlocks* psi, double slack) {
    if (delta_bar < 0) throw InvalidArgument("lkf_evaluate: delta_bar must be >= 0");
    const auto& x = trace.states;
    const long N = static_cast<long>(x.size());
    if (N <= delta_bar) throw InvalidArgument("lkf_evaluate: trace must be longer than delta_bar");
    if (!trace.delays.empty() && static_cast<long>(trace.delays.size()) < N)
        throw InvalidArgument("lkf_evaluate: delay series shorter than the trace");
    if (!trace.errors.empty() && static_cast<long>(trace.errors.size()) < N)
        throw InvalidArgument("lkf_evaluate: error series shorter than the trace");
    const Eigen::Index n = x.front().size();

    auto zeta = [&](long j) -> Vec { return x[static_cast<std::size_t>(j + 1)] - x[static_cast<std::size_t>(j)]; };
    auto at = [&](long j) -> const Vec& { return x[static_cast<std::size_t>(j)]; };
    const double db = static_cast<double>(delta_bar);

    LkfReport rep;
    const Mat schur = psi ? psi->schur() : Mat();
    for (long k = delta_bar; k < N; ++k) {
        LkfComponents c;
        c.step = k;
        c.v1 = at(k).dot(P * at(k));
        for (long j = k - delta_bar; j <= k - 1; ++j) c.v2 += at(j).dot(R * at(j));
        double v3 = 0.0;
        for (long s = -delta_bar + 1; s <= 0; ++s)
            for (long j = k + s - 1; j <= k - 1; ++j) {
                const Vec zj = zeta(j);
                v3 += zj.dot(T * zj);
            }
        c.v3 = db * v3;

        const int d = trace.delays.empty() ? 0 : trace.delays[static_cast<std::size_t>(k)];
        const long kd = std::max(0L, k - d);
        c.col_theta.resize(4 * n);
        c.col_theta << at(k), at(kd), at(k - delta_bar),
            (trace.errors.empty() ? Vec::Zero(n) : trace.errors[static_cast<std::size_t>(k)]);
        if (psi) c.bound = c.col_theta.dot(schur * c.col_theta);
        rep.steps.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < rep.steps.size(); ++i) {
        auto& c = rep.steps[i];
        if (i + 1 < rep.steps.size()) {
            c.delta_v = rep.steps[i + 1].total() - c.total();
            const bool nonzero = c.col_theta.squaredNorm() > 0.0;
            if (nonzero && c.delta_v >= 0.0) rep.nonnegative_steps.push_back(c.step);
            if (psi && c.delta_v > c.bound + slack) rep.bound_exceeded.push_back(c.step);
        } else {
            c.delta_v = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return rep;
}

}  // namespace securelat::synthesis
