#pragma once

#include "securelat/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace securelat::synthesis {

struct Theorem3Vars {
    Mat P, R, T, Upsilon;
};

struct Theorem4Vars {
    Mat E, Qh, Rh, Upsh, Y;
};

struct LmiBlocks {
    Mat block_Psi11;  // 4n x 4n
    Mat block_Psi12;  // 4n x 2n
    Mat block_Psi22;  // 2n x 2n
    Mat row_F;        // n x 4n

    /// [[Psi11, Psi12], [Psi12', Psi22]]
    Mat full() const;
    /// Psi11 - Psi12 Psi22^-1 Psi12' (the 4n x 4n quadratic form bounding the LKF increment).
    Mat schur() const;
};

/// Constant part of the delay LMI; the -kappa sgn(S) entry of the F row is left to the LKF slack.
LmiBlocks assemble_theorem3(const Mat& A, const Mat& B, const Mat& K, double mu, int delta_bar, const Theorem3Vars& v);

LmiBlocks assemble_theorem4(const Mat& A, const Mat& B, double mu, int delta_bar, const Theorem4Vars& v);

inline constexpr double kDefiniteTol = 1e-9;

/// All eigenvalues below -tol * ||M||_2. Throws on a non-symmetric argument.
bool check_negative_definite(const Mat& M, double tol = kDefiniteTol);

/// Same test through a Cholesky factorization of -M - tol ||M|| I.
bool check_negative_definite_factorization(const Mat& M, double tol = kDefiniteTol);

double max_eigenvalue(const Mat& M);

struct SearchOptions {
    int budget = 400;  // Newton iterations
    double tol = kDefiniteTol;
};

struct Theorem4Result {
    bool feasible = false;
    int iterations = 0;
    double best_max_eig = 0.0;  // largest eigenvalue of the assembled Psi at the returned point
    Theorem4Vars vars;
    Mat K;
    double closed_loop_radius = 0.0;
    std::string message;
};

/// Barrier path-following on blkdiag(Psi, -E, -Qh, -Rh, -Upsh) <= t I with trace(E) = n.
/// Returns a certificate that re-verifies, or an infeasibility report with the best eigenvalue reached.
Theorem4Result search_feasible_theorem4(const Mat& A, const Mat& B, double mu, int delta_bar,
                                        const SearchOptions& opts = {});

struct Theorem3Result {
    bool feasible = false;
    int iterations = 0;
    double best_max_eig = 0.0;
    Theorem3Vars vars;
    std::string message;
};

/// Same search for fixed K over (P, R, T, Upsilon) with trace(P) = n.
Theorem3Result search_feasible_theorem3(const Mat& A, const Mat& B, const Mat& K, double mu, int delta_bar,
                                        const SearchOptions& opts = {});

struct LkfComponents {
    double v1 = 0.0, v2 = 0.0, v3 = 0.0;
    double delta_v = 0.0;  // V(k+1) - V(k); NaN on the last evaluated step
    double bound = 0.0;    // theta' schur(Psi) theta
    Vec col_theta;
    long step = 0;

    double total() const { return v1 + v2 + v3; }
};

struct LkfTrace {
    std::vector<Vec> states;     // x(0..N-1)
    std::vector<int> delays;     // delta(k); empty means 0
    std::vector<Vec> errors;     // e(k); empty means 0
};

struct LkfReport {
    std::vector<LkfComponents> steps;
    std::vector<long> nonnegative_steps;  // steps with delta_v >= 0 and theta != 0
    std::vector<long> bound_exceeded;     // steps with delta_v > bound + slack
};

/// Evaluates the three LKF terms from step delta_bar on; `psi` (optional) supplies the bounding form.
LkfReport lkf_evaluate(const LkfTrace& trace, const Mat& P, const Mat& R, const Mat& T, int delta_bar,
                       const LmiBlocks* psi = nullptr, double slack = 0.0);

}  // namespace securelat::synthesis
