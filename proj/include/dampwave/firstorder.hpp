#pragma once

#include <optional>
#include <vector>

#include "dampwave/freeze.hpp"
#include "dampwave/integrate.hpp"
#include "dampwave/model.hpp"
#include "dampwave/spectra.hpp"

namespace dampwave {

struct PositiveSqrt {
    Mat N;
    Mat S;          // eigenvectors of M^-1 A, columns
    Vec lambda;     // eigenvalues of N, decreasing
    double cond_S;  // 2-norm condition number
};

// N = S diag(lambda^(1/2)) S^-1 with N^2 = M^-1 A.
PositiveSqrt sqrt_positive_diagonalizable(const Mat& M, const Mat& A);

// U = (u, u_t + N u_x, u_t - N u_x + c u) turns the second-order problem into
// U_t = E U_x + F(U), E = diag(N, N, -N).
class FirstOrderSystem {
public:
    FirstOrderSystem(const ModelSpec& model, double c);

    const ModelSpec& model() const { return model_; }
    int m() const { return model_.m(); }
    double c() const { return c_; }
    const Mat& N() const { return sqrt_.N; }
    const Mat& Ninv() const { return Ninv_; }
    const Vec& lambda() const { return sqrt_.lambda; }
    const Mat& E() const { return E_; }
    // diag(S, S, S); T^-1 E T = diag(Lambda, Lambda, -Lambda).
    const Mat& T() const { return T_; }
    double cond_T() const { return sqrt_.cond_S; }

    // Second-order arguments (u, u_x, u_t) encoded by a point U.
    struct Args {
        Vec u, ux, ut;
    };
    Args args(const Vec& U) const;
    Vec F(const Vec& U) const;
    // DF at the point whose second-order arguments are (u, ux, ut).
    Mat Z(const Vec& u, const Vec& ux, const Vec& ut) const;
    Mat Z(const Vec& U) const;
    // Limit matrix at an asymptotic state (v, 0, 0).
    Mat Z_limit(Side side) const;

private:
    ModelSpec model_;
    double c_;
    PositiveSqrt sqrt_;
    Mat Ninv_, E_, T_;
};

// c = beta + 1 with beta the spectral gap of the dispersion set at speed mu.
double default_shift(const ModelSpec& model, double mu);

// V1 = v, V2 = vdot + (N - mu) v_xi, V3 = vdot - (N + mu) v_xi + c v, with v_xi = d1(v).
GridFunction lift_state(const FirstOrderSystem& sys, const GridFunction& v, const GridFunction& vdot, double mu);

struct ProjectedState {
    GridFunction v, vdot, v_xi;
};
ProjectedState project_state(const FirstOrderSystem& sys, const GridFunction& V, double mu);

// ||(E + mu) d1(V) + F(V)|| for V lifted from (v, 0, mu).
double first_order_tw_residual(const FirstOrderSystem& sys, const GridFunction& v, double mu);

// Eigenvalues of i omega (E + mu) + Z_side, sorted by (re, im).
CVec first_order_symbol_eigs(const FirstOrderSystem& sys, double mu, double omega, Side side);

// Distance after matching between the eigenvalues above and the roots of the
// second-order symbol together with -c + i omega (lambda_j + mu).
double union_defect(const FirstOrderSystem& sys, double mu, double omega, Side side);

// max |T1 P_1st(lambda, omega) - R(lambda, omega) T2(lambda, omega)| at the limit Z_side.
double symbol_factorization_defect(const FirstOrderSystem& sys, double mu, cplx lambda, double omega, Side side);

struct FirstOrderSample {
    double t;
    GridFunction V;
    double mu, gamma;
};

struct FirstOrderRecord {
    double t, mu, gamma, norm_Vt, phase_residual;
};

struct FirstOrderTrajectory {
    std::vector<FirstOrderSample> samples;
    std::vector<FirstOrderRecord> records;  // every step, including t = 0
};

// BDF2 (trapezoidal start) on V_t = (E + mu) d1(V) + F(V). Without a template the frame
// is fixed (mu = 0); with one, mu is the unknown of <V1 - vhat, vhat_xi> = 0.
FirstOrderTrajectory run_first_order(const FirstOrderSystem& sys, const GridFunction& V0,
                                     const TimeStepperConfig& cfg, const std::optional<Template>& tmpl = std::nullopt);

struct WFunctionals {
    std::vector<double> t;
    std::vector<double> w2, w3;  // discrete L2 norms
};
// W2 = V2 - V1_t - (N - mu) d1(V1), W3 = V3 - V1_t + (N + mu) d1(V1) - c V1, with V1_t
// from central differences of neighbouring samples (interior samples only).
WFunctionals w_functionals(const FirstOrderSystem& sys, const FirstOrderTrajectory& traj);

// CSV t,xi,V1..V3m over all samples.
void write_csv(std::ostream& os, const FirstOrderTrajectory& traj);

}  // namespace dampwave
