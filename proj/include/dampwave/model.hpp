#pragma once

#include <functional>
#include <optional>
#include <string>

#include "dampwave/grid.hpp"
#include "dampwave/types.hpp"

namespace dampwave {

using CVecRef = Eigen::Ref<const Vec>;
using VecRef = Eigen::Ref<Vec>;
using MatRef = Eigen::Ref<Mat>;

// f(u, v, w) written into out.
using Field = std::function<void(CVecRef u, CVecRef v, CVecRef w, VecRef out)>;
// Partial Jacobians of f with respect to its three m-blocks.
using FieldJacobian = std::function<void(CVecRef u, CVecRef v, CVecRef w, MatRef d1, MatRef d2, MatRef d3)>;

// f(u, v, w) = g(u) + C v - B w
struct Semilinear {
    std::function<void(CVecRef u, VecRef out)> g;
    std::function<void(CVecRef u, MatRef out)> dg;
    Mat B;
    Mat C;
};

struct AsymptoticStates {
    Vec v_minus;
    Vec v_plus;
};

struct PointJacobians {
    Mat d1, d2, d3;
};

// Nodewise Jacobians on a grid: column block i (m x m) belongs to node i.
struct GridJacobians {
    Mat d1, d2, d3;
};

class ModelSpec {
public:
    static constexpr double exact_root_tol = 1e-8;

    static ModelSpec semilinear(std::string name, Mat M, Mat A, Semilinear parts,
                                std::optional<AsymptoticStates> states = std::nullopt,
                                double tol_root = exact_root_tol);
    static ModelSpec general(std::string name, Mat M, Mat A, Field f, FieldJacobian df,
                             std::optional<AsymptoticStates> states = std::nullopt,
                             double tol_root = exact_root_tol);

    const std::string& name() const { return name_; }
    int m() const { return int(M_.rows()); }
    const Mat& M() const { return M_; }
    const Mat& A() const { return A_; }
    const Mat& Minv() const { return Minv_; }
    const std::optional<Semilinear>& semilinear_parts() const { return semi_; }
    const std::optional<AsymptoticStates>& states() const { return states_; }
    const AsymptoticStates& require_states() const;

    void f(CVecRef u, CVecRef v, CVecRef w, VecRef out) const { f_(u, v, w, out); }
    Vec f(const Vec& u, const Vec& v, const Vec& w) const;
    PointJacobians jacobians(const Vec& u, const Vec& v, const Vec& w) const;

    // f and its Jacobians applied node by node to node-major grid vectors.
    Vec f_nodes(const Vec& u, const Vec& v, const Vec& w) const;
    GridJacobians jacobians_nodes(const Vec& u, const Vec& v, const Vec& w) const;

private:
    ModelSpec() = default;
    void validate(double tol_root);

    std::string name_;
    Mat M_, A_, Minv_;
    Field f_;
    FieldJacobian df_;
    std::optional<Semilinear> semi_;
    std::optional<AsymptoticStates> states_;
};

// Block-diagonal sparse matrix from a m x (mN) array of node blocks.
SpMat block_diagonal(const Mat& blocks);
// kron(I_N, K) for a constant m x m block.
SpMat block_diagonal(const Mat& K, int N);

// ---- built-in models ----

ModelSpec nagumo_wave_model(double eps, double b);

struct NagumoFront {
    double eps, b;
    double k;
    double mu;      // speed of the damped-wave front
    double c_star;  // parabolic speed, mu = c_star / k
    double profile(double xi) const;
    double derivative(double xi) const;
    double second_derivative(double xi) const;
};

// Valid for eps >= 0 (eps = 0 is the parabolic limit).
NagumoFront nagumo_exact_front(double eps, double b);

struct FhnParams {
    double eps = 1e-2;
    double rho = 0.1;
    double a = 0.7;
    double b = 0.8;
    double phi = 0.08;
    double c_star = -0.7892;
};

struct PolishedState {
    Vec raw;
    Vec polished;
    double raw_residual = 0.0;
    double polished_residual = 0.0;
};

struct FhnStates {
    PolishedState minus, plus;
};

// A22 = (rho + c^2 eps)/(1 + c^2 eps)
double fhn_a22(const FhnParams& p);
ModelSpec fhn_wave_model(const FhnParams& p, std::optional<AsymptoticStates> states = std::nullopt);

// Parameter sets and rest-state guesses of the standard pulse and front examples.
FhnParams fhn_pulse_params(double eps = 1e-2);
FhnParams fhn_front_params(double eps = 1e-2);
AsymptoticStates fhn_pulse_state_guess();
AsymptoticStates fhn_front_state_guess();

// Newton polish of guessed roots of f(v, 0, 0).
PolishedState polish_state(const ModelSpec& model, const Vec& guess, double tol = 1e-14, int max_iter = 30);
FhnStates polish_fhn_states(const FhnParams& p, const AsymptoticStates& guess);

// Pulse/front model with polished rest states.
ModelSpec fhn_pulse_model(double eps = 1e-2);
ModelSpec fhn_front_model(double eps = 1e-2);

// Semilinear model with g(u) = L u + sum_k P(c, k) u_c^k, k = 0..3, componentwise.
struct PolynomialModelParams {
    Mat M, A, B, C, L;
    Mat poly;  // m x 4
    std::optional<AsymptoticStates> states;
};
ModelSpec polynomial_model(const std::string& name, const PolynomialModelParams& p);

// ---- traveling wave residual ----

struct TravelingWaveCandidate {
    GridFunction profile;
    double speed = 0.0;
};

// Nodewise (A - mu^2 M) v'' + f(v, v', -mu v') with grid stencils.
GridFunction tw_defect(const ModelSpec& model, const TravelingWaveCandidate& c);
double tw_residual(const ModelSpec& model, const Grid1D& grid, const TravelingWaveCandidate& c);

}  // namespace dampwave
