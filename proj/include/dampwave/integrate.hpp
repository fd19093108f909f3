#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "dampwave/grid.hpp"
#include "dampwave/model.hpp"
#include "dampwave/newton.hpp"

namespace dampwave {

// Right-hand side of the second-order equation in a frame moving with speed mu1
// and acceleration mu2:
//   K(v, w) = (A - mu1^2 M) v'' + 2 mu1 M w' + mu2 M v' + f(v, v', w - mu1 v'),
// so that M v_tt = K(v, v_t). mu1 = mu2 = 0 gives the lab frame.
class ComovingOperator {
public:
    ComovingOperator(const ModelSpec& model, const Grid1D& grid);

    Vec apply(const Vec& v, const Vec& w, double mu1, double mu2) const;

    struct Linearization {
        SpMat dv, dw;
        Vec dmu1, dmu2;
    };
    Linearization linearize(const Vec& v, const Vec& w, double mu1, double mu2) const;

    const ModelSpec& model() const { return model_; }
    const Grid1D& grid() const { return grid_; }
    int m() const { return model_.m(); }
    Eigen::Index size() const { return Eigen::Index(grid_.N()) * model_.m(); }
    const SpMat& D1() const { return D1_; }
    const SpMat& D2() const { return D2_; }
    const SpMat& Mb() const { return Mb_; }
    const Vec& weights() const { return W_; }
    // Nodewise M^-1.
    Vec apply_Minv(const Vec& x) const;
    SpMat Minv_block() const { return block_diagonal(model_.Minv(), grid_.N()); }

private:
    ModelSpec model_;
    Grid1D grid_;
    SpMat D1_, D2_, Mb_;
    Vec W_;
};

struct SecondOrderState {
    GridFunction v;
    GridFunction vdot;
    double t = 0.0;
};

struct TimeStepperConfig {
    double dt = 0.1;
    double T = 150.0;
    double newton_tol = 1e-10;
    int newton_max = 12;
    int sample_every = 10;
    double level = 0.5;  // first-component level tracked by the summary

    int steps() const;  // T/dt, which has to be an integer
    void validate() const;
};

// y_{n+1} = history + beta * y'_{n+1}
struct BdfFormula {
    int order;
    double beta;
    template <class T>
    T history(const T& yn, const T& ynm1) const
    {
        if (order == 1) return yn;
        return (4.0 * yn - ynm1) / 3.0;
    }
    static BdfFormula euler(double dt) { return {1, dt}; }
    static BdfFormula bdf2(double dt) { return {2, 2.0 * dt / 3.0}; }
};

// (v_t, M^-1 (A v_xx + f(v, v_x, vdot)))
std::pair<GridFunction, GridFunction> rhs_cauchy(const ModelSpec& model, const Grid1D& grid,
                                                 const SecondOrderState& state);

// Implicit BDF stepping of the lab-frame problem. The unknown of the Newton
// iteration is the new velocity only; the new position follows from the BDF formula.
class CauchyStepper {
public:
    CauchyStepper(const ModelSpec& model, const Grid1D& grid, TimeStepperConfig cfg);

    SecondOrderState step_euler(const SecondOrderState& curr);
    SecondOrderState step_bdf2(const SecondOrderState& prev, const SecondOrderState& curr);
    int last_iterations() const { return last_iterations_; }

private:
    SecondOrderState step(const BdfFormula& bdf, const SecondOrderState& curr, const SecondOrderState* prev);

    ComovingOperator op_;
    TimeStepperConfig cfg_;
    BorderedSolver solver_;
    int last_iterations_ = 0;
};

SecondOrderState step_bdf2(const ModelSpec& model, const Grid1D& grid, const SecondOrderState& prev,
                           const SecondOrderState& curr, const TimeStepperConfig& cfg);
SecondOrderState step_implicit_euler(const ModelSpec& model, const Grid1D& grid, const SecondOrderState& curr,
                                     const TimeStepperConfig& cfg);

struct CauchyRecord {
    double t;
    double norm_ut;
    double level_crossing_x;  // NaN when the first component does not cross the level
    double left_value;        // first component at the left end
};

struct CauchyTrajectory {
    std::vector<SecondOrderState> samples;
    std::vector<CauchyRecord> summary;  // one per step, including t = 0
};

CauchyTrajectory run_cauchy(const ModelSpec& model, const Grid1D& grid, const GridFunction& u0,
                            const GridFunction& v0, const TimeStepperConfig& cfg);

// First x where the first component crosses the level (linear interpolation).
double level_crossing(const GridFunction& u, double level);

// First recorded t with u(-R, t) >= level; NaN if never.
double boundary_hit_time(const CauchyTrajectory& traj, double level);

// Time at which the tracked level crossing, fitted by a line while it lies in
// the middle part [-0.8R, -0.2R] or [0.2R, 0.8R] of the domain, reaches the
// boundary it moves towards. Ignores the acceleration caused by the wall.
// NaN if fewer than two crossings fall into the window or the front is at rest.
double front_arrival_time(const CauchyTrajectory& traj, double R);

}  // namespace dampwave
