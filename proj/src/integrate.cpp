#include "dampwave/integrate.hpp"

#include <cmath>
#include <string>
#include <tuple>

#include "dampwave/errors.hpp"

namespace dampwave {

namespace {

using ConstNodeMap = Eigen::Map<const Mat>;
using NodeMap = Eigen::Map<Mat>;

}  // namespace

ComovingOperator::ComovingOperator(const ModelSpec& model, const Grid1D& grid)
    : model_(model),
      grid_(grid),
      D1_(d1_matrix(grid, model.m())),
      D2_(d2_matrix(grid, model.m())),
      Mb_(block_diagonal(model.M(), grid.N())),
      W_(weight_vector(grid, model.m()))
{
}

Vec ComovingOperator::apply(const Vec& v, const Vec& w, double mu1, double mu2) const
{
    const int m = model_.m();
    const int N = grid_.N();
    const Vec vx = D1_ * v;
    const Vec vxx = D2_ * v;
    const Vec wx = D1_ * w;
    Vec out = model_.f_nodes(v, vx, w - mu1 * vx);
    const Mat K = model_.A() - mu1 * mu1 * model_.M();
    NodeMap o(out.data(), m, N);
    o.noalias() += K * ConstNodeMap(vxx.data(), m, N);
    o.noalias() += model_.M() * (2.0 * mu1 * ConstNodeMap(wx.data(), m, N) + mu2 * ConstNodeMap(vx.data(), m, N));
    return out;
}

ComovingOperator::Linearization ComovingOperator::linearize(const Vec& v, const Vec& w, double mu1, double mu2) const
{
    const int N = grid_.N();
    const Vec vx = D1_ * v;
    const GridJacobians J = model_.jacobians_nodes(v, vx, w - mu1 * vx);
    const SpMat J1 = block_diagonal(J.d1);
    const SpMat J2 = block_diagonal(J.d2);
    const SpMat J3 = block_diagonal(J.d3);
    const SpMat K = block_diagonal(model_.A() - mu1 * mu1 * model_.M(), N);

    Linearization L;
    L.dv = K * D2_ + J1 + (J2 + mu2 * Mb_ - mu1 * J3) * D1_;
    L.dw = 2.0 * mu1 * Mb_ * D1_ + J3;
    L.dmu1 = -2.0 * mu1 * (Mb_ * (D2_ * v)) + 2.0 * (Mb_ * (D1_ * w)) - J3 * vx;
    L.dmu2 = Mb_ * vx;
    return L;
}

Vec ComovingOperator::apply_Minv(const Vec& x) const
{
    Vec out(x.size());
    NodeMap(out.data(), m(), grid_.N()).noalias() = model_.Minv() * ConstNodeMap(x.data(), m(), grid_.N());
    return out;
}

int TimeStepperConfig::steps() const
{
    const double n = T / dt;
    const double r = std::round(n);
    if (std::abs(n - r) > 1e-9 * std::max(1.0, n)) throw InvalidArgument("T must be an integer multiple of dt");
    return static_cast<int>(r);
}

void TimeStepperConfig::validate() const
{
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    if (!(T >= 0.0)) throw InvalidArgument("T must be nonnegative");
    if (!(newton_tol > 0.0)) throw InvalidArgument("newton_tol must be positive");
    if (newton_max < 1) throw InvalidArgument("newton_max must be at least 1");
    if (sample_every < 1) throw InvalidArgument("sample_every must be at least 1");
    (void)steps();
}

std::pair<GridFunction, GridFunction> rhs_cauchy(const ModelSpec& model, const Grid1D& grid,
                                                 const SecondOrderState& state)
{
    check_same_layout(state.v.grid, state.v.m, grid, model.m());
    check_same_layout(state.vdot.grid, state.vdot.m, grid, model.m());
    ComovingOperator op(model, grid);
    GridFunction acc(grid, model.m(), op.apply_Minv(op.apply(state.v.values, state.vdot.values, 0.0, 0.0)));
    return {state.vdot, acc};
}

CauchyStepper::CauchyStepper(const ModelSpec& model, const Grid1D& grid, TimeStepperConfig cfg)
    : op_(model, grid), cfg_(cfg)
{
    cfg_.validate();
}

SecondOrderState CauchyStepper::step_euler(const SecondOrderState& curr)
{
    return step(BdfFormula::euler(cfg_.dt), curr, nullptr);
}

SecondOrderState CauchyStepper::step_bdf2(const SecondOrderState& prev, const SecondOrderState& curr)
{
    return step(BdfFormula::bdf2(cfg_.dt), curr, &prev);
}

SecondOrderState CauchyStepper::step(const BdfFormula& bdf, const SecondOrderState& curr,
                                     const SecondOrderState* prev)
{
    const Vec& vn = curr.v.values;
    const Vec& wn = curr.vdot.values;
    const Vec hv = prev ? bdf.history(vn, prev->v.values) : vn;
    const Vec hw = prev ? bdf.history(wn, prev->vdot.values) : wn;
    const double beta = bdf.beta;
    const double t_new = curr.t + cfg_.dt;

    Vec w = prev ? Vec(2.0 * wn - prev->vdot.values) : wn;
    double res = 0.0;
    for (int it = 0;; ++it) {
        const Vec v = hv + beta * w;
        const Vec R = op_.Mb() * (w - hw) - beta * op_.apply(v, w, 0.0, 0.0);
        res = R.lpNorm<Eigen::Infinity>();
        if (!std::isfinite(res)) throw NewtonDiverged(t_new, res, "Newton produced a non-finite residual");
        if (res <= cfg_.newton_tol) {
            last_iterations_ = it;
            SecondOrderState out{curr.v, curr.vdot, t_new};
            out.v.values = v;
            out.vdot.values = w;
            return out;
        }
        if (it == cfg_.newton_max)
            throw NewtonDiverged(t_new, res,
                                 "Newton did not converge at t=" + std::to_string(t_new) +
                                     " (residual " + std::to_string(res) + ")");
        const auto L = op_.linearize(v, w, 0.0, 0.0);
        const SpMat J = op_.Mb() - beta * (beta * L.dv + L.dw);
        solver_.factorize(J);
        w -= solver_.solve(R);
    }
}

SecondOrderState step_bdf2(const ModelSpec& model, const Grid1D& grid, const SecondOrderState& prev,
                           const SecondOrderState& curr, const TimeStepperConfig& cfg)
{
    CauchyStepper s(model, grid, cfg);
    return s.step_bdf2(prev, curr);
}

SecondOrderState step_implicit_euler(const ModelSpec& model, const Grid1D& grid, const SecondOrderState& curr,
                                     const TimeStepperConfig& cfg)
{
    CauchyStepper s(model, grid, cfg);
    return s.step_euler(curr);
}

double level_crossing(const GridFunction& u, double level)
{
    for (int i = 0; i + 1 < u.N(); ++i) {
        const double a = u.at(i, 0) - level;
        const double b = u.at(i + 1, 0) - level;
        if (a == 0.0) return u.grid.node(i);
        if (a * b < 0.0) {
            const double x0 = u.grid.node(i);
            return x0 + u.grid.dx() * a / (a - b);
        }
    }
    if (u.at(u.N() - 1, 0) == level) return u.grid.node(u.N() - 1);
    return std::numeric_limits<double>::quiet_NaN();
}

double boundary_hit_time(const CauchyTrajectory& traj, double level)
{
    for (const auto& r : traj.summary)
        if (r.left_value >= level) return r.t;
    return std::numeric_limits<double>::quiet_NaN();
}

double front_arrival_time(const CauchyTrajectory& traj, double R)
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto fit = [&](double lo, double hi) {
        double n = 0, st = 0, sx = 0, stt = 0, stx = 0;
        for (const auto& r : traj.summary) {
            const double x = r.level_crossing_x;
            if (!(x >= lo && x <= hi)) continue;
            n += 1;
            st += r.t;
            sx += x;
            stt += r.t * r.t;
            stx += r.t * x;
        }
        const double den = n * stt - st * st;
        if (n < 2 || den == 0.0) return std::pair{nan, nan};
        const double slope = (n * stx - st * sx) / den;
        return std::pair{(sx - slope * st) / n, slope};
    };
    auto [a, s] = fit(-0.8 * R, -0.2 * R);
    if (std::isfinite(s) && s < 0.0) return (-R - a) / s;
    std::tie(a, s) = fit(0.2 * R, 0.8 * R);
    if (std::isfinite(s) && s > 0.0) return (R - a) / s;
    return nan;
}

CauchyTrajectory run_cauchy(const ModelSpec& model, const Grid1D& grid, const GridFunction& u0,
                            const GridFunction& v0, const TimeStepperConfig& cfg)
{
    check_same_layout(u0.grid, u0.m, grid, model.m());
    check_same_layout(v0.grid, v0.m, grid, model.m());
    CauchyStepper stepper(model, grid, cfg);
    const int n = cfg.steps();

    CauchyTrajectory traj;
    auto record = [&](const SecondOrderState& s) {
        traj.summary.push_back({s.t, norm(s.vdot), level_crossing(s.v, cfg.level), s.v.at(0, 0)});
    };

    SecondOrderState prev{u0, v0, 0.0};
    record(prev);
    traj.samples.push_back(prev);
    if (n == 0) return traj;

    SecondOrderState curr = stepper.step_euler(prev);
    for (int k = 1;; ++k) {
        record(curr);
        if (k % cfg.sample_every == 0 || k == n) traj.samples.push_back(curr);
        if (k == n) break;
        SecondOrderState next = stepper.step_bdf2(prev, curr);
        prev = std::move(curr);
        curr = std::move(next);
    }
    return traj;
}

}  // namespace dampwave
