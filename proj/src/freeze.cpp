#include "dampwave/freeze.hpp"

#include <cmath>

#include "dampwave/errors.hpp"

namespace dampwave {

std::string to_string(PhaseKind k)
{
    switch (k) {
    case PhaseKind::Fix3: return "fix3";
    case PhaseKind::Fix2: return "fix2";
    case PhaseKind::Fix1: return "fix1";
    case PhaseKind::Orth2: return "orth2";
    case PhaseKind::Orth1: return "orth1";
    }
    return "?";
}

PhaseKind phase_kind_from_string(const std::string& s)
{
    for (PhaseKind k : {PhaseKind::Fix3, PhaseKind::Fix2, PhaseKind::Fix1, PhaseKind::Orth2, PhaseKind::Orth1})
        if (to_string(k) == s) return k;
    throw InvalidArgument("unknown phase condition '" + s + "'");
}

bool needs_template(PhaseKind k)
{
    return k == PhaseKind::Fix3 || k == PhaseKind::Fix2 || k == PhaseKind::Fix1;
}

std::string to_string(Mu2Policy p)
{
    return p == Mu2Policy::Consistent ? "consistent" : "zero";
}

Mu2Policy mu2_policy_from_string(const std::string& s)
{
    if (s == "consistent") return Mu2Policy::Consistent;
    if (s == "zero") return Mu2Policy::Zero;
    throw InvalidArgument("unknown mu2_0 policy '" + s + "'");
}

Template make_template(const GridFunction& vhat)
{
    return {vhat, d1(vhat)};
}

namespace {

const Template& require_template(PhaseKind kind, const std::optional<Template>& tmpl)
{
    if (!tmpl) throw InvalidArgument("phase condition " + to_string(kind) + " needs a template");
    return *tmpl;
}

bool is_fixed(PhaseKind k) { return needs_template(k); }

double checked_ratio(double num, double den, double scale, const char* what)
{
    if (!(std::abs(den) > 1e-12 * scale)) throw DegeneratePhase(what);
    return num / den;
}

// M^-1 applied at every node.
GridFunction apply_Minv(const ModelSpec& model, const GridFunction& u)
{
    GridFunction out(u.grid, u.m);
    for (int i = 0; i < u.N(); ++i) out.node_values(i) = model.Minv() * u.node_values(i);
    return out;
}

// M^-T applied at every node; used to pull gradients through M^-1.
Vec apply_Minv_transpose(const ComovingOperator& op, const Vec& x)
{
    const int m = op.m();
    const int N = op.grid().N();
    Vec out(x.size());
    Eigen::Map<Mat>(out.data(), m, N).noalias() =
        op.model().Minv().transpose() * Eigen::Map<const Mat>(x.data(), m, N);
    return out;
}

}  // namespace

double consistent_mu1(PhaseKind kind, const GridFunction& u0, const GridFunction& v0,
                      const std::optional<Template>& tmpl)
{
    const GridFunction u0x = d1(u0);
    const GridFunction& dir = is_fixed(kind) ? require_template(kind, tmpl).vhat_xi : u0x;
    return -checked_ratio(inner(v0, dir), inner(u0x, dir), norm(u0x) * norm(dir),
                          "consistent mu1: <u0_xi, direction> vanishes");
}

double consistent_mu2(PhaseKind kind, const GridFunction& u0, const GridFunction& v0, double mu1,
                      const ModelSpec& model, const std::optional<Template>& tmpl)
{
    const GridFunction u0x = d1(u0);
    const GridFunction u0xx = d2(u0);
    const GridFunction v0x = d1(v0);
    GridFunction f0(u0.grid, u0.m, model.f_nodes(u0.values, u0x.values, v0.values));

    if (is_fixed(kind)) {
        const GridFunction& vx = require_template(kind, tmpl).vhat_xi;
        // <(M^-1 A + mu^2) u0'' + 2 mu v0' + M^-1 f(u0, u0', v0), vhat'> + mu2 <u0', vhat'> = 0
        GridFunction Au(u0.grid, u0.m);
        for (int i = 0; i < u0.N(); ++i) Au.node_values(i) = model.A() * u0xx.node_values(i);
        GridFunction q(u0.grid, u0.m);
        q.values = apply_Minv(model, Au).values + mu1 * mu1 * u0xx.values + 2.0 * mu1 * v0x.values +
                   apply_Minv(model, f0).values;
        return -checked_ratio(inner(q, vx), inner(u0x, vx), norm(u0x) * norm(vx),
                              "consistent mu2: <u0_xi, vhat_xi> vanishes");
    }
    // <2 mu^2 u0'' + 3 mu v0' + M^-1 (A u0'' + f), u0'> + <v0, v0'> + mu <v0, u0''> + mu2 <u0', u0'> = 0
    GridFunction Auf(u0.grid, u0.m);
    for (int i = 0; i < u0.N(); ++i) Auf.node_values(i) = model.A() * u0xx.node_values(i) + f0.node_values(i);
    GridFunction q(u0.grid, u0.m);
    q.values = 2.0 * mu1 * mu1 * u0xx.values + 3.0 * mu1 * v0x.values + apply_Minv(model, Auf).values;
    const double num = inner(q, u0x) + inner(v0, v0x) + mu1 * inner(v0, u0xx);
    return -checked_ratio(num, inner(u0x, u0x), norm(u0x) * norm(u0x), "consistent mu2: u0_xi vanishes");
}

PhaseCondition::PhaseCondition(PhaseKind kind, const ComovingOperator& op, const std::optional<Template>& tmpl)
    : kind_(kind), op_(&op)
{
    if (is_fixed(kind)) {
        const Template& t = require_template(kind, tmpl);
        check_same_layout(t.vhat.grid, t.vhat.m, op.grid(), op.m());
        s_ = op.weights().cwiseProduct(t.vhat_xi.values);
        vhat_ = t.vhat.values;
    }
}

double PhaseCondition::value(const Vec& v, const Vec& w, double mu1, double mu2) const
{
    const ComovingOperator& op = *op_;
    switch (kind_) {
    case PhaseKind::Fix3: return s_.dot(v - vhat_);
    case PhaseKind::Fix2: return s_.dot(w);
    case PhaseKind::Fix1: return s_.dot(op.apply_Minv(op.apply(v, w, mu1, mu2)));
    case PhaseKind::Orth2: return w.dot(op.weights().cwiseProduct(op.D1() * v));
    case PhaseKind::Orth1: {
        const Vec q = op.apply_Minv(op.apply(v, w, mu1, mu2));
        return q.dot(op.weights().cwiseProduct(op.D1() * v)) + w.dot(op.weights().cwiseProduct(op.D1() * w));
    }
    }
    return 0.0;
}

PhaseCondition::Gradient PhaseCondition::gradient(const Vec& v, const Vec& w, double mu1, double mu2) const
{
    const ComovingOperator& op = *op_;
    const Vec& W = op.weights();
    Gradient g;
    g.dv = Vec::Zero(v.size());
    g.dw = Vec::Zero(v.size());
    // psi = a^T M^-1 K(v, w, mu1, mu2) contributes L^T M^-T a
    auto add_acceleration_term = [&](const Vec& a) {
        const auto L = op.linearize(v, w, mu1, mu2);
        const Vec b = apply_Minv_transpose(op, a);
        g.dv += L.dv.transpose() * b;
        g.dw += L.dw.transpose() * b;
        g.dmu1 += b.dot(L.dmu1);
        g.dmu2 += b.dot(L.dmu2);
    };
    switch (kind_) {
    case PhaseKind::Fix3: g.dv = s_; break;
    case PhaseKind::Fix2: g.dw = s_; break;
    case PhaseKind::Fix1: add_acceleration_term(s_); break;
    case PhaseKind::Orth2:
        g.dw = W.cwiseProduct(op.D1() * v);
        g.dv = op.D1().transpose() * W.cwiseProduct(w);
        break;
    case PhaseKind::Orth1: {
        const Vec q = op.apply_Minv(op.apply(v, w, mu1, mu2));
        add_acceleration_term(W.cwiseProduct(op.D1() * v));
        g.dv += op.D1().transpose() * W.cwiseProduct(q);
        g.dw += W.cwiseProduct(op.D1() * w) + op.D1().transpose() * W.cwiseProduct(w);
        break;
    }
    }
    return g;
}

PdaeRhs pdae_rhs(const ModelSpec& model, const Grid1D& grid, const FrozenState& state, std::optional<PhaseKind> kind,
                 const std::optional<Template>& tmpl)
{
    check_same_layout(state.v.grid, state.v.m, grid, model.m());
    ComovingOperator op(model, grid);
    GridFunction acc(grid, model.m(), op.apply_Minv(op.apply(state.v.values, state.vdot.values, state.mu1, state.mu2)));
    double constraint = 0.0;
    if (kind) constraint = PhaseCondition(*kind, op, tmpl).value(state.v.values, state.vdot.values, state.mu1, state.mu2);
    return {state.vdot, acc, state.mu2, state.mu1, constraint};
}

double phase_residual(PhaseKind kind, const FrozenState& state, const ModelSpec& model,
                      const std::optional<Template>& tmpl)
{
    const GridFunction vx = d1(state.v);
    if (kind == PhaseKind::Fix1) {
        const GridFunction& hx = require_template(kind, tmpl).vhat_xi;
        checked_ratio(1.0, inner(vx, hx), norm(vx) * norm(hx), "Fix1: <v_xi, vhat_xi> vanishes");
    }
    if (kind == PhaseKind::Orth1) checked_ratio(1.0, inner(vx, vx), 1.0, "Orth1: v_xi vanishes");
    ComovingOperator op(model, state.v.grid);
    return PhaseCondition(kind, op, tmpl).value(state.v.values, state.vdot.values, state.mu1, state.mu2);
}

FrozenStepper::FrozenStepper(const ModelSpec& model, const Grid1D& grid, PhaseKind kind, std::optional<Template> tmpl,
                             TimeStepperConfig cfg)
    : op_(model, grid), tmpl_(std::move(tmpl)), cfg_(cfg)
{
    cfg_.validate();
    phase_.emplace(kind, op_, tmpl_);
}

FrozenStepper::FrozenStepper(const ModelSpec& model, const Grid1D& grid, double fixed_speed, TimeStepperConfig cfg)
    : op_(model, grid), fixed_speed_(fixed_speed), cfg_(cfg)
{
    cfg_.validate();
}

double FrozenStepper::phase_value(const FrozenState& s) const
{
    return phase_ ? phase_->value(s.v.values, s.vdot.values, s.mu1, s.mu2) : 0.0;
}

FrozenState FrozenStepper::step_euler(const FrozenState& curr)
{
    return step(BdfFormula::euler(cfg_.dt), curr, nullptr);
}

FrozenState FrozenStepper::step_bdf2(const FrozenState& prev, const FrozenState& curr)
{
    return step(BdfFormula::bdf2(cfg_.dt), curr, &prev);
}

FrozenState FrozenStepper::step(const BdfFormula& bdf, const FrozenState& curr, const FrozenState* prev)
{
    const double beta = bdf.beta;
    const double t_new = curr.t + cfg_.dt;
    auto hist = [&](double xn, double xm) { return prev ? bdf.history(xn, xm) : xn; };
    const Vec hv = prev ? bdf.history(curr.v.values, prev->v.values) : curr.v.values;
    const Vec hw = prev ? bdf.history(curr.vdot.values, prev->vdot.values) : curr.vdot.values;
    const double hmu = hist(curr.mu1, prev ? prev->mu1 : 0.0);
    const double hgamma = hist(curr.gamma, prev ? prev->gamma : 0.0);

    Vec w = prev ? Vec(2.0 * curr.vdot.values - prev->vdot.values) : curr.vdot.values;
    double mu1 = fixed_speed_ ? *fixed_speed_ : (prev ? 2.0 * curr.mu1 - prev->mu1 : curr.mu1);
    double mu2 = fixed_speed_ ? 0.0 : (prev ? 2.0 * curr.mu2 - prev->mu2 : curr.mu2);

    const Eigen::Index n = op_.size();
    const int k = phase_ ? 2 : 0;
    Mat B(n, k), C(k, n), D(k, k);
    Vec x, y;
    for (int it = 0;; ++it) {
        const Vec v = hv + beta * w;
        const Vec Rw = op_.Mb() * (w - hw) - beta * op_.apply(v, w, mu1, mu2);
        Vec Rb(k);
        if (phase_) {
            Rb[0] = mu1 - hmu - beta * mu2;
            Rb[1] = phase_->value(v, w, mu1, mu2);
        }
        const double res = std::max(Rw.lpNorm<Eigen::Infinity>(), k ? Rb.lpNorm<Eigen::Infinity>() : 0.0);
        if (!std::isfinite(res)) throw NewtonDiverged(t_new, res, "frozen Newton produced a non-finite residual");
        if (res <= cfg_.newton_tol) {
            FrozenState out{curr.v, curr.vdot, mu1, mu2, hgamma + beta * mu1, t_new};
            out.v.values = v;
            out.vdot.values = w;
            return out;
        }
        if (it == cfg_.newton_max)
            throw NewtonDiverged(t_new, res,
                                 "frozen Newton did not converge at t=" + std::to_string(t_new) + " (residual " +
                                     std::to_string(res) + ")");
        const auto L = op_.linearize(v, w, mu1, mu2);
        solver_.factorize(op_.Mb() - beta * (beta * L.dv + L.dw));
        if (phase_) {
            const auto g = phase_->gradient(v, w, mu1, mu2);
            B.col(0) = -beta * L.dmu1;
            B.col(1) = -beta * L.dmu2;
            C.row(0).setZero();
            C.row(1) = (beta * g.dv + g.dw).transpose();
            D << 1.0, -beta, g.dmu1, g.dmu2;
        }
        solver_.solve(B, C, D, Rw, Rb, x, y);
        w -= x;
        if (phase_) {
            mu1 -= y[0];
            mu2 -= y[1];
        }
    }
}

FrozenState initial_frozen_state(PhaseKind kind, const ModelSpec& model, const GridFunction& u0,
                                 const GridFunction& v0, const std::optional<Template>& tmpl, Mu2Policy policy)
{
    const double mu1 = consistent_mu1(kind, u0, v0, tmpl);
    const double mu2 = policy == Mu2Policy::Consistent ? consistent_mu2(kind, u0, v0, mu1, model, tmpl) : 0.0;
    FrozenState s{u0, v0, mu1, mu2, 0.0, 0.0};
    s.vdot.values += mu1 * d1(u0).values;
    return s;
}

namespace {

FrozenTrajectory time_loop(FrozenStepper& stepper, FrozenState s0, const TimeStepperConfig& cfg)
{
    FrozenTrajectory traj;
    auto record = [&](const FrozenState& s) {
        traj.diagnostics.push_back(
            {s.t, s.mu1, s.mu2, s.gamma, norm(s.vdot), std::abs(s.mu2), stepper.phase_value(s)});
    };
    const int n = cfg.steps();
    record(s0);
    traj.samples.push_back(s0);
    if (n == 0) return traj;
    FrozenState prev = std::move(s0);
    FrozenState curr = stepper.step_euler(prev);
    for (int k = 1;; ++k) {
        record(curr);
        if (k % cfg.sample_every == 0 || k == n) traj.samples.push_back(curr);
        if (k == n) break;
        FrozenState next = stepper.step_bdf2(prev, curr);
        prev = std::move(curr);
        curr = std::move(next);
    }
    return traj;
}

}  // namespace

FrozenTrajectory run_freezing(const ModelSpec& model, const Grid1D& grid, PhaseKind kind, const GridFunction& u0,
                              const GridFunction& v0, const std::optional<Template>& tmpl, const FreezeConfig& cfg)
{
    check_same_layout(u0.grid, u0.m, grid, model.m());
    check_same_layout(v0.grid, v0.m, grid, model.m());
    FrozenStepper stepper(model, grid, kind, tmpl, cfg.time);
    return time_loop(stepper, initial_frozen_state(kind, model, u0, v0, tmpl, cfg.mu2_policy), cfg.time);
}

FrozenTrajectory run_comoving(const ModelSpec& model, const Grid1D& grid, double speed, const GridFunction& u0,
                              const GridFunction& v0, const TimeStepperConfig& cfg)
{
    check_same_layout(u0.grid, u0.m, grid, model.m());
    FrozenStepper stepper(model, grid, speed, cfg);
    FrozenState s0{u0, v0, speed, 0.0, 0.0, 0.0};
    return time_loop(stepper, std::move(s0), cfg);
}

DiscreteWave solve_traveling_wave(const ModelSpec& model, const GridFunction& guess, double speed_guess,
                                  const Template& tmpl, const NewtonOptions& opts)
{
    ComovingOperator op(model, guess.grid);
    check_same_layout(tmpl.vhat.grid, tmpl.vhat.m, guess.grid, guess.m);
    const Vec s = op.weights().cwiseProduct(tmpl.vhat_xi.values);
    const Vec zero = Vec::Zero(op.size());
    Vec v = guess.values;
    double mu = speed_guess;
    BorderedSolver solver;
    Mat B(op.size(), 1), C(1, op.size()), D = Mat::Zero(1, 1);
    Vec x, y;
    for (int it = 0;; ++it) {
        const Vec R = op.apply(v, zero, mu, 0.0);
        Vec Rb(1);
        Rb[0] = s.dot(v - tmpl.vhat.values);
        const double res = std::max(R.lpNorm<Eigen::Infinity>(), std::abs(Rb[0]));
        if (res <= opts.tol) return {GridFunction(guess.grid, guess.m, v), mu, res, it};
        if (it == opts.max_iter || !std::isfinite(res))
            throw NewtonDiverged(0.0, res, "traveling wave Newton did not converge");
        const auto L = op.linearize(v, zero, mu, 0.0);
        solver.factorize(L.dv);
        B.col(0) = L.dmu1;
        C.row(0) = s.transpose();
        solver.solve(B, C, D, R, Rb, x, y);
        v -= x;
        mu -= y[0];
    }
}

}  // namespace dampwave
