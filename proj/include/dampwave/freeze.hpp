#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dampwave/integrate.hpp"

namespace dampwave {

enum class PhaseKind { Fix3, Fix2, Fix1, Orth2, Orth1 };

std::string to_string(PhaseKind k);
PhaseKind phase_kind_from_string(const std::string& s);
bool needs_template(PhaseKind k);

struct Template {
    GridFunction vhat;
    GridFunction vhat_xi;
};

Template make_template(const GridFunction& vhat);

struct FrozenState {
    GridFunction v;
    GridFunction vdot;
    double mu1 = 0.0;
    double mu2 = 0.0;
    double gamma = 0.0;
    double t = 0.0;
};

double consistent_mu1(PhaseKind kind, const GridFunction& u0, const GridFunction& v0,
                      const std::optional<Template>& tmpl);
double consistent_mu2(PhaseKind kind, const GridFunction& u0, const GridFunction& v0, double mu1_0,
                      const ModelSpec& model, const std::optional<Template>& tmpl);

struct PdaeRhs {
    GridFunction v_t;
    GridFunction v_tt;
    double mu1_t;
    double gamma_t;
    double constraint;  // phase residual, 0 when no phase condition is given
};

PdaeRhs pdae_rhs(const ModelSpec& model, const Grid1D& grid, const FrozenState& state,
                 std::optional<PhaseKind> kind = std::nullopt, const std::optional<Template>& tmpl = std::nullopt);

double phase_residual(PhaseKind kind, const FrozenState& state, const ModelSpec& model,
                      const std::optional<Template>& tmpl);

// Phase condition psi(v, w, mu1, mu2) and its gradient, with w = v_t.
class PhaseCondition {
public:
    PhaseCondition(PhaseKind kind, const ComovingOperator& op, const std::optional<Template>& tmpl);

    PhaseKind kind() const { return kind_; }
    double value(const Vec& v, const Vec& w, double mu1, double mu2) const;

    struct Gradient {
        Vec dv, dw;
        double dmu1 = 0.0, dmu2 = 0.0;
    };
    Gradient gradient(const Vec& v, const Vec& w, double mu1, double mu2) const;

private:
    PhaseKind kind_;
    const ComovingOperator* op_;
    Vec s_;  // W vhat_xi
    Vec vhat_;
};

enum class Mu2Policy { Consistent, Zero };

std::string to_string(Mu2Policy p);
Mu2Policy mu2_policy_from_string(const std::string& s);

struct FreezeConfig {
    TimeStepperConfig time;
    Mu2Policy mu2_policy = Mu2Policy::Consistent;
    double pc_tol = 1e-8;
};

// BDF stepping of the frozen system. With a phase condition the Newton unknowns
// are (v_t, mu1, mu2); with a prescribed speed only v_t.
class FrozenStepper {
public:
    FrozenStepper(const ModelSpec& model, const Grid1D& grid, PhaseKind kind, std::optional<Template> tmpl,
                  TimeStepperConfig cfg);
    // Comoving frame with fixed speed, mu2 = 0 and no phase condition.
    FrozenStepper(const ModelSpec& model, const Grid1D& grid, double fixed_speed, TimeStepperConfig cfg);
    FrozenStepper(const FrozenStepper&) = delete;
    FrozenStepper& operator=(const FrozenStepper&) = delete;

    FrozenState step_euler(const FrozenState& curr);
    FrozenState step_bdf2(const FrozenState& prev, const FrozenState& curr);
    const ComovingOperator& op() const { return op_; }
    double phase_value(const FrozenState& s) const;

private:
    FrozenState step(const BdfFormula& bdf, const FrozenState& curr, const FrozenState* prev);

    ComovingOperator op_;
    std::optional<Template> tmpl_;
    std::optional<PhaseCondition> phase_;
    std::optional<double> fixed_speed_;
    TimeStepperConfig cfg_;
    BorderedSolver solver_;
};

struct FrozenRecord {
    double t, mu1, mu2, gamma, norm_vt, abs_mu1dot, phase_residual;
};

struct FrozenTrajectory {
    std::vector<FrozenState> samples;
    std::vector<FrozenRecord> diagnostics;  // every step, including t = 0
    const FrozenState& final_state() const { return samples.back(); }
};

FrozenState initial_frozen_state(PhaseKind kind, const ModelSpec& model, const GridFunction& u0,
                                 const GridFunction& v0, const std::optional<Template>& tmpl, Mu2Policy policy);

FrozenTrajectory run_freezing(const ModelSpec& model, const Grid1D& grid, PhaseKind kind, const GridFunction& u0,
                              const GridFunction& v0, const std::optional<Template>& tmpl, const FreezeConfig& cfg);

// Same time loop in a frame moving with prescribed speed; gamma = speed * t.
FrozenTrajectory run_comoving(const ModelSpec& model, const Grid1D& grid, double speed, const GridFunction& u0,
                              const GridFunction& v0, const TimeStepperConfig& cfg);

// Stationary point of the frozen system: K(v, 0; mu, 0) = 0 with <v - vhat, vhat_xi> = 0.
struct DiscreteWave {
    GridFunction profile;
    double speed;
    double residual;
    int iterations;
};
DiscreteWave solve_traveling_wave(const ModelSpec& model, const GridFunction& guess, double speed_guess,
                                  const Template& tmpl, const NewtonOptions& opts = {1e-11, 30});

}  // namespace dampwave
