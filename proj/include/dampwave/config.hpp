#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dampwave/freeze.hpp"
#include "dampwave/grid.hpp"
#include "dampwave/model.hpp"

namespace dampwave {

using Rows = std::vector<std::vector<double>>;

struct ModelSection {
    std::string name = "nagumo";  // nagumo, fhn-pulse, fhn-front, custom
    std::optional<double> eps, b, rho, a, phi, c_star;
    // custom only
    Rows M, A, B, C, L, poly;
    std::vector<double> v_minus, v_plus;
    bool operator==(const ModelSection&) const = default;
};

struct GridSection {
    double R = 50.0;
    std::optional<double> dx;
    std::optional<int> N;
    Boundary bc = Boundary::Neumann;
    bool operator==(const GridSection&) const = default;
};

struct TimeSection {
    double dt = 0.1;
    double T = 150.0;
    int sample_every = 10;
    double newton_tol = 1e-10;
    int newton_max = 12;
    double level = 0.5;
    bool operator==(const TimeSection&) const = default;
};

struct InitialSection {
    std::string u0 = "arctan";  // arctan, exact-front, or a profile CSV path
    std::string v0 = "zero";    // zero, or slow: u_tt = 0 at t = 0
    bool operator==(const InitialSection&) const = default;
};

struct FreezeSection {
    PhaseKind phase = PhaseKind::Fix2;
    std::string tmpl = "initial";  // initial, or a profile CSV path
    std::optional<Mu2Policy> mu2_0;
    double pc_tol = 1e-8;
    bool operator==(const FreezeSection&) const = default;
};

struct SpectrumSection {
    std::optional<double> mu;
    double omega_max = 10.0;
    int n_samples = 801;
    int refine = 4;
    int size_cap = 2000;
    int n_wanted = 20;
    std::optional<double> shift;
    double class_tol = 0.05;
    std::string profile = "solve";  // solve, exact-front, or a profile CSV path
    bool operator==(const SpectrumSection&) const = default;
};

struct FirstOrderSection {
    std::optional<double> c, mu;
    double dt = 0.05;
    double T = 10.0;
    double omega_max = 5.0;
    int n_omega = 201;
    int n_random = 100;
    int seed = 1;
    bool operator==(const FirstOrderSection&) const = default;
};

struct TransferSection {
    std::optional<double> k;  // default: the exact front's scale for Nagumo, 1 otherwise
    std::string profile = "exact-front";  // or a profile CSV path
    std::optional<double> mu;
    bool operator==(const TransferSection&) const = default;
};

struct OutputSection {
    std::string dir = "out";
    bool operator==(const OutputSection&) const = default;
};

struct RunConfig {
    ModelSection model;
    GridSection grid;
    TimeSection time;
    InitialSection initial;
    FreezeSection freeze;
    SpectrumSection spectrum;
    FirstOrderSection firstorder;
    TransferSection transfer;
    OutputSection output;
    bool operator==(const RunConfig&) const = default;
};

// INI-like text: [section] headers, `key = value` lines, `#` comments.
// Unknown sections and keys are rejected with ConfigError.
RunConfig parse_config(std::istream& is, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

// `section.key=value`, or `key=value` when the key is unique across sections.
void apply_override(RunConfig& cfg, const std::string& assignment);

// Every field that is set, with numbers in shortest round-trip form.
void write_config(std::ostream& os, const RunConfig& cfg);

// Range checks and file existence; ConfigError naming the key. Checks that
// depend on the command (profile sources per model) are left to the commands.
void validate(const RunConfig& cfg);

ModelSpec build_model(const ModelSection& s);
Grid1D build_grid(const GridSection& s);
TimeStepperConfig build_time(const TimeSection& s);

// Reference speed: exact for Nagumo, c*/sqrt(1 + eps c*^2) for FHN, none for custom.
std::optional<double> reference_speed(const ModelSection& s);

}  // namespace dampwave
