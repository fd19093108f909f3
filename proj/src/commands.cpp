#include "dampwave/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>

#include "dampwave/csv.hpp"
#include "dampwave/errors.hpp"
#include "dampwave/firstorder.hpp"
#include "dampwave/spectra.hpp"
#include "dampwave/transfer.hpp"

namespace dampwave {

namespace {

namespace fs = std::filesystem;

std::ofstream open_output(const RunConfig& cfg, const std::string& name)
{
    std::error_code ec;
    fs::create_directories(cfg.output.dir, ec);
    const fs::path path = fs::path(cfg.output.dir) / name;
    std::ofstream out(path);
    if (!out) throw ConfigError("output.dir: cannot write '" + path.string() + "'");
    return out;
}

GridFunction read_profile(const std::string& path, const Grid1D& target)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open profile '" + path + "'");
    GridFunction u = [&] {
        try {
            return read_csv(in, Boundary::Neumann);
        } catch (const InvalidArgument& e) {
            throw ConfigError("profile '" + path + "': " + e.what());
        }
    }();
    return u.grid == target ? rebind(u, target) : interpolate_to(u, target);
}

Vec left_state(const ModelSpec& model)
{
    return model.states() ? model.states()->v_minus : Vec::Zero(model.m());
}

// v- + (atan(x)/pi + 1/2) e1
GridFunction arctan_data(const ModelSpec& model, const Grid1D& g)
{
    const Vec base = left_state(model);
    return sample(g, model.m(), [&](double x) {
        Vec r = base;
        r[0] += std::atan(x) / M_PI + 0.5;
        return r;
    });
}

NagumoFront front_of(const ModelSection& s) { return nagumo_exact_front(s.eps.value_or(0.25), s.b.value_or(0.25)); }

GridFunction exact_front(const ModelSection& s, const Grid1D& g)
{
    const NagumoFront fr = front_of(s);
    return sample(g, 1, [&](double x) { return Vec::Constant(1, fr.profile(x)); });
}

GridFunction initial_profile(const RunConfig& cfg, const ModelSpec& model, const Grid1D& g)
{
    if (cfg.initial.u0 == "arctan") return arctan_data(model, g);
    if (cfg.initial.u0 == "exact-front") return exact_front(cfg.model, g);
    GridFunction u = read_profile(cfg.initial.u0, g);
    if (u.m != model.m()) throw ConfigError("initial.u0: profile has " + std::to_string(u.m) + " components");
    return u;
}

// Nodewise Newton for A u0'' + f(u0, u0', w) = 0, so that the data start with zero acceleration.
GridFunction slow_velocity(const ModelSpec& model, const GridFunction& u0)
{
    const GridFunction ux = d1(u0), uxx = d2(u0);
    GridFunction w(u0.grid, u0.m);
    for (int i = 0; i < u0.N(); ++i) {
        const Vec u = u0.node_values(i), v = ux.node_values(i), a = model.A() * uxx.node_values(i);
        Vec x = Vec::Zero(u0.m);
        for (int it = 0; it < 30; ++it) {
            const Vec r = a + model.f(u, v, x);
            if (r.cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + a.cwiseAbs().maxCoeff())) break;
            x -= model.jacobians(u, v, x).d3.partialPivLu().solve(r);
        }
        w.node_values(i) = x;
    }
    return w;
}

GridFunction initial_velocity(const RunConfig& cfg, const ModelSpec& model, const GridFunction& u0)
{
    if (cfg.initial.v0 == "slow") return slow_velocity(model, u0);
    return GridFunction(u0.grid, u0.m);
}

double speed_for(const std::optional<double>& given, const ModelSection& s, const char* key)
{
    if (given) return *given;
    if (auto r = reference_speed(s)) return *r;
    throw ConfigError(std::string(key) + ": required for a custom model");
}

void write_trajectory(std::ostream& os, const std::vector<SecondOrderState>& samples)
{
    const int m = samples.front().v.m;
    std::vector<std::string> header{"t", "xi"};
    for (int c = 0; c < m; ++c) header.push_back("u" + std::to_string(c + 1));
    for (int c = 0; c < m; ++c) header.push_back("ut" + std::to_string(c + 1));
    csv::Writer w(os, header);
    for (const auto& s : samples) {
        for (int i = 0; i < s.v.N(); ++i) {
            w << s.t << s.v.grid.node(i);
            for (int c = 0; c < m; ++c) w << s.v.at(i, c);
            for (int c = 0; c < m; ++c) w << s.vdot.at(i, c);
            w.end_row();
        }
    }
}

void write_frozen_snapshots(std::ostream& os, const std::vector<FrozenState>& samples)
{
    std::vector<SecondOrderState> plain;
    plain.reserve(samples.size());
    for (const auto& s : samples) plain.push_back({s.v, s.vdot, s.t});
    write_trajectory(os, plain);
}

// Seed for the stationary solve on the Neumann grid `gn`.
struct Seed {
    GridFunction profile;
    double speed;
};

Seed spectrum_seed(const RunConfig& cfg, const ModelSpec& model, const Grid1D& gn, std::ostream& log)
{
    const SpectrumSection& s = cfg.spectrum;
    if (s.profile != "solve") {
        GridFunction p = read_profile(s.profile, gn);
        return {p, speed_for(s.mu, cfg.model, "spectrum.mu")};
    }
    if (cfg.model.name == "nagumo") return {exact_front(cfg.model, gn), front_of(cfg.model).mu};
    // Frozen run from arctan data on a five times finer grid over the same interval.
    const Grid1D fine = Grid1D::neumann(gn.R(), 5 * (gn.N() - 1) + 1);
    const GridFunction u0 = arctan_data(model, fine);
    FreezeConfig fc;
    fc.time = build_time(cfg.time);
    fc.mu2_policy = Mu2Policy::Zero;
    const auto tr = run_freezing(model, fine, PhaseKind::Fix2, u0, GridFunction(fine, model.m()), make_template(u0),
                                 fc);
    log << "seed: frozen run to t = " << tr.final_state().t << ", mu1 = " << csv::number(tr.final_state().mu1) << '\n';
    return {interpolate_to(tr.final_state().v, gn), s.mu.value_or(tr.final_state().mu1)};
}

DispersionOptions dispersion_options(const SpectrumSection& s)
{
    DispersionOptions o;
    o.omega_max = s.omega_max;
    o.n_samples = s.n_samples;
    o.refine = s.refine;
    return o;
}

Profile interpolant(const GridFunction& u)
{
    return [u](double x) {
        const Grid1D& g = u.grid;
        const double s = std::clamp((x - g.node(0)) / g.dx(), 0.0, double(g.N() - 1));
        const int i = std::min(int(s), g.N() - 2);
        const double th = s - i;
        return Vec((1.0 - th) * u.node_values(i) + th * u.node_values(i + 1));
    };
}

}  // namespace

void cmd_simulate(const RunConfig& cfg, std::ostream& log)
{
    const ModelSpec model = build_model(cfg.model);
    const Grid1D g = build_grid(cfg.grid);
    const GridFunction u0 = initial_profile(cfg, model, g);
    const auto tr = run_cauchy(model, g, u0, initial_velocity(cfg, model, u0), build_time(cfg.time));

    auto traj = open_output(cfg, "trajectory.csv");
    write_trajectory(traj, tr.samples);
    auto sum = open_output(cfg, "summary.csv");
    csv::Writer w(sum, {"t", "norm_ut", "level_crossing_x"});
    for (const auto& r : tr.summary) {
        w << r.t << r.norm_ut << r.level_crossing_x;
        w.end_row();
    }
    log << "simulate: " << tr.summary.size() - 1 << " steps, " << tr.samples.size() << " samples\n";
    const double hit = boundary_hit_time(tr, cfg.time.level);
    if (std::isfinite(hit)) log << "boundary hit time " << csv::number(hit) << '\n';
    const double arrival = front_arrival_time(tr, g.R());
    if (std::isfinite(arrival)) log << "front arrival time " << csv::number(arrival) << '\n';
}

void cmd_freeze(const RunConfig& cfg, std::ostream& log)
{
    const ModelSpec model = build_model(cfg.model);
    const Grid1D g = build_grid(cfg.grid);
    const GridFunction u0 = initial_profile(cfg, model, g);
    const GridFunction vhat = cfg.freeze.tmpl == "initial" ? u0 : read_profile(cfg.freeze.tmpl, g);
    if (vhat.m != model.m()) throw ConfigError("freeze.template: wrong number of components");

    FreezeConfig fc;
    fc.time = build_time(cfg.time);
    fc.pc_tol = cfg.freeze.pc_tol;
    fc.mu2_policy = cfg.freeze.mu2_0.value_or(cfg.model.name == "nagumo" ? Mu2Policy::Consistent : Mu2Policy::Zero);
    const auto tr =
        run_freezing(model, g, cfg.freeze.phase, u0, initial_velocity(cfg, model, u0), make_template(vhat), fc);

    auto diag = open_output(cfg, "diagnostics.csv");
    csv::Writer w(diag, {"t", "mu1", "mu2", "gamma", "norm_vt", "abs_mu1dot"});
    for (const auto& r : tr.diagnostics) {
        w << r.t << r.mu1 << r.mu2 << r.gamma << r.norm_vt << r.abs_mu1dot;
        w.end_row();
    }
    auto prof = open_output(cfg, "profile.csv");
    write_csv(prof, tr.final_state().v);
    auto snap = open_output(cfg, "snapshots.csv");
    write_frozen_snapshots(snap, tr.samples);

    const auto& e = tr.diagnostics.back();
    log << "freeze " << to_string(cfg.freeze.phase) << ": t = " << csv::number(e.t) << " mu1 = " << csv::number(e.mu1)
        << " mu2 = " << csv::number(e.mu2) << " norm_vt = " << csv::number(e.norm_vt) << '\n';
}

void cmd_spectrum(const RunConfig& cfg, std::ostream& log)
{
    const ModelSpec model = build_model(cfg.model);
    const Grid1D gp = build_grid(cfg.grid);
    if (!gp.periodic()) throw ConfigError("grid.bc: the spectrum command needs a periodic grid");
    const Grid1D gn = neumann_on_same_nodes(gp);
    const SpectrumSection& s = cfg.spectrum;

    GridFunction profile(gn, model.m());
    double speed = 0.0, residual = 0.0;
    if (s.profile == "exact-front") {
        if (cfg.model.name != "nagumo") throw ConfigError("spectrum.profile: exact-front needs the nagumo model");
        profile = exact_front(cfg.model, gn);
        speed = front_of(cfg.model).mu;
        residual = tw_residual(model, gn, {profile, speed});
    } else {
        const Seed seed = spectrum_seed(cfg, model, gn, log);
        if (seed.profile.m != model.m()) throw ConfigError("spectrum.profile: wrong number of components");
        const DiscreteWave dw = solve_traveling_wave(model, seed.profile, seed.speed, make_template(seed.profile));
        profile = dw.profile;
        speed = dw.speed;
        residual = dw.residual;
    }

    const DispersionCurve curves = dispersion_curves(model, speed, dispersion_options(s));
    QepOptions qo;
    qo.size_cap = s.size_cap;
    qo.n_wanted = s.n_wanted;
    qo.class_tol = s.class_tol;
    if (s.shift) qo.shift = cplx(*s.shift, 0.0);
    const SpectrumResult r =
        solve_quadratic_eigproblem(assemble_discrete_pencil(model, rebind(profile, gp), speed), qo, &curves);

    const int k = r.nearest(0.0);
    const GridFunction dv = d1(profile);
    const double cs = cosine(r.eigenfunction(k), CGridFunction(gp, model.m(), dv.values.cast<cplx>()));
    const GapReport gap = spectral_gap(curves);

    auto prof = open_output(cfg, "profile.csv");
    write_csv(prof, profile);
    auto spec = open_output(cfg, "spectrum.csv");
    write_csv(spec, r);
    auto disp = open_output(cfg, "dispersion.csv");
    write_csv(disp, curves);
    auto ef = open_output(cfg, "eigenfunction.csv");
    write_csv(ef, r.eigenfunction(k));
    auto sum = open_output(cfg, "summary.csv");
    csv::Writer w(sum, {"speed", "tw_residual", "lambda0_re", "lambda0_im", "cosine", "beta"});
    w << speed << residual << r.eigenvalues[k].real() << r.eigenvalues[k].imag() << cs << gap.beta;
    w.end_row();

    log << "spectrum: " << r.eigenvalues.size() << " eigenvalues, speed " << csv::number(speed) << ", lambda0 "
        << csv::number(r.eigenvalues[k].real()) << (r.eigenvalues[k].imag() < 0 ? " - " : " + ")
        << csv::number(std::abs(r.eigenvalues[k].imag())) << "i, cosine " << csv::number(cs) << ", gap "
        << csv::number(gap.beta) << '\n';
    for (const auto& msg : curves.warnings) log << "warning: " << msg << '\n';
}

void cmd_dispersion(const RunConfig& cfg, std::ostream& log)
{
    const ModelSpec model = build_model(cfg.model);
    const double mu = speed_for(cfg.spectrum.mu, cfg.model, "spectrum.mu");
    const DispersionCurve curves = dispersion_curves(model, mu, dispersion_options(cfg.spectrum));
    const GapReport gap = spectral_gap(curves);

    auto disp = open_output(cfg, "dispersion.csv");
    write_csv(disp, curves);
    auto g = open_output(cfg, "gap.csv");
    std::vector<std::string> header{"mu", "beta", "re_lambda", "im_lambda", "omega", "sign"};
    const bool nagumo = cfg.model.name == "nagumo";
    if (nagumo) header.push_back("alternate_gap");
    csv::Writer w(g, header);
    w << mu << gap.beta << gap.rightmost.real() << gap.rightmost.imag() << gap.omega
      << (gap.side == Side::Minus ? -1 : 1);
    if (nagumo) w << alternate_nagumo_gap(cfg.model.eps.value_or(0.25), cfg.model.b.value_or(0.25));
    w.end_row();

    log << "dispersion: gap " << csv::number(gap.beta) << " at omega " << csv::number(gap.omega) << " on side "
        << to_string(gap.side) << (gap.has_gap ? "" : " (no gap)") << '\n';
    for (const auto& msg : curves.warnings) log << "warning: " << msg << '\n';
}

void cmd_transfer(const RunConfig& cfg, std::ostream& log)
{
    const ModelSpec model = build_model(cfg.model);
    const auto& parts = model.semilinear_parts();
    if (!parts) throw ConfigError("model.name: the transfer needs a semilinear model");
    const Grid1D g = build_grid(cfg.grid);
    const double k = cfg.transfer.k.value_or(cfg.model.name == "nagumo" ? front_of(cfg.model).k : 1.0);

    DampedWave wave;
    wave.A = model.A();
    wave.C = parts->C;
    if (cfg.transfer.profile == "exact-front") {
        if (cfg.model.name != "nagumo") throw ConfigError("transfer.profile: exact-front needs the nagumo model");
        const NagumoFront fr = front_of(cfg.model);
        wave.v_star = [fr](double x) { return Vec::Constant(1, fr.profile(x)); };
        wave.mu_star = cfg.transfer.mu.value_or(fr.mu);
    } else {
        if (!cfg.transfer.mu) throw ConfigError("transfer.mu: required with a profile file");
        wave.v_star = interpolant(read_profile(cfg.transfer.profile, g));
        wave.mu_star = *cfg.transfer.mu;
    }
    const ParabolicWave par = wave_to_parabolic(wave, k, model.M());
    const DampedWave back = parabolic_to_wave(par, k, model.M());

    const int m = model.m();
    double err = std::abs(back.mu_star - wave.mu_star);
    err = std::max({err, (back.A - wave.A).cwiseAbs().maxCoeff(), (back.C - wave.C).cwiseAbs().maxCoeff()});
    auto out = open_output(cfg, "transfer.csv");
    std::vector<std::string> header{"xi"};
    for (int c = 0; c < m; ++c) header.push_back("v" + std::to_string(c + 1));
    header.push_back("z");
    for (int c = 0; c < m; ++c) header.push_back("w" + std::to_string(c + 1));
    csv::Writer w(out, header);
    for (int i = 0; i < g.N(); ++i) {
        const double xi = g.node(i), z = k * xi;
        const Vec v = wave.v_star(xi), ww = par.w_star(z), vb = back.v_star(xi);
        err = std::max(err, (vb - v).cwiseAbs().maxCoeff());
        w << xi;
        for (int c = 0; c < m; ++c) w << v[c];
        w << z;
        for (int c = 0; c < m; ++c) w << ww[c];
        w.end_row();
    }

    auto sum = open_output(cfg, "transfer_summary.csv");
    std::vector<std::string> sh{"k", "mu", "c", "roundtrip_error"};
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) sh.push_back("A_tilde_" + std::to_string(i + 1) + std::to_string(j + 1));
    csv::Writer ws(sum, sh);
    ws << k << wave.mu_star << par.c_star << err;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) ws << par.A_tilde(i, j);
    ws.end_row();
    log << "transfer: k = " << csv::number(k) << ", mu = " << csv::number(wave.mu_star)
        << ", c = " << csv::number(par.c_star) << ", round trip error " << csv::number(err) << '\n';
}

bool cmd_firstorder_check(const RunConfig& cfg, std::ostream& log)
{
    const ModelSpec model = build_model(cfg.model);
    if (!model.states()) throw ConfigError("model.v_minus: the first-order check needs asymptotic states");
    const FirstOrderSection& f = cfg.firstorder;
    const double mu = speed_for(f.mu, cfg.model, "firstorder.mu");
    const double c = f.c ? *f.c : default_shift(model, mu);
    const FirstOrderSystem sys(model, c);
    const Grid1D g = build_grid(cfg.grid);
    log << "firstorder-check: mu = " << csv::number(mu) << ", c = " << csv::number(c) << ", cond(T) = "
        << csv::number(sys.cond_T()) << '\n';

    struct Check {
        std::string name;
        double value, threshold;
    };
    std::vector<Check> checks;

    // Lift and project on the initial data with a nonzero velocity.
    const GridFunction u0 = initial_profile(cfg, model, g);
    GridFunction vdot = d1(u0);
    vdot.values *= 0.5;
    const ProjectedState p = project_state(sys, lift_state(sys, u0, vdot, mu), mu);
    const double scale = std::max(1.0, std::max(u0.values.cwiseAbs().maxCoeff(), vdot.values.cwiseAbs().maxCoeff()));
    const double lp = std::max((p.v.values - u0.values).cwiseAbs().maxCoeff(),
                               (p.vdot.values - vdot.values).cwiseAbs().maxCoeff()) /
                      scale;
    checks.push_back({"lift_project", lp, 1e-12});

    // Equivalence with the second-order run and the W functionals.
    TimeStepperConfig tc = build_time(cfg.time);
    tc.dt = f.dt;
    tc.T = f.T;
    tc.sample_every = 1;
    const GridFunction v0 = initial_velocity(cfg, model, u0);
    const auto second = run_cauchy(model, g, u0, v0, tc);
    const auto first = run_first_order(sys, lift_state(sys, u0, v0, 0.0), tc);
    double eq = 0.0;
    for (std::size_t k = 0; k < first.samples.size(); ++k) {
        const ProjectedState q = project_state(sys, first.samples[k].V, 0.0);
        GridFunction du = q.v, dv = q.vdot;
        du.values -= second.samples[k].v.values;
        dv.values -= second.samples[k].vdot.values;
        eq = std::max({eq, norm(du), norm(dv)});
    }
    checks.push_back({"equivalence", eq, 1e-2});
    const WFunctionals wf = w_functionals(sys, first);
    checks.push_back({"w2_max", *std::max_element(wf.w2.begin(), wf.w2.end()), 1e-2});
    checks.push_back({"w3_max", *std::max_element(wf.w3.begin(), wf.w3.end()), 1e-2});

    // Symbol factorization at random (lambda, omega).
    std::mt19937_64 rng(static_cast<std::uint64_t>(f.seed));
    std::uniform_real_distribution<double> box(-3.0, 3.0), om(-f.omega_max, f.omega_max);
    double fd = 0.0;
    for (int k = 0; k < f.n_random; ++k) {
        const double re = box(rng), im = box(rng), w = om(rng);
        fd = std::max(fd, symbol_factorization_defect(sys, mu, cplx(re, im), w, k % 2 ? Side::Plus : Side::Minus));
    }
    checks.push_back({"factorization", fd, 1e-10});

    // Union of the dispersion sets.
    auto uni = open_output(cfg, "union_defect.csv");
    auto disp = open_output(cfg, "firstorder_dispersion.csv");
    csv::Writer wu(uni, {"sign", "omega", "defect"});
    csv::Writer wd(disp, {"sign", "omega", "branch", "re_lambda", "im_lambda"});
    double ud = 0.0;
    for (Side side : {Side::Minus, Side::Plus}) {
        const int sign = side == Side::Minus ? -1 : 1;
        for (int k = 0; k < f.n_omega; ++k) {
            const double w = f.n_omega == 1 ? 0.0 : -f.omega_max + 2.0 * f.omega_max * k / (f.n_omega - 1);
            const double d = union_defect(sys, mu, w, side);
            ud = std::max(ud, d);
            wu << sign << w << d;
            wu.end_row();
            const CVec ev = first_order_symbol_eigs(sys, mu, w, side);
            for (Eigen::Index j = 0; j < ev.size(); ++j) {
                wd << sign << w << int(j) << ev[j].real() << ev[j].imag();
                wd.end_row();
            }
        }
    }
    checks.push_back({"union", ud, 1e-8});

    auto wout = open_output(cfg, "w_functionals.csv");
    csv::Writer ww(wout, {"t", "w2", "w3"});
    for (std::size_t k = 0; k < wf.t.size(); ++k) {
        ww << wf.t[k] << wf.w2[k] << wf.w3[k];
        ww.end_row();
    }

    auto rep = open_output(cfg, "report.csv");
    csv::Writer wr(rep, {"check", "value", "threshold", "status"});
    bool ok = true;
    for (const Check& ch : checks) {
        const bool pass = ch.value <= ch.threshold;
        ok = ok && pass;
        wr << ch.name << ch.value << ch.threshold << std::string(pass ? "pass" : "fail");
        wr.end_row();
        log << "  " << ch.name << " " << csv::number(ch.value) << " <= " << csv::number(ch.threshold) << " "
            << (pass ? "pass" : "FAIL") << '\n';
    }
    return ok;
}

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"simulate", "freeze", "spectrum", "dispersion", "transfer",
                                                "firstorder-check"};
    return names;
}

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& log, std::ostream& err)
{
    try {
        validate(cfg);
        if (name == "simulate") cmd_simulate(cfg, log);
        else if (name == "freeze") cmd_freeze(cfg, log);
        else if (name == "spectrum") cmd_spectrum(cfg, log);
        else if (name == "dispersion") cmd_dispersion(cfg, log);
        else if (name == "transfer") cmd_transfer(cfg, log);
        else if (name == "firstorder-check") {
            if (!cmd_firstorder_check(cfg, log)) {
                err << "firstorder-check: some checks failed, see report.csv\n";
                return kExitNumerical;
            }
        } else {
            err << "unknown command '" << name << "'\n";
            return kExitConfig;
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace dampwave
