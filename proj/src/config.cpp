#include "dampwave/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dampwave/errors.hpp"

namespace dampwave {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Shortest text that reads back to the same double.
std::string format_double(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

struct BadValue {
    std::string reason;
};

double parse_double(const std::string& s)
{
    double x = 0.0;
    const char* end = s.data() + s.size();
    auto res = std::from_chars(s.data(), end, x);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(x)) throw BadValue{"expected a number"};
    return x;
}

int parse_int(const std::string& s)
{
    int x = 0;
    const char* end = s.data() + s.size();
    auto res = std::from_chars(s.data(), end, x);
    if (res.ec != std::errc() || res.ptr != end) throw BadValue{"expected an integer"};
    return x;
}

std::vector<double> parse_list(const std::string& s)
{
    std::string t = s;
    for (char& ch : t)
        if (ch == ',') ch = ' ';
    std::istringstream is(t);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(parse_double(tok));
    return out;
}

std::string format_list(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_double(v[i]);
    return out;
}

// Rows separated by ';'.
Rows parse_rows(const std::string& s)
{
    Rows out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto stop = s.find(';', start);
        const std::string part = s.substr(start, stop == std::string::npos ? std::string::npos : stop - start);
        out.push_back(parse_list(part));
        if (out.back().empty()) throw BadValue{"empty matrix row"};
        if (out.back().size() != out.front().size()) throw BadValue{"matrix rows differ in length"};
        if (stop == std::string::npos) break;
        start = stop + 1;
    }
    return out;
}

std::string format_rows(const Rows& r)
{
    std::string out;
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "; " : "") + format_list(r[i]);
    return out;
}

template <class T>
struct Codec;

template <>
struct Codec<double> {
    static double parse(const std::string& s) { return parse_double(s); }
    static std::optional<std::string> format(double x) { return format_double(x); }
};
template <>
struct Codec<int> {
    static int parse(const std::string& s) { return parse_int(s); }
    static std::optional<std::string> format(int x) { return std::to_string(x); }
};
template <>
struct Codec<std::string> {
    static std::string parse(const std::string& s)
    {
        if (s.empty()) throw BadValue{"empty value"};
        return s;
    }
    static std::optional<std::string> format(const std::string& s) { return s; }
};
template <class T>
struct Codec<std::optional<T>> {
    static std::optional<T> parse(const std::string& s) { return Codec<T>::parse(s); }
    static std::optional<std::string> format(const std::optional<T>& x)
    {
        if (!x) return std::nullopt;
        return Codec<T>::format(*x);
    }
};
template <>
struct Codec<Boundary> {
    static Boundary parse(const std::string& s)
    {
        try {
            return boundary_from_string(s);
        } catch (const InvalidArgument&) {
            throw BadValue{"expected neumann or periodic"};
        }
    }
    static std::optional<std::string> format(Boundary b) { return to_string(b); }
};
template <>
struct Codec<PhaseKind> {
    static PhaseKind parse(const std::string& s)
    {
        try {
            return phase_kind_from_string(s);
        } catch (const InvalidArgument&) {
            throw BadValue{"expected fix3, fix2, fix1, orth2 or orth1"};
        }
    }
    static std::optional<std::string> format(PhaseKind k) { return to_string(k); }
};
template <>
struct Codec<Mu2Policy> {
    static Mu2Policy parse(const std::string& s)
    {
        try {
            return mu2_policy_from_string(s);
        } catch (const InvalidArgument&) {
            throw BadValue{"expected consistent or zero"};
        }
    }
    static std::optional<std::string> format(Mu2Policy p) { return to_string(p); }
};
template <>
struct Codec<Rows> {
    static Rows parse(const std::string& s) { return parse_rows(s); }
    static std::optional<std::string> format(const Rows& r)
    {
        if (r.empty()) return std::nullopt;
        return format_rows(r);
    }
};
template <>
struct Codec<std::vector<double>> {
    static std::vector<double> parse(const std::string& s)
    {
        auto v = parse_list(s);
        if (v.empty()) throw BadValue{"empty list"};
        return v;
    }
    static std::optional<std::string> format(const std::vector<double>& v)
    {
        if (v.empty()) return std::nullopt;
        return format_list(v);
    }
};

struct Key {
    std::string section, name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::optional<std::string>(const RunConfig&)> get;
};

template <class S, class T>
Key key(const char* section, const char* name, S RunConfig::*sec, T S::*field)
{
    return Key{section, name, [=](RunConfig& c, const std::string& v) { (c.*sec).*field = Codec<T>::parse(v); },
               [=](const RunConfig& c) { return Codec<T>::format((c.*sec).*field); }};
}

const std::vector<Key>& schema()
{
    using R = RunConfig;
    static const std::vector<Key> keys{
        key("model", "name", &R::model, &ModelSection::name),
        key("model", "eps", &R::model, &ModelSection::eps),
        key("model", "b", &R::model, &ModelSection::b),
        key("model", "rho", &R::model, &ModelSection::rho),
        key("model", "a", &R::model, &ModelSection::a),
        key("model", "phi", &R::model, &ModelSection::phi),
        key("model", "c_star", &R::model, &ModelSection::c_star),
        key("model", "M", &R::model, &ModelSection::M),
        key("model", "A", &R::model, &ModelSection::A),
        key("model", "B", &R::model, &ModelSection::B),
        key("model", "C", &R::model, &ModelSection::C),
        key("model", "L", &R::model, &ModelSection::L),
        key("model", "poly", &R::model, &ModelSection::poly),
        key("model", "v_minus", &R::model, &ModelSection::v_minus),
        key("model", "v_plus", &R::model, &ModelSection::v_plus),
        key("grid", "R", &R::grid, &GridSection::R),
        key("grid", "dx", &R::grid, &GridSection::dx),
        key("grid", "N", &R::grid, &GridSection::N),
        key("grid", "bc", &R::grid, &GridSection::bc),
        key("time", "dt", &R::time, &TimeSection::dt),
        key("time", "T", &R::time, &TimeSection::T),
        key("time", "sample_every", &R::time, &TimeSection::sample_every),
        key("time", "newton_tol", &R::time, &TimeSection::newton_tol),
        key("time", "newton_max", &R::time, &TimeSection::newton_max),
        key("time", "level", &R::time, &TimeSection::level),
        key("initial", "u0", &R::initial, &InitialSection::u0),
        key("initial", "v0", &R::initial, &InitialSection::v0),
        key("freeze", "phase", &R::freeze, &FreezeSection::phase),
        key("freeze", "template", &R::freeze, &FreezeSection::tmpl),
        key("freeze", "mu2_0", &R::freeze, &FreezeSection::mu2_0),
        key("freeze", "pc_tol", &R::freeze, &FreezeSection::pc_tol),
        key("spectrum", "mu", &R::spectrum, &SpectrumSection::mu),
        key("spectrum", "omega_max", &R::spectrum, &SpectrumSection::omega_max),
        key("spectrum", "n_samples", &R::spectrum, &SpectrumSection::n_samples),
        key("spectrum", "refine", &R::spectrum, &SpectrumSection::refine),
        key("spectrum", "size_cap", &R::spectrum, &SpectrumSection::size_cap),
        key("spectrum", "n_wanted", &R::spectrum, &SpectrumSection::n_wanted),
        key("spectrum", "shift", &R::spectrum, &SpectrumSection::shift),
        key("spectrum", "class_tol", &R::spectrum, &SpectrumSection::class_tol),
        key("spectrum", "profile", &R::spectrum, &SpectrumSection::profile),
        key("firstorder", "c", &R::firstorder, &FirstOrderSection::c),
        key("firstorder", "mu", &R::firstorder, &FirstOrderSection::mu),
        key("firstorder", "dt", &R::firstorder, &FirstOrderSection::dt),
        key("firstorder", "T", &R::firstorder, &FirstOrderSection::T),
        key("firstorder", "omega_max", &R::firstorder, &FirstOrderSection::omega_max),
        key("firstorder", "n_omega", &R::firstorder, &FirstOrderSection::n_omega),
        key("firstorder", "n_random", &R::firstorder, &FirstOrderSection::n_random),
        key("firstorder", "seed", &R::firstorder, &FirstOrderSection::seed),
        key("transfer", "k", &R::transfer, &TransferSection::k),
        key("transfer", "profile", &R::transfer, &TransferSection::profile),
        key("transfer", "mu", &R::transfer, &TransferSection::mu),
        key("output", "dir", &R::output, &OutputSection::dir),
    };
    return keys;
}

const Key* find_key(const std::string& section, const std::string& name)
{
    for (const Key& k : schema())
        if (k.section == section && k.name == name) return &k;
    return nullptr;
}

bool known_section(const std::string& s)
{
    for (const Key& k : schema())
        if (k.section == s) return true;
    return false;
}

void assign(RunConfig& cfg, const Key& k, const std::string& value, const std::string& where)
{
    try {
        k.set(cfg, value);
    } catch (const BadValue& e) {
        throw ConfigError(where + k.section + "." + k.name + " = '" + value + "': " + e.reason);
    }
}

[[noreturn]] void bad(const std::string& key, const std::string& reason)
{
    throw ConfigError(key + ": " + reason);
}

bool is_builtin_source(const std::string& s, std::initializer_list<const char*> names)
{
    for (const char* n : names)
        if (s == n) return true;
    return false;
}

void check_file(const std::string& key, const std::string& path)
{
    if (!std::filesystem::is_regular_file(path)) bad(key, "file '" + path + "' does not exist");
}

bool divides(double whole, double part)
{
    const double q = whole / part;
    return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q);
}

Mat to_mat(const Rows& r, Eigen::Index m)
{
    if (r.empty()) return Mat::Zero(m, m);
    Mat out(Eigen::Index(r.size()), Eigen::Index(r.front().size()));
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < r[i].size(); ++j) out(Eigen::Index(i), Eigen::Index(j)) = r[i][j];
    return out;
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), Eigen::Index(v.size())); }

void validate_model(const ModelSection& s)
{
    const auto positive = [](const char* name, const std::optional<double>& x) {
        if (x && !(*x > 0.0)) bad(std::string("model.") + name, "must be positive");
    };
    if (s.name == "nagumo") {
        positive("eps", s.eps);
        if (s.b && !(*s.b > 0.0 && *s.b < 1.0)) bad("model.b", "must lie in (0, 1)");
    } else if (s.name == "fhn-pulse" || s.name == "fhn-front") {
        for (auto [n, x] : {std::pair{"eps", s.eps}, {"b", s.b}, {"rho", s.rho}, {"a", s.a}, {"phi", s.phi}})
            positive(n, x);
    } else if (s.name == "custom") {
        if (s.M.empty()) bad("model.M", "required for a custom model");
        const std::size_t m = s.M.size();
        const auto square = [m](const char* name, const Rows& r, bool required) {
            if (r.empty() && !required) return;
            if (r.size() != m || r.front().size() != m)
                bad(std::string("model.") + name, "must be " + std::to_string(m) + " x " + std::to_string(m));
        };
        square("M", s.M, true);
        square("A", s.A, true);
        square("B", s.B, false);
        square("C", s.C, false);
        square("L", s.L, false);
        if (s.poly.size() != m || s.poly.front().size() != 4)
            bad("model.poly", "must be " + std::to_string(m) + " x 4");
        if (s.v_minus.empty() != s.v_plus.empty()) bad("model.v_minus", "v_minus and v_plus go together");
        if (!s.v_minus.empty() && s.v_minus.size() != m) bad("model.v_minus", "must have " + std::to_string(m) + " entries");
        if (!s.v_plus.empty() && s.v_plus.size() != m) bad("model.v_plus", "must have " + std::to_string(m) + " entries");
    } else {
        bad("model.name", "unknown model '" + s.name + "' (nagumo, fhn-pulse, fhn-front, custom)");
    }
    if (s.name != "custom") {
        for (auto [n, r] : {std::pair{"M", &s.M}, {"A", &s.A}, {"B", &s.B}, {"C", &s.C}, {"L", &s.L}, {"poly", &s.poly}})
            if (!r->empty()) bad(std::string("model.") + n, "only allowed for a custom model");
    }
}

}  // namespace

RunConfig parse_config(std::istream& is, const std::string& origin)
{
    RunConfig cfg;
    std::string line, section;
    std::map<std::string, int> seen;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno) + ": ";
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!known_section(section)) throw ConfigError(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        const std::string name = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError(where + "key '" + name + "' outside of a section");
        const Key* k = find_key(section, name);
        if (!k) throw ConfigError(where + "unknown key '" + name + "' in section [" + section + "]");
        const std::string full = section + "." + name;
        if (seen.count(full)) throw ConfigError(where + "duplicate key " + full);
        seen[full] = lineno;
        assign(cfg, *k, value, where);
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

void apply_override(RunConfig& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "': expected key=value");
    const std::string lhs = trim(assignment.substr(0, eq)), value = trim(assignment.substr(eq + 1));
    const Key* k = nullptr;
    const auto dot = lhs.find('.');
    if (dot != std::string::npos) {
        k = find_key(lhs.substr(0, dot), lhs.substr(dot + 1));
    } else {
        for (const Key& c : schema()) {
            if (c.name != lhs) continue;
            if (k) throw ConfigError("override '" + assignment + "': key '" + lhs + "' is ambiguous, use section." + lhs);
            k = &c;
        }
    }
    if (!k) throw ConfigError("override '" + assignment + "': unknown key '" + lhs + "'");
    assign(cfg, *k, value, "override: ");
}

void write_config(std::ostream& os, const RunConfig& cfg)
{
    std::string section;
    for (const Key& k : schema()) {
        const auto v = k.get(cfg);
        if (!v) continue;
        if (k.section != section) {
            if (!section.empty()) os << '\n';
            section = k.section;
            os << '[' << section << "]\n";
        }
        os << k.name << " = " << *v << '\n';
    }
}

void validate(const RunConfig& cfg)
{
    validate_model(cfg.model);

    const GridSection& g = cfg.grid;
    if (!(g.R > 0.0)) bad("grid.R", "must be positive");
    if (g.dx && g.N) bad("grid.dx", "give either dx or N, not both");
    if (g.dx) {
        if (!(*g.dx > 0.0)) bad("grid.dx", "must be positive");
        if (!divides(2.0 * g.R, *g.dx)) bad("grid.dx", "must divide 2R");
        const double n = std::round(2.0 * g.R / *g.dx) + (g.bc == Boundary::Neumann ? 1 : 0);
        if (n < 5) bad("grid.dx", "gives fewer than 5 nodes");
    }
    if (g.N && *g.N < 5) bad("grid.N", "must be at least 5");

    const TimeSection& t = cfg.time;
    if (!(t.dt > 0.0)) bad("time.dt", "must be positive");
    if (!(t.T >= 0.0)) bad("time.T", "must be nonnegative");
    if (!divides(t.T, t.dt)) bad("time.T", "must be a multiple of dt");
    if (t.sample_every < 1) bad("time.sample_every", "must be at least 1");
    if (!(t.newton_tol > 0.0)) bad("time.newton_tol", "must be positive");
    if (t.newton_max < 1) bad("time.newton_max", "must be at least 1");

    const std::string& u0 = cfg.initial.u0;
    if (u0 == "exact-front" && cfg.model.name != "nagumo") bad("initial.u0", "exact-front needs the nagumo model");
    if (!is_builtin_source(u0, {"arctan", "exact-front"})) check_file("initial.u0", u0);

    if (!is_builtin_source(cfg.initial.v0, {"zero", "slow"})) bad("initial.v0", "expected zero or slow");

    if (cfg.freeze.tmpl != "initial") check_file("freeze.template", cfg.freeze.tmpl);
    if (!(cfg.freeze.pc_tol > 0.0)) bad("freeze.pc_tol", "must be positive");

    const SpectrumSection& s = cfg.spectrum;
    if (!(s.omega_max > 0.0)) bad("spectrum.omega_max", "must be positive");
    if (s.n_samples < 3) bad("spectrum.n_samples", "must be at least 3");
    if (s.refine < 0) bad("spectrum.refine", "must be nonnegative");
    if (s.size_cap < 1) bad("spectrum.size_cap", "must be positive");
    if (s.n_wanted < 1) bad("spectrum.n_wanted", "must be positive");
    if (!(s.class_tol > 0.0)) bad("spectrum.class_tol", "must be positive");
    if (!is_builtin_source(s.profile, {"solve", "exact-front"})) check_file("spectrum.profile", s.profile);

    const FirstOrderSection& f = cfg.firstorder;
    if (!(f.dt > 0.0)) bad("firstorder.dt", "must be positive");
    if (!(f.T >= 2.0 * f.dt)) bad("firstorder.T", "must be at least two steps");
    if (!divides(f.T, f.dt)) bad("firstorder.T", "must be a multiple of dt");
    if (!(f.omega_max > 0.0)) bad("firstorder.omega_max", "must be positive");
    if (f.n_omega < 1) bad("firstorder.n_omega", "must be positive");
    if (f.n_random < 1) bad("firstorder.n_random", "must be positive");

    if (cfg.transfer.k && !(*cfg.transfer.k > 0.0)) bad("transfer.k", "must be positive");
    if (cfg.transfer.profile != "exact-front") check_file("transfer.profile", cfg.transfer.profile);

    if (cfg.output.dir.empty()) bad("output.dir", "must not be empty");
}

ModelSpec build_model(const ModelSection& s)
{
    if (s.name == "nagumo") return nagumo_wave_model(s.eps.value_or(0.25), s.b.value_or(0.25));
    if (s.name == "fhn-pulse" || s.name == "fhn-front") {
        const bool pulse = s.name == "fhn-pulse";
        FhnParams p = pulse ? fhn_pulse_params() : fhn_front_params();
        p.eps = s.eps.value_or(p.eps);
        p.b = s.b.value_or(p.b);
        p.rho = s.rho.value_or(p.rho);
        p.a = s.a.value_or(p.a);
        p.phi = s.phi.value_or(p.phi);
        p.c_star = s.c_star.value_or(p.c_star);
        const FhnStates st = polish_fhn_states(p, pulse ? fhn_pulse_state_guess() : fhn_front_state_guess());
        return fhn_wave_model(p, AsymptoticStates{st.minus.polished, st.plus.polished});
    }
    if (s.name == "custom") {
        const auto m = Eigen::Index(s.M.size());
        PolynomialModelParams p;
        p.M = to_mat(s.M, m);
        p.A = to_mat(s.A, m);
        p.B = to_mat(s.B, m);
        p.C = to_mat(s.C, m);
        p.L = to_mat(s.L, m);
        p.poly = to_mat(s.poly, m);
        if (!s.v_minus.empty()) p.states = AsymptoticStates{to_vec(s.v_minus), to_vec(s.v_plus)};
        return polynomial_model("custom", p);
    }
    throw ConfigError("model.name: unknown model '" + s.name + "'");
}

Grid1D build_grid(const GridSection& s)
{
    if (s.N) return s.bc == Boundary::Periodic ? Grid1D::periodic(s.R, *s.N) : Grid1D::neumann(s.R, *s.N);
    return Grid1D::with_spacing(s.R, s.dx.value_or(0.1), s.bc);
}

TimeStepperConfig build_time(const TimeSection& s)
{
    TimeStepperConfig t;
    t.dt = s.dt;
    t.T = s.T;
    t.sample_every = s.sample_every;
    t.newton_tol = s.newton_tol;
    t.newton_max = s.newton_max;
    t.level = s.level;
    return t;
}

std::optional<double> reference_speed(const ModelSection& s)
{
    if (s.name == "nagumo") return nagumo_exact_front(s.eps.value_or(0.25), s.b.value_or(0.25)).mu;
    if (s.name == "fhn-pulse" || s.name == "fhn-front") {
        const FhnParams p = s.name == "fhn-pulse" ? fhn_pulse_params() : fhn_front_params();
        const double eps = s.eps.value_or(p.eps), c = s.c_star.value_or(p.c_star);
        return c / std::sqrt(1.0 + eps * c * c);
    }
    return std::nullopt;
}

}  // namespace dampwave
