#include "dampwave/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "dampwave/csv.hpp"
#include "dampwave/errors.hpp"

namespace dampwave {

namespace {

constexpr cplx I1{0.0, 1.0};

bool re_im_less(const cplx& a, const cplx& b)
{
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

double max_re(const CVec& z) { return z.real().maxCoeff(); }

}  // namespace

std::string to_string(Side s) { return s == Side::Minus ? "minus" : "plus"; }

// ---- symbol ----

SymbolPencil::SymbolPencil(const ModelSpec& model, double mu, Side side) : mu_(mu), side_(side)
{
    const AsymptoticStates& st = model.require_states();
    const Vec& u = side == Side::Minus ? st.v_minus : st.v_plus;
    const Vec z = Vec::Zero(model.m());
    M_ = model.M();
    A_ = model.A();
    J_ = model.jacobians(u, z, z);
}

SymbolPencil::SymbolPencil(const Mat& M, const Mat& A, const PointJacobians& J, double mu, Side side)
    : M_(M), A_(A), J_(J), mu_(mu), side_(side)
{
    const auto n = M.rows();
    if (M.cols() != n || A.rows() != n || A.cols() != n || J.d1.rows() != n || J.d2.rows() != n || J.d3.rows() != n)
        throw InvalidArgument("symbol pencil: inconsistent block sizes");
}

CMat SymbolPencil::A1(double omega) const
{
    return -J_.d3.cast<cplx>() - 2.0 * I1 * omega * mu_ * M_.cast<cplx>();
}

CMat SymbolPencil::A0(double omega) const
{
    const Mat K = A_ - mu_ * mu_ * M_;
    return (omega * omega * K - J_.d1).cast<cplx>() + I1 * omega * (mu_ * J_.d3 - J_.d2).cast<cplx>();
}

CMat SymbolPencil::matrix(cplx lambda, double omega) const
{
    return lambda * lambda * M_.cast<cplx>() + lambda * A1(omega) + A0(omega);
}

CVec symbol_eigs(const SymbolPencil& p, double omega)
{
    const int m = p.m();
    const CMat Minv = p.A2().inverse().cast<cplx>();
    CMat C = CMat::Zero(2 * m, 2 * m);
    C.topRightCorner(m, m) = CMat::Identity(m, m);
    C.bottomLeftCorner(m, m) = -Minv * p.A0(omega);
    C.bottomRightCorner(m, m) = -Minv * p.A1(omega);
    Eigen::ComplexEigenSolver<CMat> es(C, false);
    CVec ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), re_im_less);
    return ev;
}

// ---- dispersion curves ----

namespace {

// Permutation of `next` closest to `prev` in total distance.
std::vector<int> match_branches(const CVec& prev, const CVec& next)
{
    const int n = int(prev.size());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    if (n <= 4) {
        std::vector<int> best = perm;
        double best_cost = INFINITY;
        do {
            double cost = 0.0;
            for (int j = 0; j < n; ++j) cost += std::abs(prev[j] - next[perm[j]]);
            if (cost < best_cost) {
                best_cost = cost;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }
    std::vector<bool> used(n, false);
    for (int j = 0; j < n; ++j) {
        int k_best = -1;
        double d_best = INFINITY;
        for (int k = 0; k < n; ++k) {
            if (used[k]) continue;
            const double d = std::abs(prev[j] - next[k]);
            if (d < d_best) {
                d_best = d;
                k_best = k;
            }
        }
        used[k_best] = true;
        perm[j] = k_best;
    }
    return perm;
}

// Golden section maximization of max Re lambda on [a, b].
double refine_maximum(const SymbolPencil& p, double a, double b)
{
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = max_re(symbol_eigs(p, x1)), f2 = max_re(symbol_eigs(p, x2));
    for (int it = 0; it < 80 && b - a > 1e-12 * std::max(1.0, std::abs(a)); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = max_re(symbol_eigs(p, x2));
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = max_re(symbol_eigs(p, x1));
        }
    }
    return 0.5 * (a + b);
}

std::vector<double> sample_omegas(const SymbolPencil& p, const DispersionOptions& o)
{
    if (o.omega_max == 0.0) return {0.0};
    const int n = o.n_samples;
    std::vector<double> w(n);
    for (int k = 0; k < n; ++k) w[k] = -o.omega_max + 2.0 * o.omega_max * k / (n - 1);

    std::vector<double> h(n);
    for (int k = 0; k < n; ++k) h[k] = max_re(symbol_eigs(p, w[k]));
    const double scale = std::max(1.0, *std::max_element(h.begin(), h.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    }));

    // Strict local maxima only; flat stretches carry round-off bumps.
    std::vector<int> peaks;
    for (int k = 0; k < n; ++k) {
        const double left = k > 0 ? h[k - 1] : -INFINITY;
        const double right = k + 1 < n ? h[k + 1] : -INFINITY;
        const double tol = 1e-10 * scale;
        if (h[k] >= left && h[k] >= right && (h[k] > left + tol || h[k] > right + tol)) peaks.push_back(k);
    }
    std::sort(peaks.begin(), peaks.end(), [&](int a, int b) { return h[a] > h[b]; });
    if (peaks.size() > 8) peaks.resize(8);

    std::vector<double> extra;
    for (int k : peaks) {
        const double a = w[std::max(k - 1, 0)], b = w[std::min(k + 1, n - 1)];
        const int sub = std::max(o.refine, 1) * 2;
        for (int j = 1; j < sub; ++j) extra.push_back(a + (b - a) * j / sub);
        extra.push_back(refine_maximum(p, a, b));
    }
    // Mirror the refinement so the sample set stays symmetric under omega -> -omega.
    const std::size_t n_extra = extra.size();
    for (std::size_t j = 0; j < n_extra; ++j) extra.push_back(-extra[j]);
    w.insert(w.end(), extra.begin(), extra.end());
    std::sort(w.begin(), w.end());
    w.erase(std::unique(w.begin(), w.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }), w.end());
    return w;
}

}  // namespace

DispersionCurve dispersion_curves(const std::vector<SymbolPencil>& pencils, const DispersionOptions& opts)
{
    if (pencils.empty()) throw InvalidArgument("dispersion curves: no pencils");
    if (!(opts.omega_max >= 0.0)) throw InvalidArgument("dispersion curves: omega_max must be nonnegative");
    if (opts.omega_max > 0.0 && opts.n_samples < 3) throw InvalidArgument("dispersion curves: n_samples must be at least 3");
    if (!(opts.swap_threshold > 0.0)) throw InvalidArgument("dispersion curves: swap_threshold must be positive");

    DispersionCurve out;
    for (const SymbolPencil& p : pencils) {
        DispersionBranches br;
        br.side = p.side();
        br.omegas = sample_omegas(p, opts);
        br.lambda.reserve(br.omegas.size());
        for (std::size_t k = 0; k < br.omegas.size(); ++k) {
            CVec ev = symbol_eigs(p, br.omegas[k]);
            if (k > 0) {
                const CVec& prev = br.lambda.back();
                const std::vector<int> perm = match_branches(prev, ev);
                CVec matched(ev.size());
                for (int j = 0; j < ev.size(); ++j) matched[j] = ev[perm[j]];
                const double step = (matched - prev).cwiseAbs().maxCoeff();
                const double scale = std::max(1.0, prev.cwiseAbs().maxCoeff());
                if (step > opts.swap_threshold * scale)
                    out.warnings.push_back("possible branch swap on side " + to_string(p.side()) + " near omega = " +
                                           csv::number(br.omegas[k]) + " (step " + csv::number(step) + ")");
                br.max_step = std::max(br.max_step, step);
                ev = matched;
            }
            br.lambda.push_back(std::move(ev));
        }
        out.sides.push_back(std::move(br));
    }
    return out;
}

DispersionCurve dispersion_curves(const ModelSpec& model, double mu, const DispersionOptions& opts)
{
    return dispersion_curves({SymbolPencil(model, mu, Side::Minus), SymbolPencil(model, mu, Side::Plus)}, opts);
}

std::vector<cplx> DispersionCurve::points() const
{
    std::vector<cplx> pts;
    for (const auto& s : sides)
        for (const auto& l : s.lambda) pts.insert(pts.end(), l.data(), l.data() + l.size());
    return pts;
}

DispersionCurve::Extreme DispersionCurve::rightmost() const
{
    if (sides.empty()) throw InvalidArgument("dispersion curve is empty");
    Extreme e{cplx(-INFINITY, 0.0), 0.0, Side::Minus};
    for (const auto& s : sides)
        for (std::size_t k = 0; k < s.omegas.size(); ++k)
            for (int j = 0; j < s.lambda[k].size(); ++j)
                if (s.lambda[k][j].real() > e.lambda.real()) e = {s.lambda[k][j], s.omegas[k], s.side};
    return e;
}

void write_csv(std::ostream& os, const DispersionCurve& c)
{
    csv::Writer w(os, {"sign", "omega", "branch", "re_lambda", "im_lambda"});
    for (const auto& s : c.sides)
        for (std::size_t k = 0; k < s.omegas.size(); ++k)
            for (int j = 0; j < s.lambda[k].size(); ++j) {
                w << (s.side == Side::Minus ? -1 : 1) << s.omegas[k] << j << s.lambda[k][j].real()
                  << s.lambda[k][j].imag();
                w.end_row();
            }
}

GapReport spectral_gap(const DispersionCurve& c)
{
    const auto e = c.rightmost();
    GapReport g{-e.lambda.real(), e.lambda, e.omega, e.side, false};
    g.has_gap = g.beta > 1e-9;
    return g;
}

// ---- scalar closed form ----

ScalarDispersion scalar_dispersion(double a, double eta, double delta, double mu)
{
    if (!(a > 0.0 && eta > 0.0 && delta > 0.0)) throw InvalidArgument("scalar dispersion: a, eta, delta must be positive");
    ScalarDispersion s{a, eta, delta, mu, -0.5 * eta, false};
    const double disc = 0.25 * eta * eta - delta;
    s.rightmost = s.line_re;
    if (disc > 0.0) {
        s.has_ellipse = true;
        s.omega0 = std::sqrt(disc / a);
        s.p1 = std::sqrt(a) * s.omega0;
        s.p2 = std::abs(mu) * s.omega0;
        s.rightmost = s.line_re + std::sqrt(disc);
    }
    return s;
}

std::array<cplx, 2> ScalarDispersion::roots(double omega) const
{
    const cplx r = std::sqrt(cplx(0.25 * eta * eta - delta - a * omega * omega, 0.0));
    const cplx shift(line_re, omega * mu);
    return {shift - r, shift + r};
}

double hausdorff_distance(const std::vector<cplx>& a, const std::vector<cplx>& b)
{
    if (a.empty() || b.empty()) throw InvalidArgument("hausdorff distance of an empty set");
    auto directed = [](const std::vector<cplx>& p, const std::vector<cplx>& q) {
        double worst = 0.0;
        for (const cplx& x : p) {
            double best = INFINITY;
            for (const cplx& y : q) best = std::min(best, std::abs(x - y));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

double alternate_nagumo_gap(double eps, double b)
{
    return (1.0 - std::sqrt(1.0 - 4.0 * eps * eps * std::min(b, 1.0 - b))) / (2.0 * eps);
}

std::array<cplx, 5> fhn_quartic_coeffs(const FhnParams& p, double mu, double v1, double omega)
{
    const double e = p.eps;
    const double a22 = fhn_a22(p);
    const cplx pw = 1.0 - 2.0 * I1 * omega * mu * e;
    const cplx q1 = omega * omega * (1.0 - mu * mu * e) - I1 * omega * mu - (1.0 - v1 * v1);
    const cplx q2 = omega * omega * (a22 - mu * mu * e) - I1 * omega * mu + p.b * p.phi;
    return {q1 * q2 + p.phi, pw * (q1 + q2), e * (q1 + q2) + pw * pw, 2.0 * e * pw, cplx(e * e, 0.0)};
}

}  // namespace dampwave
