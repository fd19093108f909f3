#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dampwave/grid.hpp"
#include "dampwave/model.hpp"

namespace dampwave {

enum class Side { Minus, Plus };
std::string to_string(Side s);

// Symbol of the pencil with coefficients frozen at an asymptotic state:
//   lambda^2 A2 + lambda A1(omega) + A0(omega),
//   A2 = M, A1 = -D3f - 2 i omega mu M,
//   A0 = omega^2 (A - mu^2 M) + i omega (mu D3f - D2f) - D1f.
class SymbolPencil {
public:
    SymbolPencil(const ModelSpec& model, double mu, Side side);
    SymbolPencil(const Mat& M, const Mat& A, const PointJacobians& J, double mu, Side side = Side::Minus);

    int m() const { return int(M_.rows()); }
    double mu() const { return mu_; }
    Side side() const { return side_; }
    const Mat& A2() const { return M_; }
    CMat A1(double omega) const;
    CMat A0(double omega) const;
    CMat matrix(cplx lambda, double omega) const;

private:
    Mat M_, A_;
    PointJacobians J_;
    double mu_;
    Side side_;
};

// All 2m roots of det(symbol) = 0 via the companion matrix, sorted by (re, im).
CVec symbol_eigs(const SymbolPencil& p, double omega);

struct DispersionOptions {
    double omega_max = 10.0;
    int n_samples = 801;
    int refine = 4;               // subdivision factor next to local maxima of Re lambda
    double swap_threshold = 0.5;  // largest accepted branch move between samples, relative to max(1, |lambda|)
};

struct DispersionBranches {
    Side side;
    std::vector<double> omegas;  // increasing
    std::vector<CVec> lambda;    // lambda[k][j]: branch j at omegas[k]
    double max_step = 0.0;       // largest matched move between neighbouring samples
};

struct DispersionCurve {
    std::vector<DispersionBranches> sides;
    std::vector<std::string> warnings;  // possible branch swaps

    std::vector<cplx> points() const;
    // Rightmost point over all branches and its location.
    struct Extreme {
        cplx lambda;
        double omega;
        Side side;
    };
    Extreme rightmost() const;
};

DispersionCurve dispersion_curves(const std::vector<SymbolPencil>& pencils, const DispersionOptions& opts = {});
// Both asymptotic states of the model.
DispersionCurve dispersion_curves(const ModelSpec& model, double mu, const DispersionOptions& opts = {});

void write_csv(std::ostream& os, const DispersionCurve& c);

struct GapReport {
    double beta;  // -max Re lambda
    cplx rightmost;
    double omega;
    Side side;
    bool has_gap;  // false means no spectral gap on the sampled set
};
GapReport spectral_gap(const DispersionCurve& c);

// Scalar case lambda^2 + (eta - 2 i omega mu) lambda + (a - mu^2) omega^2 - i omega mu eta + delta = 0,
// i.e. lambda = nu + i omega mu with nu^2 + eta nu + a omega^2 + delta = 0.
struct ScalarDispersion {
    double a, eta, delta, mu;
    double line_re;                // -eta/2
    bool has_ellipse;              // eta^2 > 4 delta
    double omega0 = 0.0;           // ((eta^2/4 - delta)/a)^(1/2)
    double p1 = 0.0, p2 = 0.0;     // semiaxes along Re and Im
    double rightmost = 0.0;        // -eta/2 + (eta^2/4 - delta)^(1/2), or line_re
    std::array<cplx, 2> roots(double omega) const;
};
ScalarDispersion scalar_dispersion(double a, double eta, double delta, double mu);

// Symmetric Hausdorff distance between two finite point sets.
double hausdorff_distance(const std::vector<cplx>& a, const std::vector<cplx>& b);

// Alternate closed form for the Nagumo gap; it does not agree with the
// rightmost ellipse point (it matches 4 eps min(b, 1-b) under the root, not 4 eps^2).
double alternate_nagumo_gap(double eps, double b);

// Coefficients a0..a4 of the FitzHugh-Nagumo quartic at one rest state.
std::array<cplx, 5> fhn_quartic_coeffs(const FhnParams& p, double mu, double v1, double omega);

// ---- discrete pencil and its eigenvalues ----

struct DiscretePencil {
    Grid1D grid;
    int m;
    double mu;
    SpMat P2, P1, P0;
    // Symbols at the asymptotic states, used to classify eigenvalues.
    std::vector<SymbolPencil> limits;
    CSpMat at(cplx lambda) const;
};

// Periodic grid only. Coefficients are evaluated at (v, D1 v, -mu D1 v).
DiscretePencil assemble_discrete_pencil(const ModelSpec& model, const GridFunction& v, double mu);

enum class EigenClass { NearPoint, NearEssential };
std::string to_string(EigenClass c);

struct SpectrumResult {
    CVec eigenvalues;
    CMat eigenvectors;  // columns, node-major, unit discrete L2 norm
    Vec residuals;      // ||P(lambda) w|| / ||w|| in the discrete L2 norm
    std::vector<EigenClass> classes;
    Grid1D grid;
    int m;

    CGridFunction eigenfunction(int k) const;
    // Index of the eigenvalue closest to z.
    int nearest(cplx z) const;
};

struct QepOptions {
    int size_cap = 2000;                // largest mN handled densely
    std::optional<cplx> shift;          // shift-invert Arnoldi around this point
    int n_wanted = 20;                  // eigenvalues returned by the shift-invert path
    double class_tol = 0.05;            // distance to the dispersion samples for NearEssential
    double arnoldi_tol = 1e-10;
};

SpectrumResult solve_quadratic_eigproblem(const DiscretePencil& pencil, const QepOptions& opts = {},
                                          const DispersionCurve* curves = nullptr);

void write_csv(std::ostream& os, const SpectrumResult& r);

// Eigenvalues within tol of the segment Re = line_re, |Im| <= half_height.
int count_near_segment(const CVec& eigenvalues, double line_re, double half_height, double tol);

// Cosine of the angle between two grid functions in the discrete L2 product.
double cosine(const CGridFunction& a, const CGridFunction& b);

}  // namespace dampwave
