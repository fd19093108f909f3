#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "dampwave/types.hpp"

namespace dampwave {

enum class Boundary { Neumann, Periodic };

std::string to_string(Boundary bc);
Boundary boundary_from_string(const std::string& s);

// Uniform grid on [-R, R].
// Neumann: N nodes including both ends, dx = 2R/(N-1).
// Periodic: N cell-centred nodes -R + (i+1/2)dx, dx = 2R/N, so the node set
// is symmetric about 0 and the point -R ~ R is never duplicated.
class Grid1D {
public:
    static Grid1D neumann(double R, int N);
    static Grid1D periodic(double R, int N);
    // N derived from dx; the spacing has to divide 2R.
    static Grid1D with_spacing(double R, double dx, Boundary bc);

    double R() const { return R_; }
    int N() const { return N_; }
    double dx() const { return dx_; }
    Boundary bc() const { return bc_; }
    bool periodic() const { return bc_ == Boundary::Periodic; }

    double node(int i) const;
    Vec nodes() const;
    // Quadrature weight of node i: trapezoid (Neumann) or rectangle (periodic).
    double weight(int i) const;

    // Same node set and closure, up to round-off in R and dx.
    bool operator==(const Grid1D& o) const;

private:
    Grid1D(double R, int N, double dx, Boundary bc) : R_(R), N_(N), dx_(dx), bc_(bc) {}
    double R_ = 1.0;
    int N_ = 5;
    double dx_ = 0.5;
    Boundary bc_ = Boundary::Neumann;
};

// m-vector valued samples, stored node-major: values[i*m + c].
template <class Scalar>
struct BasicGridFunction {
    using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Grid1D grid;
    int m = 1;
    Values values;

    BasicGridFunction(const Grid1D& g, int m_) : grid(g), m(m_), values(Values::Zero(Eigen::Index(g.N()) * m_)) {}
    BasicGridFunction(const Grid1D& g, int m_, Values v);

    int N() const { return grid.N(); }
    Scalar& at(int i, int c) { return values[Eigen::Index(i) * m + c]; }
    const Scalar& at(int i, int c) const { return values[Eigen::Index(i) * m + c]; }
    auto node_values(int i) { return values.segment(Eigen::Index(i) * m, m); }
    auto node_values(int i) const { return values.segment(Eigen::Index(i) * m, m); }
    Values component(int c) const;
};

using GridFunction = BasicGridFunction<double>;
using CGridFunction = BasicGridFunction<cplx>;

GridFunction sample(const Grid1D& grid, int m, const std::function<Vec(double)>& fn);
GridFunction constant(const Grid1D& grid, const Vec& value);

GridFunction d1(const GridFunction& u);
GridFunction d2(const GridFunction& u);
CGridFunction d1(const CGridFunction& u);

// Same stencils as d1/d2, as (mN)x(mN) sparse matrices acting on node-major vectors.
SpMat d1_matrix(const Grid1D& grid, int m);
SpMat d2_matrix(const Grid1D& grid, int m);
// Quadrature weights repeated per component, so inner(u,w) = u^T diag(W) w.
Vec weight_vector(const Grid1D& grid, int m);

double inner(const GridFunction& u, const GridFunction& w);
// Conjugate-linear in the first argument.
cplx inner(const CGridFunction& u, const CGridFunction& w);
double norm(const GridFunction& u);
double norm(const CGridFunction& u);

// Cubic interpolation of u at xi_i - shift.
GridFunction resample(const GridFunction& u, double shift);
// Same interpolation at the nodes of another grid.
GridFunction interpolate_to(const GridFunction& u, const Grid1D& target);

// Neumann grid whose nodes coincide with those of a periodic grid.
Grid1D neumann_on_same_nodes(const Grid1D& periodic);
// Reattach the values of u to a grid with the same nodes but possibly another closure.
GridFunction rebind(const GridFunction& u, const Grid1D& target);

void check_same_layout(const Grid1D& a, int ma, const Grid1D& b, int mb);

// CSV with header xi,u1,...,um.
void write_csv(std::ostream& os, const GridFunction& u);
// Complex data as xi,re_u1,im_u1,...
void write_csv(std::ostream& os, const CGridFunction& u);
// The grid is reconstructed from the node column; bc has to be supplied.
GridFunction read_csv(std::istream& is, Boundary bc);

}  // namespace dampwave
