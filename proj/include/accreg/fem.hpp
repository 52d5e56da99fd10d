#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "accreg/cg.hpp"
#include "accreg/kernels.hpp"
#include "accreg/mesh.hpp"
#include "accreg/sparse.hpp"

namespace accreg {

// Piecewise-constant coefficients of -div(D grad u) + mu_a u. A field of
// length one is a global constant; otherwise it holds one value per triangle.
struct Coefficients {
    Vector D{1.0};
    Vector mu_a{1.0};
    double robin_a = 3.2;

    static Coefficients constant(double D, double mu_a, double robin_a = 3.2);
    // D = 1 / (3 (mu_a + mu_s')).
    static Coefficients blt(double mu_a = 0.04, double mu_s_prime = 1.5, double robin_a = 3.2);

    double diffusion(std::size_t triangle) const { return D.size() == 1 ? D[0] : D[triangle]; }
    double absorption(std::size_t triangle) const {
        return mu_a.size() == 1 ? mu_a[0] : mu_a[triangle];
    }
    void validate(std::size_t num_triangles) const;
};

using ElementMatrix = std::array<std::array<double, 3>, 3>;

// Exact P1 integrals of D grad(phi_i) . grad(phi_j) and c phi_i phi_j.
// Throw std::invalid_argument for a degenerate triangle.
ElementMatrix element_stiffness(const Point& a, const Point& b, const Point& c, double D);
ElementMatrix element_mass(const Point& a, const Point& b, const Point& c, double coef);

// Assembled P1 system. Boundary vectors are indexed by position in
// `boundary`, source vectors by position in `omega0`.
struct FemSystem {
    std::shared_ptr<const Mesh> mesh;
    Coefficients coeff;

    CsrMatrix S;   // stiffness
    CsrMatrix M;   // mu_a mass
    CsrMatrix C;   // plain mass
    CsrMatrix L;   // S + M
    CsrMatrix B;   // boundary mass, int_Gamma phi_i phi_j
    CsrMatrix M0;  // source coupling, n x n0
    CsrMatrix C0;  // Gram matrix of the source space, n0 x n0

    std::vector<std::size_t> boundary;
    std::vector<std::size_t> interior;
    std::vector<std::size_t> omega0;

    CsrMatrix L_ib;  // L(interior, boundary)
    PcgSolver neumann_solver;
    PcgSolver dirichlet_solver;  // on L(interior, interior)
    PcgSolver robin_solver;      // on L + B / (2A)

    std::size_t num_nodes() const { return C.rows; }
    std::size_t num_sources() const { return omega0.size(); }

    // Lift of a boundary vector to all nodes (zero in the interior).
    Vector lift_boundary(std::span<const double> g) const;
    Vector restrict_boundary(std::span<const double> u) const;
    Vector restrict_omega0(std::span<const double> u) const;
    // z = B g for a nodal boundary flux density.
    Vector boundary_load(std::span<const double> g2) const;
};

// Throws std::invalid_argument naming the element for a degenerate triangle.
FemSystem assemble(std::shared_ptr<const Mesh> mesh, const Coefficients& coeff,
                   const CgOptions& cg = {});

// L u = M0 f with u = g1 on the boundary.
Vector solve_dirichlet(const FemSystem& sys, std::span<const double> f, std::span<const double> g1);
// L u = M0 f + B g2.
Vector solve_neumann(const FemSystem& sys, std::span<const double> f, std::span<const double> g2);
// (L + B / (2A)) u = M0 f + B g_minus / (2A).
Vector solve_robin(const FemSystem& sys, std::span<const double> f,
                   std::span<const double> g_minus);

// General right-hand sides on all nodes.
Vector solve_dirichlet_rhs(const FemSystem& sys, std::span<const double> rhs,
                           std::span<const double> g1);
Vector solve_neumann_rhs(const FemSystem& sys, std::span<const double> rhs);

// Nodal interpolant of a function on Omega0 nodes or on all nodes.
template <class F>
Vector interpolate_omega0(const FemSystem& sys, F&& fn) {
    Vector out;
    out.reserve(sys.omega0.size());
    for (std::size_t i : sys.omega0) out.push_back(fn(sys.mesh->nodes[i]));
    return out;
}
template <class F>
Vector interpolate(const Mesh& mesh, F&& fn) {
    Vector out;
    out.reserve(mesh.nodes.size());
    for (const Point& p : mesh.nodes) out.push_back(fn(p));
    return out;
}

// sqrt(e^T C e) for a nodal field.
double l2_norm(const FemSystem& sys, std::span<const double> u);

}  // namespace accreg
