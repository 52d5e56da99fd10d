#include "accreg/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace accreg {

Coefficients Coefficients::constant(double D, double mu_a, double robin_a) {
    Coefficients c;
    c.D = {D};
    c.mu_a = {mu_a};
    c.robin_a = robin_a;
    return c;
}

Coefficients Coefficients::blt(double mu_a, double mu_s_prime, double robin_a) {
    return constant(1.0 / (3.0 * (mu_a + mu_s_prime)), mu_a, robin_a);
}

void Coefficients::validate(std::size_t num_triangles) const {
    auto check = [&](const Vector& v, const char* name) {
        if (v.size() != 1 && v.size() != num_triangles)
            throw std::invalid_argument(std::string("Coefficients: ") + name +
                                        " must be scalar or one value per triangle");
        for (double x : v)
            if (!(x > 0.0) || !std::isfinite(x))
                throw std::invalid_argument(std::string("Coefficients: ") + name +
                                            " must be positive");
    };
    check(D, "D");
    check(mu_a, "mu_a");
    if (!(robin_a > 0.0)) throw std::invalid_argument("Coefficients: robin_a must be positive");
}

namespace {

double checked_area(const Point& a, const Point& b, const Point& c) {
    const double area = signed_area(a, b, c);
    if (!(std::abs(area) > 0.0)) throw std::invalid_argument("degenerate triangle");
    return std::abs(area);
}

}  // namespace

ElementMatrix element_stiffness(const Point& a, const Point& b, const Point& c, double D) {
    const double area = checked_area(a, b, c);
    const Point p[3] = {a, b, c};
    double gx[3], gy[3];
    for (int i = 0; i < 3; ++i) {
        const Point& pj = p[(i + 1) % 3];
        const Point& pk = p[(i + 2) % 3];
        gx[i] = pj.y - pk.y;
        gy[i] = pk.x - pj.x;
    }
    ElementMatrix k{};
    const double scale = D / (4.0 * area);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) k[i][j] = scale * (gx[i] * gx[j] + gy[i] * gy[j]);
    return k;
}

ElementMatrix element_mass(const Point& a, const Point& b, const Point& c, double coef) {
    const double area = checked_area(a, b, c);
    ElementMatrix m{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] = coef * area / 12.0 * (i == j ? 2.0 : 1.0);
    return m;
}

Vector FemSystem::lift_boundary(std::span<const double> g) const {
    if (g.size() != boundary.size()) throw std::invalid_argument("boundary vector has wrong length");
    Vector u(num_nodes(), 0.0);
    for (std::size_t b = 0; b < boundary.size(); ++b) u[boundary[b]] = g[b];
    return u;
}

Vector FemSystem::restrict_boundary(std::span<const double> u) const {
    Vector g(boundary.size());
    for (std::size_t b = 0; b < boundary.size(); ++b) g[b] = u[boundary[b]];
    return g;
}

Vector FemSystem::restrict_omega0(std::span<const double> u) const {
    Vector f(omega0.size());
    for (std::size_t k = 0; k < omega0.size(); ++k) f[k] = u[omega0[k]];
    return f;
}

Vector FemSystem::boundary_load(std::span<const double> g2) const {
    return B.multiply(lift_boundary(g2));
}

FemSystem assemble(std::shared_ptr<const Mesh> mesh, const Coefficients& coeff,
                   const CgOptions& cg) {
    if (!mesh) throw std::invalid_argument("assemble: null mesh");
    const Mesh& m = *mesh;
    coeff.validate(m.triangles.size());
    if (m.omega0_nodes.empty()) throw std::invalid_argument("assemble: omega0 is not marked");
    const std::size_t n = m.nodes.size();

    FemSystem sys;
    sys.mesh = mesh;
    sys.coeff = coeff;

    TripletBuilder s(n, n), mm(n, n), c(n, n), b(n, n), c_src(n, n);
    std::vector<char> in_omega0_tri(m.triangles.size(), 0);
    for (std::size_t k : m.omega0_triangles) in_omega0_tri[k] = 1;
    for (std::size_t k = 0; k < m.triangles.size(); ++k) {
        const auto& t = m.triangles[k];
        const Point &p0 = m.nodes[t[0]], &p1 = m.nodes[t[1]], &p2 = m.nodes[t[2]];
        ElementMatrix ks, kc;
        try {
            ks = element_stiffness(p0, p1, p2, coeff.diffusion(k));
            kc = element_mass(p0, p1, p2, 1.0);
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("assemble: triangle " + std::to_string(k) +
                                        " has zero area");
        }
        const double mu = coeff.absorption(k);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                s.add(t[i], t[j], ks[i][j]);
                mm.add(t[i], t[j], mu * kc[i][j]);
                c.add(t[i], t[j], kc[i][j]);
                if (in_omega0_tri[k]) c_src.add(t[i], t[j], kc[i][j]);
            }
    }
    for (const auto& e : m.boundary_edges) {
        const Point &pa = m.nodes[e[0]], &pb = m.nodes[e[1]];
        const double len = std::hypot(pa.x - pb.x, pa.y - pb.y);
        b.add(e[0], e[0], len / 3.0);
        b.add(e[1], e[1], len / 3.0);
        b.add(e[0], e[1], len / 6.0);
        b.add(e[1], e[0], len / 6.0);
    }
    sys.S = s.build();
    sys.M = mm.build();
    sys.C = c.build();
    sys.B = b.build();
    sys.L = add(sys.S, sys.M);

    sys.boundary = m.boundary_nodes();
    std::vector<char> on_boundary(n, 0);
    for (std::size_t i : sys.boundary) on_boundary[i] = 1;
    for (std::size_t i = 0; i < n; ++i)
        if (!on_boundary[i]) sys.interior.push_back(i);
    sys.omega0 = m.omega0_nodes;

    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const CsrMatrix& source_mass = m.omega0_mode == Omega0Mode::kTriangles ? c_src.build() : sys.C;
    sys.M0 = extract(source_mass, all, sys.omega0);
    sys.C0 = extract(source_mass, sys.omega0, sys.omega0);

    sys.L_ib = extract(sys.L, sys.interior, sys.boundary);
    sys.neumann_solver = PcgSolver(sys.L, cg);
    sys.dirichlet_solver = PcgSolver(extract(sys.L, sys.interior, sys.interior), cg);
    sys.robin_solver = PcgSolver(add(sys.L, sys.B, 1.0 / (2.0 * coeff.robin_a)), cg);
    return sys;
}

namespace {

void check_source(const FemSystem& sys, std::span<const double> f) {
    if (f.size() != sys.num_sources()) throw std::invalid_argument("source vector has wrong length");
}

void check_boundary(const FemSystem& sys, std::span<const double> g) {
    if (g.size() != sys.boundary.size())
        throw std::invalid_argument("boundary vector has wrong length");
}

}  // namespace

Vector solve_dirichlet_rhs(const FemSystem& sys, std::span<const double> rhs,
                           std::span<const double> g1) {
    if (rhs.size() != sys.num_nodes()) throw std::invalid_argument("rhs has wrong length");
    check_boundary(sys, g1);
    const Vector lifted = sys.L_ib.multiply(g1);
    Vector b(sys.interior.size());
    for (std::size_t k = 0; k < sys.interior.size(); ++k) b[k] = rhs[sys.interior[k]] - lifted[k];
    Vector x(sys.interior.size(), 0.0);
    sys.dirichlet_solver.solve(b, x);
    Vector u(sys.num_nodes(), 0.0);
    for (std::size_t k = 0; k < sys.interior.size(); ++k) u[sys.interior[k]] = x[k];
    for (std::size_t k = 0; k < sys.boundary.size(); ++k) u[sys.boundary[k]] = g1[k];
    return u;
}

Vector solve_neumann_rhs(const FemSystem& sys, std::span<const double> rhs) {
    if (rhs.size() != sys.num_nodes()) throw std::invalid_argument("rhs has wrong length");
    Vector u(sys.num_nodes(), 0.0);
    sys.neumann_solver.solve(rhs, u);
    return u;
}

Vector solve_dirichlet(const FemSystem& sys, std::span<const double> f,
                       std::span<const double> g1) {
    check_source(sys, f);
    return solve_dirichlet_rhs(sys, sys.M0.multiply(f), g1);
}

Vector solve_neumann(const FemSystem& sys, std::span<const double> f, std::span<const double> g2) {
    check_source(sys, f);
    Vector rhs = sys.M0.multiply(f);
    kernels::axpy(1.0, sys.boundary_load(g2), rhs);
    return solve_neumann_rhs(sys, rhs);
}

Vector solve_robin(const FemSystem& sys, std::span<const double> f,
                   std::span<const double> g_minus) {
    check_source(sys, f);
    Vector rhs = sys.M0.multiply(f);
    kernels::axpy(1.0 / (2.0 * sys.coeff.robin_a), sys.boundary_load(g_minus), rhs);
    Vector u(sys.num_nodes(), 0.0);
    sys.robin_solver.solve(rhs, u);
    return u;
}

double l2_norm(const FemSystem& sys, std::span<const double> u) {
    if (u.size() != sys.num_nodes()) throw std::invalid_argument("l2_norm: wrong length");
    return std::sqrt(std::max(0.0, kernels::dot(u, sys.C.multiply(u))));
}

}  // namespace accreg
