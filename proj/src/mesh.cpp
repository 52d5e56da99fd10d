#include "accreg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace accreg {

namespace {

using Edge = std::pair<std::size_t, std::size_t>;

Edge make_edge(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::map<Edge, int> edge_counts(const Mesh& m) {
    std::map<Edge, int> count;
    for (const auto& t : m.triangles)
        for (int e = 0; e < 3; ++e) ++count[make_edge(t[e], t[(e + 1) % 3])];
    return count;
}

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error("mesh: " + what); }

}  // namespace

double signed_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

std::vector<std::size_t> Mesh::boundary_nodes() const {
    std::vector<std::size_t> out;
    for (const auto& e : boundary_edges) {
        out.push_back(e[0]);
        out.push_back(e[1]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::size_t Mesh::num_edges() const { return edge_counts(*this).size(); }

double Mesh::area() const {
    double a = 0.0;
    for (const auto& t : triangles) a += signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
    return a;
}

double Mesh::max_edge_length() const {
    double h = 0.0;
    for (const auto& t : triangles)
        for (int e = 0; e < 3; ++e) {
            const Point& a = nodes[t[e]];
            const Point& b = nodes[t[(e + 1) % 3]];
            h = std::max(h, std::hypot(a.x - b.x, a.y - b.y));
        }
    return h;
}

void Mesh::validate() const {
    for (std::size_t k = 0; k < triangles.size(); ++k) {
        const auto& t = triangles[k];
        for (std::size_t v : t)
            if (v >= nodes.size()) fail("triangle " + std::to_string(k) + " references a missing node");
        if (!(signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) > 0.0))
            fail("triangle " + std::to_string(k) + " is not positively oriented");
    }
    const auto count = edge_counts(*this);
    std::map<Edge, int> boundary;
    for (const auto& e : boundary_edges) ++boundary[make_edge(e[0], e[1])];
    for (const auto& [edge, c] : count) {
        if (c > 2) fail("edge shared by more than two triangles");
        const bool on_boundary = boundary.count(edge) > 0;
        if (c == 1 && !on_boundary) fail("edge with one triangle is not a boundary edge");
        if (c == 2 && on_boundary) fail("boundary edge belongs to two triangles");
    }
    for (const auto& [edge, c] : boundary)
        if (c != 1 || count.count(edge) == 0) fail("boundary edge does not belong to exactly one triangle");
    for (std::size_t v : omega0_nodes)
        if (v >= nodes.size()) fail("omega0 node out of range");
}

Mesh disk_mesh(int level, const DiskMeshOptions& opts) {
    if (level < 0 || opts.square_divisions < 1 || opts.radial_layers < 1 ||
        !(opts.square_half_width > 0.0 && opts.square_half_width < 1.0 / std::numbers::sqrt2))
        throw std::invalid_argument("disk_mesh: invalid level or options");
    const std::size_t n = static_cast<std::size_t>(opts.square_divisions) << level;
    const std::size_t layers = static_cast<std::size_t>(opts.radial_layers) << level;
    const double a = opts.square_half_width;
    const std::size_t ring = 4 * n;

    Mesh m;
    auto grid = [&](std::size_t i, std::size_t j) { return j * (n + 1) + i; };
    for (std::size_t j = 0; j <= n; ++j)
        for (std::size_t i = 0; i <= n; ++i)
            m.nodes.push_back({-a + 2.0 * a * (static_cast<double>(i) / static_cast<double>(n)),
                               -a + 2.0 * a * (static_cast<double>(j) / static_cast<double>(n))});

    // Square boundary walked counter-clockwise from the corner (a, -a).
    auto ring_grid_index = [&](std::size_t p) {
        const std::size_t side = p / n, off = p % n;
        switch (side) {
            case 0: return grid(n, off);
            case 1: return grid(n - off, n);
            case 2: return grid(0, n - off);
            default: return grid(off, 0);
        }
    };
    auto ring_node = [&](std::size_t layer, std::size_t p) {
        p %= ring;
        return layer == 0 ? ring_grid_index(p) : (n + 1) * (n + 1) + (layer - 1) * ring + p;
    };

    for (std::size_t layer = 1; layer <= layers; ++layer) {
        const double w = static_cast<double>(layer) / static_cast<double>(layers);
        for (std::size_t p = 0; p < ring; ++p) {
            const Point& sq = m.nodes[ring_grid_index(p)];
            const double theta = -0.25 * std::numbers::pi +
                                 0.5 * std::numbers::pi * (static_cast<double>(p) / static_cast<double>(n));
            Point c{std::cos(theta), std::sin(theta)};
            if (layer == layers) {
                m.nodes.push_back(c);
            } else {
                m.nodes.push_back({(1.0 - w) * sq.x + w * c.x, (1.0 - w) * sq.y + w * c.y});
            }
        }
    }

    auto add_triangle = [&](std::size_t p0, std::size_t p1, std::size_t p2) {
        if (signed_area(m.nodes[p0], m.nodes[p1], m.nodes[p2]) < 0.0) std::swap(p1, p2);
        m.triangles.push_back({p0, p1, p2});
    };
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            // Diagonals point away from the centre so the pattern is symmetric.
            const bool flip = (i < n / 2) != (j < n / 2);
            const std::size_t v00 = grid(i, j), v10 = grid(i + 1, j), v01 = grid(i, j + 1),
                              v11 = grid(i + 1, j + 1);
            if (!flip) {
                add_triangle(v00, v10, v11);
                add_triangle(v00, v11, v01);
            } else {
                add_triangle(v00, v10, v01);
                add_triangle(v10, v11, v01);
            }
        }
    for (std::size_t layer = 1; layer <= layers; ++layer)
        for (std::size_t p = 0; p < ring; ++p) {
            const std::size_t a0 = ring_node(layer - 1, p), b0 = ring_node(layer - 1, p + 1);
            const std::size_t a1 = ring_node(layer, p), b1 = ring_node(layer, p + 1);
            add_triangle(a0, a1, b1);
            add_triangle(a0, b1, b0);
        }
    for (std::size_t p = 0; p < ring; ++p)
        m.boundary_edges.push_back({ring_node(layers, p), ring_node(layers, p + 1)});
    return m;
}

Region Region::square(double cx, double cy, double half_width) {
    if (!(half_width > 0.0)) throw std::invalid_argument("Region: half width must be positive");
    Region r;
    r.shapes_.push_back({false, cx, cy, half_width});
    return r;
}

Region Region::disk(double cx, double cy, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("Region: radius must be positive");
    Region r;
    r.shapes_.push_back({true, cx, cy, radius});
    return r;
}

Region Region::whole() {
    Region r;
    r.whole_ = true;
    return r;
}

Region& Region::unite(const Region& other) {
    whole_ = whole_ || other.whole_;
    shapes_.insert(shapes_.end(), other.shapes_.begin(), other.shapes_.end());
    return *this;
}

bool Region::contains(const Point& p) const {
    if (whole_) return true;
    for (const Shape& s : shapes_) {
        const double dx = p.x - s.cx, dy = p.y - s.cy;
        if (s.is_disk ? dx * dx + dy * dy < s.size * s.size
                      : std::abs(dx) < s.size && std::abs(dy) < s.size)
            return true;
    }
    return false;
}

Mesh mark_omega0(Mesh m, const Region& region, Omega0Mode mode) {
    m.omega0_mode = mode;
    m.omega0_triangles.clear();
    m.omega0_nodes.clear();
    std::vector<char> node_in(m.nodes.size(), 0);
    if (mode == Omega0Mode::kTriangles) {
        for (std::size_t k = 0; k < m.triangles.size(); ++k) {
            const auto& t = m.triangles[k];
            const Point c{(m.nodes[t[0]].x + m.nodes[t[1]].x + m.nodes[t[2]].x) / 3.0,
                          (m.nodes[t[0]].y + m.nodes[t[1]].y + m.nodes[t[2]].y) / 3.0};
            if (!region.contains(c)) continue;
            m.omega0_triangles.push_back(k);
            for (std::size_t v : t) node_in[v] = 1;
        }
    } else {
        for (std::size_t i = 0; i < m.nodes.size(); ++i)
            node_in[i] = region.contains(m.nodes[i]) ? 1 : 0;
        for (std::size_t k = 0; k < m.triangles.size(); ++k) {
            const auto& t = m.triangles[k];
            if (node_in[t[0]] && node_in[t[1]] && node_in[t[2]]) m.omega0_triangles.push_back(k);
        }
    }
    for (std::size_t i = 0; i < m.nodes.size(); ++i)
        if (node_in[i]) m.omega0_nodes.push_back(i);
    if (m.omega0_nodes.empty()) throw std::invalid_argument("mark_omega0: region contains no mesh nodes");
    return m;
}

void write_mesh(const Mesh& m, std::ostream& out) {
    out << std::setprecision(17);
    out << "nodes " << m.nodes.size() << '\n';
    for (std::size_t i = 0; i < m.nodes.size(); ++i)
        out << i << ' ' << m.nodes[i].x << ' ' << m.nodes[i].y << '\n';
    out << "triangles " << m.triangles.size() << '\n';
    for (std::size_t k = 0; k < m.triangles.size(); ++k)
        out << k << ' ' << m.triangles[k][0] << ' ' << m.triangles[k][1] << ' ' << m.triangles[k][2]
            << '\n';
    out << "boundary_edges " << m.boundary_edges.size() << '\n';
    for (std::size_t k = 0; k < m.boundary_edges.size(); ++k)
        out << k << ' ' << m.boundary_edges[k][0] << ' ' << m.boundary_edges[k][1] << '\n';
}

Mesh read_mesh(std::istream& in) {
    Mesh m;
    auto header = [&](const char* name) {
        std::string word;
        std::size_t count = 0;
        if (!(in >> word >> count) || word != name)
            throw std::runtime_error(std::string("read_mesh: expected '") + name + " <count>'");
        return count;
    };
    auto index = [&](std::size_t expected) {
        std::size_t i = 0;
        if (!(in >> i) || i != expected) throw std::runtime_error("read_mesh: bad or out-of-order index");
    };
    const std::size_t nn = header("nodes");
    m.nodes.resize(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        index(i);
        if (!(in >> m.nodes[i].x >> m.nodes[i].y)) throw std::runtime_error("read_mesh: bad node line");
    }
    const std::size_t nt = header("triangles");
    m.triangles.resize(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        index(k);
        auto& t = m.triangles[k];
        if (!(in >> t[0] >> t[1] >> t[2])) throw std::runtime_error("read_mesh: bad triangle line");
    }
    const std::size_t nb = header("boundary_edges");
    m.boundary_edges.resize(nb);
    for (std::size_t k = 0; k < nb; ++k) {
        index(k);
        auto& e = m.boundary_edges[k];
        if (!(in >> e[0] >> e[1])) throw std::runtime_error("read_mesh: bad boundary edge line");
    }
    m.validate();
    return m;
}

}  // namespace accreg
