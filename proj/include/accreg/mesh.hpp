#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace accreg {

enum class Omega0Mode {
    // Triangles whose centroid lies in the region; nodes are their vertices.
    kTriangles,
    // Nodes strictly inside the region; triangles are those with all three
    // vertices marked.
    kNodal,
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Triangulation of a planar domain. Triangles are counter-clockwise.
struct Mesh {
    std::vector<Point> nodes;
    std::vector<std::array<std::size_t, 3>> triangles;
    std::vector<std::array<std::size_t, 2>> boundary_edges;
    // Permissible source region: a set of triangles and the nodes attached
    // to it (see Omega0Mode). Empty until mark_omega0 is called.
    std::vector<std::size_t> omega0_triangles;
    std::vector<std::size_t> omega0_nodes;
    Omega0Mode omega0_mode = Omega0Mode::kTriangles;

    std::size_t num_nodes() const { return nodes.size(); }
    std::vector<std::size_t> boundary_nodes() const;
    std::size_t num_edges() const;
    double area() const;
    double max_edge_length() const;
    // Throws std::runtime_error naming the first violated invariant.
    void validate() const;
};

double signed_area(const Point& a, const Point& b, const Point& c);

struct DiskMeshOptions {
    int square_divisions = 4;  // cells per side of the inner square at level 0
    int radial_layers = 2;     // ring layers between square and circle at level 0
    double square_half_width = 0.5;
};

// Unit disk: a structured inner square surrounded by four blended ring
// blocks. Each level doubles both resolutions, so nodes are nested.
Mesh disk_mesh(int level, const DiskMeshOptions& opts = {});

// Union of axis-aligned squares and disks (open sets), or the whole plane.
class Region {
public:
    static Region square(double cx, double cy, double half_width);
    static Region disk(double cx, double cy, double radius);
    static Region whole();
    Region& unite(const Region& other);

    bool contains(const Point& p) const;
    bool is_whole() const { return whole_; }

private:
    struct Shape {
        bool is_disk;
        double cx, cy, size;
    };
    std::vector<Shape> shapes_;
    bool whole_ = false;
};

// Throws std::invalid_argument when the region selects nothing.
Mesh mark_omega0(Mesh mesh, const Region& region, Omega0Mode mode = Omega0Mode::kTriangles);

// Plain text: "nodes N" then "i x y" lines, "triangles T" then "i a b c",
// "boundary_edges B" then "i a b". Omega0 is not stored; mark it after reading.
void write_mesh(const Mesh& mesh, std::ostream& out);
Mesh read_mesh(std::istream& in);

}  // namespace accreg
