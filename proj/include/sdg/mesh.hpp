#pragma once
// Meshes (1D intervals, 2D triangles), reference cell subdivisions and the
// global subcell topology.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sdg/approximation.hpp"
#include "sdg/common.hpp"

namespace sdg {

enum class BcType { Periodic, Inflow, Outflow, Wall };

BcType parse_bc(const std::string& tag, int* pair_id);
std::string bc_name(BcType t);

struct Mesh {
    int dim = 1;
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> cells;  ///< 1D cells use the first two entries

    struct BoundaryRecord {
        int cell = 0;
        int local = 0;
        BcType type = BcType::Outflow;
        int pair = -1;
    };
    std::vector<BoundaryRecord> boundary;

    // Connectivity, filled by finalize().
    std::vector<std::array<int, 3>> nbr;       ///< neighbor cell per local face, -1 on the boundary
    std::vector<std::array<int, 3>> nbr_face;  ///< neighbor's local face index
    std::vector<std::array<int, 3>> bc_of;     ///< index into `boundary` or -1
    std::vector<std::array<Vec2, 3>> shift;    ///< own position minus neighbor position

    int faces_per_cell() const { return dim == 1 ? 2 : 3; }
    int num_cells() const { return static_cast<int>(cells.size()); }

    /// Build connectivity, pair periodic faces and validate all invariants.
    void finalize();
    double cell_measure(int c) const;
    Vec2 face_point(int c, int local, int which) const;
    double scale() const;
    std::uint64_t hash() const;
};

Mesh read_mesh(const std::string& path, int dim);
void write_mesh(const Mesh& mesh, const std::string& path);

Mesh make_interval_mesh(double a, double b, int n, BcType left, BcType right);
enum class TrianglePattern { Diagonal, Cross };
/// Structured triangulation of a rectangle. Sides: bottom, right, top, left.
Mesh make_rectangle_mesh(double x0, double x1, double y0, double y1, int nx, int ny,
                         TrianglePattern pattern, const std::array<BcType, 4>& sides);
/// Triangulated circular sector r <= radius, 0 <= angle <= opening, with
/// `rings` layers; ring i carries i segments. Produces rings^2 cells.
Mesh make_sector_mesh(double radius, double opening, int rings, BcType straight, BcType arc);
/// Forward-facing step channel with cells of size about h.
Mesh make_step_mesh(double h);
/// Domain in front of a unit half cylinder, `nr` radial and `nt` angular layers.
Mesh make_half_cylinder_mesh(int nr, int nt);

enum class SubdivisionScheme { QuadTri, VoronoiType, TriUniform, Uniform1D };
SubdivisionScheme parse_scheme(const std::string& s);
std::string scheme_name(SubdivisionScheme s);

/// Subdivision of the reference element into subcells.
struct RefSubdivision {
    int dim = 1;
    SubdivisionScheme scheme = SubdivisionScheme::Uniform1D;
    int k = 0;
    int ns = 0;
    double measure = 1.0;

    std::vector<Vec2> vertices;
    std::vector<std::vector<int>> polygons;                    ///< CCW vertex ids per subcell
    std::vector<std::vector<std::array<int, 3>>> pieces;       ///< triangles covering each subcell
    std::vector<double> area;
    std::vector<Vec2> centroid;

    struct Face {
        int m = 0, p = 0;  ///< normal points from m to p
        int a = 0, b = 0;  ///< endpoint vertex ids (equal in 1D)
    };
    std::vector<Face> faces;

    struct Segment {
        int m = 0;
        double t0 = 0.0, t1 = 0.0;
        int a = 0, b = 0;
    };
    std::vector<std::vector<Segment>> edge_segments;  ///< per local face, ordered by t
    /// Vertices lying on each local face: (t, vertex id), ordered by t.
    std::vector<std::vector<std::pair<double, int>>> edge_vertices;

    Matrix A;      ///< ns x nf adjacency (+1 at m, -1 at p)
    Matrix L;      ///< A A^T
    Matrix Lpinv;  ///< generalized inverse of L

    int nf() const { return static_cast<int>(faces.size()); }
    int nseg() const { return static_cast<int>(edge_segments[0].size()); }
};

RefSubdivision build_subdivision(SubdivisionScheme scheme, int k);

/// Generalized inverse of a connected graph Laplacian.
Matrix laplacian_pseudoinverse(const Matrix& L);

/// Affine geometry of one cell: x = x0 + J xi.
struct CellGeom {
    Vec2 x0;
    double J[2][2] = {{1, 0}, {0, 1}};
    double Jinv[2][2] = {{1, 0}, {0, 1}};
    double det = 1.0;
    double measure = 1.0;
    Vec2 map(Vec2 xi) const {
        return {x0.x + J[0][0] * xi.x + J[0][1] * xi.y, x0.y + J[1][0] * xi.x + J[1][1] * xi.y};
    }
};

enum class FaceKind { Intra, Inter, Boundary };

struct GlobalFace {
    int L = -1, R = -1;          ///< global subcell ids, R = -1 on the domain boundary
    int cellL = -1, cellR = -1;
    FaceKind kind = FaceKind::Intra;
    int idxL = 0;                ///< intra: face index in cell; segments: local_face*nseg + seg
    int idxR = 0;
    double len = 0.0;
    Vec2 n;
    Vec2 mid;
    BcType bc = BcType::Outflow;
    std::array<int, 2> verts{{-1, -1}};
};

/// Global subcell topology for a mesh, one scheme and one degree mesh-wide.
struct SubcellTopology {
    const Mesh* mesh = nullptr;
    RefSubdivision ref;
    int dim = 1;
    int ncells = 0;
    int ns = 0;
    int nsub = 0;
    int nlf = 0;   ///< local faces per cell
    int nseg = 0;  ///< segments per local face

    std::vector<CellGeom> geom;
    std::vector<double> sub_area;
    std::vector<Vec2> sub_centroid;
    std::vector<GlobalFace> faces;
    std::vector<int> cell_intra_face;  ///< ncells * nf
    std::vector<int> cell_seg_face;    ///< ncells * nlf * nseg
    std::vector<signed char> cell_seg_sign;
    std::vector<double> edge_len;      ///< ncells * nlf physical face measure

    std::vector<int> sub_face_ptr, sub_face_idx;
    std::vector<signed char> sub_face_sign;

    int nverts = 0;
    std::vector<int> sub_vert_ptr, sub_vert_idx;    ///< global vertex ids of each subcell
    std::vector<Vec2> sub_vert_pos;                 ///< matching physical coordinates
    std::vector<int> vert_sub_ptr, vert_sub_idx;    ///< subcells around a vertex
    std::vector<int> stencil_ptr, stencil_idx;      ///< N(S_m)
    std::vector<int> cell_vert_ptr, cell_vert_idx;  ///< global ids of cell corners
    std::vector<Vec2> cell_vert_pos;
    std::vector<int> node_cell_ptr, node_cell_idx;  ///< cells around a global corner id
};

SubcellTopology build_topology(const Mesh& mesh, SubdivisionScheme scheme, int k);

/// N(S_m): subcells sharing a vertex with subcell g (g included).
std::vector<int> lmp_stencil(const SubcellTopology& topo, int g);

}  // namespace sdg
