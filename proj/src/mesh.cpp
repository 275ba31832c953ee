#include "sdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace sdg {

BcType parse_bc(const std::string& tag, int* pair_id) {
    if (pair_id) *pair_id = -1;
    if (tag.rfind("periodic", 0) == 0) {
        auto colon = tag.find(':');
        if (colon == std::string::npos) throw ConfigError("periodic tag needs a pair id: " + tag);
        int id = 0;
        try {
            id = std::stoi(tag.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("bad periodic pair id: " + tag);
        }
        if (pair_id) *pair_id = id;
        return BcType::Periodic;
    }
    if (tag == "inflow") return BcType::Inflow;
    if (tag == "outflow") return BcType::Outflow;
    if (tag == "wall" || tag == "symmetry") return BcType::Wall;
    throw ConfigError("unknown boundary tag: " + tag);
}

std::string bc_name(BcType t) {
    switch (t) {
        case BcType::Periodic: return "periodic";
        case BcType::Inflow: return "inflow";
        case BcType::Outflow: return "outflow";
        case BcType::Wall: return "wall";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Mesh

double Mesh::cell_measure(int c) const {
    const auto& t = cells[c];
    if (dim == 1) return nodes[t[1]].x - nodes[t[0]].x;
    return 0.5 * cross(nodes[t[1]] - nodes[t[0]], nodes[t[2]] - nodes[t[0]]);
}

Vec2 Mesh::face_point(int c, int local, int which) const {
    const auto& t = cells[c];
    if (dim == 1) return nodes[t[local]];
    return nodes[t[(local + which) % 3]];
}

double Mesh::scale() const {
    if (cells.empty()) return 1.0;
    std::vector<double> m(cells.size());
    for (int c = 0; c < num_cells(); ++c) m[c] = std::abs(cell_measure(c));
    std::nth_element(m.begin(), m.begin() + m.size() / 2, m.end());
    double med = m[m.size() / 2];
    return dim == 1 ? med : std::sqrt(med);
}

std::uint64_t Mesh::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    mix(&dim, sizeof dim);
    for (const auto& n : nodes) {
        mix(&n.x, sizeof n.x);
        mix(&n.y, sizeof n.y);
    }
    for (const auto& c : cells) mix(c.data(), sizeof(int) * 3);
    for (const auto& b : boundary) {
        int rec[4] = {b.cell, b.local, static_cast<int>(b.type), b.pair};
        mix(rec, sizeof rec);
    }
    return h;
}

void Mesh::finalize() {
    const int nc = num_cells();
    const int nlf = faces_per_cell();
    const int nn = static_cast<int>(nodes.size());
    if (nc == 0) throw ConfigError("mesh has no cells");
    for (int c = 0; c < nc; ++c) {
        for (int j = 0; j < (dim == 1 ? 2 : 3); ++j) {
            if (cells[c][j] < 0 || cells[c][j] >= nn)
                throw ConfigError("cell " + std::to_string(c + 1) + " references node " +
                                  std::to_string(cells[c][j] + 1) + " of " + std::to_string(nn));
        }
        if (dim == 1) cells[c][2] = -1;
    }
    double sc = scale();
    if (!(sc > 0)) {
        // all cells flat: fall back to the extent of the node cloud
        for (const auto& n : nodes) sc = std::max({sc, std::abs(n.x), std::abs(n.y)});
        if (!(sc > 0)) sc = 1.0;
    }
    const double tol_meas = 1e-14 * (dim == 1 ? sc : sc * sc);
    for (int c = 0; c < nc; ++c) {
        double m = cell_measure(c);
        if (m <= tol_meas) {
            throw ConfigError("cell " + std::to_string(c + 1) +
                              (m < -tol_meas ? " has negative orientation" : " is degenerate"));
        }
    }

    nbr.assign(nc, {-1, -1, -1});
    nbr_face.assign(nc, {-1, -1, -1});
    bc_of.assign(nc, {-1, -1, -1});
    shift.assign(nc, {});

    for (std::size_t i = 0; i < boundary.size(); ++i) {
        const auto& b = boundary[i];
        if (b.cell < 0 || b.cell >= nc || b.local < 0 || b.local >= nlf)
            throw ConfigError("boundary record " + std::to_string(i + 1) + " is out of range");
        if (bc_of[b.cell][b.local] >= 0)
            throw ConfigError("duplicate boundary record for cell " + std::to_string(b.cell + 1));
        bc_of[b.cell][b.local] = static_cast<int>(i);
    }

    // Interior faces by node identity.
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> by_nodes;
    for (int c = 0; c < nc; ++c) {
        for (int e = 0; e < nlf; ++e) {
            int a, b;
            if (dim == 1) {
                a = b = cells[c][e];
            } else {
                a = cells[c][e];
                b = cells[c][(e + 1) % 3];
            }
            by_nodes[{std::min(a, b), std::max(a, b)}].push_back({c, e});
        }
    }
    for (const auto& [key, list] : by_nodes) {
        if (list.size() > 2)
            throw ConfigError("face shared by more than two cells (cell " +
                              std::to_string(list[0].first + 1) + ")");
        if (list.size() == 2) {
            auto [c0, e0] = list[0];
            auto [c1, e1] = list[1];
            if (bc_of[c0][e0] >= 0 || bc_of[c1][e1] >= 0)
                throw ConfigError("boundary record on an interior face of cell " +
                                  std::to_string(c0 + 1));
            if (dim == 2 && cells[c0][e0] == cells[c1][e1])
                throw ConfigError("inconsistent orientation between cells " +
                                  std::to_string(c0 + 1) + " and " + std::to_string(c1 + 1));
            if (dim == 1 && e0 == e1)
                throw ConfigError("inconsistent orientation between cells " +
                                  std::to_string(c0 + 1) + " and " + std::to_string(c1 + 1));
            nbr[c0][e0] = c1;
            nbr_face[c0][e0] = e1;
            nbr[c1][e1] = c0;
            nbr_face[c1][e1] = e0;
        } else {
            auto [c, e] = list[0];
            if (bc_of[c][e] < 0)
                throw ConfigError("untagged boundary face: cell " + std::to_string(c + 1) +
                                  " local face " + std::to_string(e + 1));
        }
    }

    // Periodic pairing.
    std::map<int, std::vector<int>> pairs;
    for (std::size_t i = 0; i < boundary.size(); ++i)
        if (boundary[i].type == BcType::Periodic) pairs[boundary[i].pair].push_back(static_cast<int>(i));
    for (const auto& [id, recs] : pairs) {
        if (recs.size() != 2)
            throw ConfigError("periodic pair " + std::to_string(id) + " has " +
                              std::to_string(recs.size()) + " faces");
        const auto& ra = boundary[recs[0]];
        const auto& rb = boundary[recs[1]];
        Vec2 a0 = face_point(ra.cell, ra.local, 0), a1 = face_point(ra.cell, ra.local, 1);
        Vec2 b0 = face_point(rb.cell, rb.local, 0), b1 = face_point(rb.cell, rb.local, 1);
        Vec2 s;
        if (dim == 1) {
            if (ra.local == rb.local)
                throw ConfigError("periodic pair " + std::to_string(id) + " is not conforming");
            s = a0 - b0;
        } else {
            double la = norm(a1 - a0), lb = norm(b1 - b0);
            if (std::abs(la - lb) > 1e-12 * std::max(la, lb))
                throw ConfigError("periodic pair " + std::to_string(id) + " has unequal lengths");
            s = a0 - b1;
            Vec2 s2 = a1 - b0;
            if (norm(s - s2) > 1e-10 * std::max(sc, la))
                throw ConfigError("periodic pair " + std::to_string(id) + " is not conforming");
        }
        nbr[ra.cell][ra.local] = rb.cell;
        nbr_face[ra.cell][ra.local] = rb.local;
        shift[ra.cell][ra.local] = s;
        nbr[rb.cell][rb.local] = ra.cell;
        nbr_face[rb.cell][rb.local] = ra.local;
        shift[rb.cell][rb.local] = -1.0 * s;
    }
}

// ---------------------------------------------------------------------------
// Mesh I/O

namespace {

struct LineReader {
    std::istream& in;
    int line = 0;
    bool next(std::istringstream& ss) {
        std::string s;
        while (std::getline(in, s)) {
            ++line;
            auto hash = s.find('#');
            if (hash != std::string::npos) s.resize(hash);
            if (s.find_first_not_of(" \t\r") == std::string::npos) continue;
            ss.clear();
            ss.str(s);
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("mesh parse error at line " + std::to_string(line) + ": " + what);
    }
};

}  // namespace

Mesh read_mesh(const std::string& path, int dim) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mesh file: " + path);
    LineReader rd{in};
    std::istringstream ss;
    if (!rd.next(ss)) rd.fail("missing header");
    int fdim = 0, np = 0, nc = 0, nb = 0;
    if (!(ss >> fdim >> np >> nc >> nb)) rd.fail("header must be 'dim npoints ncells nbfaces'");
    if (fdim != 1 && fdim != 2) rd.fail("dimension must be 1 or 2");
    if (dim != 0 && fdim != dim) rd.fail("expected a " + std::to_string(dim) + "D mesh");
    if (np <= 0 || nc <= 0 || nb < 0) rd.fail("bad counts in header");
    Mesh m;
    m.dim = fdim;
    m.nodes.resize(np);
    for (int i = 0; i < np; ++i) {
        if (!rd.next(ss)) rd.fail("missing coordinates of node " + std::to_string(i + 1));
        if (!(ss >> m.nodes[i].x)) rd.fail("bad coordinates of node " + std::to_string(i + 1));
        if (fdim == 2 && !(ss >> m.nodes[i].y))
            rd.fail("bad coordinates of node " + std::to_string(i + 1));
    }
    m.cells.resize(nc);
    const int nv = fdim == 1 ? 2 : 3;
    for (int c = 0; c < nc; ++c) {
        if (!rd.next(ss)) rd.fail("missing connectivity of cell " + std::to_string(c + 1));
        m.cells[c] = {-1, -1, -1};
        for (int j = 0; j < nv; ++j) {
            int id = 0;
            if (!(ss >> id)) rd.fail("bad connectivity of cell " + std::to_string(c + 1));
            if (id < 1 || id > np)
                rd.fail("cell " + std::to_string(c + 1) + " references node " + std::to_string(id) +
                        " of " + std::to_string(np));
            m.cells[c][j] = id - 1;
        }
    }
    for (int i = 0; i < nb; ++i) {
        if (!rd.next(ss)) rd.fail("missing boundary record " + std::to_string(i + 1));
        int c = 0, lf = 0;
        std::string tag;
        if (!(ss >> c >> lf >> tag)) rd.fail("boundary record must be 'cell localface tag'");
        if (c < 1 || c > nc) rd.fail("boundary record references cell " + std::to_string(c));
        if (lf < 1 || lf > nv) rd.fail("boundary record local face out of range");
        Mesh::BoundaryRecord r;
        r.cell = c - 1;
        r.local = lf - 1;
        try {
            r.type = parse_bc(tag, &r.pair);
        } catch (const ConfigError& e) {
            rd.fail(e.what());
        }
        m.boundary.push_back(r);
    }
    m.finalize();
    return m;
}

void write_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write mesh file: " + path);
    out.precision(17);
    out << mesh.dim << ' ' << mesh.nodes.size() << ' ' << mesh.cells.size() << ' '
        << mesh.boundary.size() << '\n';
    for (const auto& n : mesh.nodes) {
        out << n.x;
        if (mesh.dim == 2) out << ' ' << n.y;
        out << '\n';
    }
    for (const auto& c : mesh.cells) {
        out << c[0] + 1 << ' ' << c[1] + 1;
        if (mesh.dim == 2) out << ' ' << c[2] + 1;
        out << '\n';
    }
    for (const auto& b : mesh.boundary) {
        out << b.cell + 1 << ' ' << b.local + 1 << ' ' << bc_name(b.type);
        if (b.type == BcType::Periodic) out << ':' << b.pair;
        out << '\n';
    }
    if (!out) throw ConfigError("failed writing mesh file: " + path);
}

// ---------------------------------------------------------------------------
// Generators

namespace {

// Tag every unmatched edge of a triangle mesh with classify(a, b).
template <class F>
void tag_boundary(Mesh& m, F&& classify) {
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : m.cells)
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            ++count[{std::min(a, b), std::max(a, b)}];
        }
    for (int c = 0; c < m.num_cells(); ++c) {
        for (int e = 0; e < 3; ++e) {
            int a = m.cells[c][e], b = m.cells[c][(e + 1) % 3];
            if (count[{std::min(a, b), std::max(a, b)}] != 1) continue;
            Mesh::BoundaryRecord r;
            r.cell = c;
            r.local = e;
            r.type = classify(m.nodes[a], m.nodes[b]);
            m.boundary.push_back(r);
        }
    }
}

void add_ccw(Mesh& m, int a, int b, int c) {
    if (cross(m.nodes[b] - m.nodes[a], m.nodes[c] - m.nodes[a]) < 0) std::swap(b, c);
    m.cells.push_back({a, b, c});
}

}  // namespace

Mesh make_interval_mesh(double a, double b, int n, BcType left, BcType right) {
    if (n < 1 || !(b > a)) throw ConfigError("bad interval mesh parameters");
    if ((left == BcType::Periodic) != (right == BcType::Periodic))
        throw ConfigError("periodic interval needs both ends periodic");
    Mesh m;
    m.dim = 1;
    for (int i = 0; i <= n; ++i) m.nodes.push_back({a + (b - a) * i / n, 0.0});
    for (int i = 0; i < n; ++i) m.cells.push_back({i, i + 1, -1});
    m.boundary.push_back({0, 0, left, left == BcType::Periodic ? 0 : -1});
    m.boundary.push_back({n - 1, 1, right, right == BcType::Periodic ? 0 : -1});
    m.finalize();
    return m;
}

Mesh make_rectangle_mesh(double x0, double x1, double y0, double y1, int nx, int ny,
                         TrianglePattern pattern, const std::array<BcType, 4>& sides) {
    if (nx < 1 || ny < 1) throw ConfigError("bad rectangle mesh parameters");
    if ((sides[0] == BcType::Periodic) != (sides[2] == BcType::Periodic) ||
        (sides[1] == BcType::Periodic) != (sides[3] == BcType::Periodic))
        throw ConfigError("periodic rectangle sides must come in pairs");
    Mesh m;
    m.dim = 2;
    auto node = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.nodes.push_back({x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny});
    // Boundary records: (cell, local) for each side position.
    std::vector<std::pair<int, int>> bottom(nx), top(nx), left(ny), right(ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            int p00 = node(i, j), p10 = node(i + 1, j), p11 = node(i + 1, j + 1), p01 = node(i, j + 1);
            int base = m.num_cells();
            if (pattern == TrianglePattern::Diagonal) {
                m.cells.push_back({p00, p10, p11});
                m.cells.push_back({p00, p11, p01});
                if (j == 0) bottom[i] = {base, 0};
                if (i == nx - 1) right[j] = {base, 1};
                if (j == ny - 1) top[i] = {base + 1, 1};
                if (i == 0) left[j] = {base + 1, 2};
            } else {
                int c = static_cast<int>(m.nodes.size());
                m.nodes.push_back({x0 + (x1 - x0) * (i + 0.5) / nx, y0 + (y1 - y0) * (j + 0.5) / ny});
                m.cells.push_back({p00, p10, c});
                m.cells.push_back({p10, p11, c});
                m.cells.push_back({p11, p01, c});
                m.cells.push_back({p01, p00, c});
                if (j == 0) bottom[i] = {base, 0};
                if (i == nx - 1) right[j] = {base + 1, 0};
                if (j == ny - 1) top[i] = {base + 2, 0};
                if (i == 0) left[j] = {base + 3, 0};
            }
        }
    }
    auto add = [&](std::pair<int, int> cf, BcType t, int pair) {
        m.boundary.push_back({cf.first, cf.second, t, t == BcType::Periodic ? pair : -1});
    };
    for (int i = 0; i < nx; ++i) {
        add(bottom[i], sides[0], i);
        add(top[i], sides[2], i);
    }
    for (int j = 0; j < ny; ++j) {
        add(right[j], sides[1], nx + j);
        add(left[j], sides[3], nx + j);
    }
    m.finalize();
    return m;
}

Mesh make_sector_mesh(double radius, double opening, int rings, BcType straight, BcType arc) {
    if (rings < 1 || !(radius > 0) || !(opening > 0) || opening > M_PI)
        throw ConfigError("bad sector mesh parameters");
    Mesh m;
    m.dim = 2;
    std::vector<std::vector<int>> ring(rings + 1);
    m.nodes.push_back({0.0, 0.0});
    ring[0] = {0};
    for (int i = 1; i <= rings; ++i) {
        double r = radius * i / rings;
        for (int j = 0; j <= i; ++j) {
            double a = opening * j / i;
            ring[i].push_back(static_cast<int>(m.nodes.size()));
            m.nodes.push_back({r * std::cos(a), r * std::sin(a)});
        }
    }
    for (int i = 1; i <= rings; ++i) {
        const auto& in = ring[i - 1];
        const auto& out = ring[i];
        const int ni = static_cast<int>(in.size()) - 1, no = i;
        int ia = 0, ib = 0;
        auto ang_in = [&](int j) { return ni == 0 ? 0.0 : static_cast<double>(j) / ni; };
        auto ang_out = [&](int j) { return static_cast<double>(j) / no; };
        while (ia < ni || ib < no) {
            bool adv_out = ib < no && (ia == ni || ang_out(ib + 1) <= ang_in(ia + 1) + 1e-14);
            if (adv_out) {
                add_ccw(m, in[ia], out[ib], out[ib + 1]);
                ++ib;
            } else {
                add_ccw(m, in[ia], out[ib], in[ia + 1]);
                ++ia;
            }
        }
    }
    const double tol = 1e-9 * radius;
    tag_boundary(m, [&](Vec2 a, Vec2 b) {
        if (std::abs(norm(a) - radius) < tol && std::abs(norm(b) - radius) < tol) return arc;
        return straight;
    });
    m.finalize();
    return m;
}

Mesh make_step_mesh(double h) {
    // Channel [0,3]x[0,1] with a step of height 0.2 starting at x = 0.6.
    int per = std::max(1, static_cast<int>(std::lround(0.2 / h)));
    const double d = 0.2 / per;
    const int nx = 15 * per, ny = 5 * per;
    Mesh m;
    m.dim = 2;
    std::vector<int> id((nx + 1) * (ny + 1), -1);
    auto node = [&](int i, int j) {
        int& v = id[j * (nx + 1) + i];
        if (v < 0) {
            v = static_cast<int>(m.nodes.size());
            m.nodes.push_back({i * d, j * d});
        }
        return v;
    };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (i >= 3 * per && j < per) continue;
            int p00 = node(i, j), p10 = node(i + 1, j), p11 = node(i + 1, j + 1), p01 = node(i, j + 1);
            // alternate diagonals to avoid a directional bias
            if ((i + j) % 2 == 0) {
                m.cells.push_back({p00, p10, p11});
                m.cells.push_back({p00, p11, p01});
            } else {
                m.cells.push_back({p00, p10, p01});
                m.cells.push_back({p10, p11, p01});
            }
        }
    }
    const double tol = 1e-9;
    tag_boundary(m, [&](Vec2 a, Vec2 b) {
        if (std::abs(a.x) < tol && std::abs(b.x) < tol) return BcType::Inflow;
        if (std::abs(a.x - 3.0) < tol && std::abs(b.x - 3.0) < tol) return BcType::Outflow;
        return BcType::Wall;
    });
    m.finalize();
    return m;
}

Mesh make_half_cylinder_mesh(int nr, int nt) {
    // Region between the unit half circle x = -cos(t), y = sin(t), t in [-pi/2, pi/2],
    // and an outer ellipse with semi-axes 2.5 (x) and 4 (y).
    if (nr < 1 || nt < 2) throw ConfigError("bad half-cylinder mesh parameters");
    Mesh m;
    m.dim = 2;
    auto node = [&](int i, int j) { return j * (nr + 1) + i; };
    for (int j = 0; j <= nt; ++j) {
        double t = -M_PI / 2 + M_PI * j / nt;
        Vec2 inner{-std::cos(t), std::sin(t)};
        Vec2 outer{-2.5 * std::cos(t), 4.0 * std::sin(t)};
        for (int i = 0; i <= nr; ++i) {
            // cluster layers towards the body
            double s = static_cast<double>(i) / nr;
            m.nodes.push_back(inner + s * (outer - inner));
        }
    }
    for (int j = 0; j < nt; ++j) {
        for (int i = 0; i < nr; ++i) {
            int p00 = node(i, j), p10 = node(i + 1, j), p11 = node(i + 1, j + 1), p01 = node(i, j + 1);
            add_ccw(m, p00, p10, p11);
            add_ccw(m, p00, p11, p01);
        }
    }
    tag_boundary(m, [&](Vec2 a, Vec2 b) {
        if (std::abs(norm(a) - 1.0) < 1e-9 && std::abs(norm(b) - 1.0) < 1e-9) return BcType::Wall;
        auto on_outer = [](Vec2 p) {
            return std::abs(p.x * p.x / 6.25 + p.y * p.y / 16.0 - 1.0) < 1e-9;
        };
        if (on_outer(a) && on_outer(b)) return BcType::Inflow;
        return BcType::Outflow;
    });
    m.finalize();
    return m;
}

// ---------------------------------------------------------------------------
// Reference subdivisions

SubdivisionScheme parse_scheme(const std::string& s) {
    if (s == "quad-tri") return SubdivisionScheme::QuadTri;
    if (s == "voronoi-type") return SubdivisionScheme::VoronoiType;
    if (s == "tri-uniform") return SubdivisionScheme::TriUniform;
    if (s == "1d-uniform") return SubdivisionScheme::Uniform1D;
    throw ConfigError("unknown subdivision scheme: " + s);
}

std::string scheme_name(SubdivisionScheme s) {
    switch (s) {
        case SubdivisionScheme::QuadTri: return "quad-tri";
        case SubdivisionScheme::VoronoiType: return "voronoi-type";
        case SubdivisionScheme::TriUniform: return "tri-uniform";
        case SubdivisionScheme::Uniform1D: return "1d-uniform";
    }
    return "?";
}

Matrix laplacian_pseudoinverse(const Matrix& L) {
    if (L.rows != L.cols) throw ConfigError("Laplacian must be square");
    const int n = L.rows;
    double amax = 0.0;
    for (double v : L.a) amax = std::max(amax, std::abs(v));
    for (int i = 0; i < n; ++i) {
        double rs = 0.0;
        for (int j = 0; j < n; ++j) {
            rs += L(i, j);
            if (std::abs(L(i, j) - L(j, i)) > 1e-12 * std::max(1.0, amax))
                throw ConfigError("Laplacian is not symmetric");
        }
        if (std::abs(rs) > 1e-12 * std::max(1.0, amax))
            throw ConfigError("Laplacian does not annihilate constants");
    }
    int kdim = 0;
    Matrix P = symmetric_pseudoinverse(L, 1e-12, &kdim);
    if (kdim != 1) throw ConfigError("subdivision graph is disconnected");
    return P;
}

namespace {

struct IPt {
    long x = 0, y = 0;
    bool operator<(const IPt& o) const { return x != o.x ? x < o.x : y < o.y; }
    bool operator==(const IPt& o) const { return x == o.x && y == o.y; }
};

// Assembles subcells from integer-coordinate triangle pieces with common denominator D.
struct LatticeBuilder {
    long D;
    std::map<IPt, int> ids;
    std::vector<IPt> pts;
    std::vector<std::vector<std::array<int, 3>>> pieces;

    int vid(IPt p) {
        auto it = ids.find(p);
        if (it != ids.end()) return it->second;
        int id = static_cast<int>(pts.size());
        ids.emplace(p, id);
        pts.push_back(p);
        return id;
    }
    void add(int sub, IPt a, IPt b, IPt c) {
        if (static_cast<int>(pieces.size()) <= sub) pieces.resize(sub + 1);
        long cr = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        if (cr == 0) return;
        if (cr < 0) std::swap(b, c);
        pieces[sub].push_back({vid(a), vid(b), vid(c)});
    }
};

// Upward and downward triangles of the degree-n lattice scaled to denominator D.
void lattice_triangles(int n, long D, std::vector<std::array<IPt, 3>>& up,
                       std::vector<std::array<IPt, 3>>& down) {
    long s = D / n;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i + j < n; ++i) {
            up.push_back({IPt{i * s, j * s}, IPt{(i + 1) * s, j * s}, IPt{i * s, (j + 1) * s}});
            if (i + j + 1 < n)
                down.push_back({IPt{(i + 1) * s, j * s}, IPt{(i + 1) * s, (j + 1) * s},
                                IPt{i * s, (j + 1) * s}});
        }
    }
}

IPt mid(IPt a, IPt b) { return {(a.x + b.x) / 2, (a.y + b.y) / 2}; }
IPt centroid3(IPt a, IPt b, IPt c) { return {(a.x + b.x + c.x) / 3, (a.y + b.y + c.y) / 3}; }

RefSubdivision finish_2d(SubdivisionScheme scheme, int k, LatticeBuilder& lb) {
    RefSubdivision s;
    s.dim = 2;
    s.scheme = scheme;
    s.k = k;
    s.measure = 0.5;
    s.ns = static_cast<int>(lb.pieces.size());
    const double D = static_cast<double>(lb.D);
    for (const auto& p : lb.pts) s.vertices.push_back({p.x / D, p.y / D});
    s.pieces = lb.pieces;

    // Directed edge -> subcell owning it.
    std::map<std::pair<int, int>, int> owner;
    for (int m = 0; m < s.ns; ++m)
        for (const auto& t : lb.pieces[m])
            for (int e = 0; e < 3; ++e) owner[{t[e], t[(e + 1) % 3]}] = m;

    s.area.assign(s.ns, 0.0);
    s.centroid.assign(s.ns, {});
    s.polygons.resize(s.ns);
    s.edge_segments.assign(3, {});
    std::vector<std::set<int>> on_edge(3);

    auto which_edge = [&](const IPt& a, const IPt& b) {
        if (a.y == 0 && b.y == 0) return 0;
        if (a.x + a.y == lb.D && b.x + b.y == lb.D) return 1;
        if (a.x == 0 && b.x == 0) return 2;
        return -1;
    };
    auto edge_t = [&](int e, const IPt& p) {
        switch (e) {
            case 0: return p.x / D;
            case 1: return p.y / D;
            default: return 1.0 - p.y / D;
        }
    };

    for (int m = 0; m < s.ns; ++m) {
        double A = 0.0;
        Vec2 C;
        for (const auto& t : lb.pieces[m]) {
            Vec2 a = s.vertices[t[0]], b = s.vertices[t[1]], c = s.vertices[t[2]];
            double at = 0.5 * cross(b - a, c - a);
            A += at;
            C = C + (at / 3.0) * (a + b + c);
        }
        if (!(A > 0)) throw ConfigError("zero-area subcell");
        s.area[m] = A;
        s.centroid[m] = (1.0 / A) * C;

        // Boundary edges of the subcell (no reverse twin inside the same subcell).
        std::map<int, int> next;
        for (const auto& t : lb.pieces[m])
            for (int e = 0; e < 3; ++e) {
                int a = t[e], b = t[(e + 1) % 3];
                auto it = owner.find({b, a});
                if (it != owner.end() && it->second == m) continue;
                if (next.count(a)) throw ConfigError("subcell is not simply connected");
                next[a] = b;
            }
        // Chain into a CCW polygon, starting from the smallest vertex id.
        std::vector<int> poly;
        int start = next.begin()->first, v = start;
        do {
            poly.push_back(v);
            v = next.at(v);
        } while (v != start && poly.size() <= next.size());
        if (poly.size() != next.size()) throw ConfigError("subcell is not simply connected");
        s.polygons[m] = poly;

        // Group consecutive boundary edges by (neighbor, direction).
        const int nv = static_cast<int>(poly.size());
        auto key = [&](int i) {
            int a = poly[i], b = poly[(i + 1) % nv];
            auto it = owner.find({b, a});
            int p = it == owner.end() ? -1 : it->second;
            IPt d{lb.pts[b].x - lb.pts[a].x, lb.pts[b].y - lb.pts[a].y};
            long g = std::gcd(std::abs(d.x), std::abs(d.y));
            return std::make_tuple(p, d.x / g, d.y / g);
        };
        int first = 0;
        while (first < nv && key(first) == key((first + nv - 1) % nv)) ++first;
        if (first == nv) throw ConfigError("degenerate subcell polygon");
        for (int c = 0; c < nv;) {
            int i0 = (first + c) % nv;
            auto k0 = key(i0);
            int len = 1;
            while (c + len < nv && key((first + c + len) % nv) == k0) ++len;
            int a = poly[i0], b = poly[(i0 + len) % nv];
            int p = std::get<0>(k0);
            if (p >= 0) {
                if (p > m) s.faces.push_back({m, p, a, b});
            } else {
                int e = which_edge(lb.pts[a], lb.pts[b]);
                if (e < 0) throw ConfigError("subcell boundary edge not on the reference boundary");
                s.edge_segments[e].push_back({m, edge_t(e, lb.pts[a]), edge_t(e, lb.pts[b]), a, b});
            }
            c += len;
        }
        for (int i = 0; i < nv; ++i) {
            int a = poly[i];
            for (int e = 0; e < 3; ++e) {
                const IPt& p = lb.pts[a];
                bool on = (e == 0 && p.y == 0) || (e == 1 && p.x + p.y == lb.D) || (e == 2 && p.x == 0);
                if (on) on_edge[e].insert(a);
            }
        }
    }
    // Faces with p < m were emitted from p's side with reversed orientation; the
    // p > m filter above keeps exactly one copy per pair of adjacent polygon runs.
    s.edge_vertices.assign(3, {});
    for (int e = 0; e < 3; ++e) {
        std::sort(s.edge_segments[e].begin(), s.edge_segments[e].end(),
                  [](const auto& x, const auto& y) { return x.t0 < y.t0; });
        for (int v : on_edge[e]) s.edge_vertices[e].push_back({edge_t(e, lb.pts[v]), v});
        std::sort(s.edge_vertices[e].begin(), s.edge_vertices[e].end());
    }
    return s;
}

void finish_graph(RefSubdivision& s) {
    const int nf = s.nf();
    s.A = Matrix(s.ns, nf);
    for (int f = 0; f < nf; ++f) {
        s.A(s.faces[f].m, f) = 1.0;
        s.A(s.faces[f].p, f) = -1.0;
    }
    s.L = Matrix(s.ns, s.ns);
    for (int f = 0; f < nf; ++f) {
        int m = s.faces[f].m, p = s.faces[f].p;
        s.L(m, m) += 1.0;
        s.L(p, p) += 1.0;
        s.L(m, p) -= 1.0;
        s.L(p, m) -= 1.0;
    }
    s.Lpinv = laplacian_pseudoinverse(s.L);
}

}  // namespace

RefSubdivision build_subdivision(SubdivisionScheme scheme, int k) {
    if (k < 0 || k > 12) throw ConfigError("unsupported degree " + std::to_string(k));
    RefSubdivision s;
    if (scheme == SubdivisionScheme::Uniform1D) {
        s.dim = 1;
        s.scheme = scheme;
        s.k = k;
        s.ns = k + 1;
        s.measure = 1.0;
        for (int i = 0; i <= s.ns; ++i) s.vertices.push_back({static_cast<double>(i) / s.ns, 0.0});
        for (int m = 0; m < s.ns; ++m) {
            s.polygons.push_back({m, m + 1});
            s.pieces.push_back({});
            s.area.push_back(1.0 / s.ns);
            s.centroid.push_back({(m + 0.5) / s.ns, 0.0});
        }
        for (int m = 0; m + 1 < s.ns; ++m) s.faces.push_back({m, m + 1, m + 1, m + 1});
        s.edge_segments = {{{0, 0.0, 1.0, 0, 0}}, {{s.ns - 1, 0.0, 1.0, s.ns, s.ns}}};
        s.edge_vertices = {{{0.0, 0}}, {{0.0, s.ns}}};
        finish_graph(s);
        return s;
    }

    const int nk = PolynomialBasis::dimension(2, k);
    LatticeBuilder lb;
    if (scheme == SubdivisionScheme::TriUniform) {
        int n = k + 1;
        lb.D = n;
        std::vector<std::array<IPt, 3>> up, down;
        lattice_triangles(n, lb.D, up, down);
        int id = 0;
        for (const auto& t : up) lb.add(id++, t[0], t[1], t[2]);
        for (const auto& t : down) lb.add(id++, t[0], t[1], t[2]);
    } else if (scheme == SubdivisionScheme::QuadTri) {
        // Upward triangles of the degree-(k+1) lattice, each enlarged by the
        // centroid pieces of the adjacent downward triangles.
        int n = k + 1;
        lb.D = 3L * n;
        std::vector<std::array<IPt, 3>> up, down;
        lattice_triangles(n, lb.D, up, down);
        std::map<std::pair<IPt, IPt>, int> edge_up;
        for (int u = 0; u < static_cast<int>(up.size()); ++u) {
            const auto& t = up[u];
            lb.add(u, t[0], t[1], t[2]);
            for (int e = 0; e < 3; ++e) {
                IPt a = t[e], b = t[(e + 1) % 3];
                edge_up[{std::min(a, b), std::max(a, b)}] = u;
            }
        }
        for (const auto& t : down) {
            IPt g = centroid3(t[0], t[1], t[2]);
            for (int e = 0; e < 3; ++e) {
                IPt a = t[e], b = t[(e + 1) % 3];
                int u = edge_up.at({std::min(a, b), std::max(a, b)});
                lb.add(u, a, b, g);
            }
        }
    } else if (scheme == SubdivisionScheme::VoronoiType) {
        // Median dual of the degree-k lattice.
        if (k == 0) {
            lb.D = 1;
            lb.add(0, IPt{0, 0}, IPt{1, 0}, IPt{0, 1});
        } else {
            lb.D = 6L * k;
            std::vector<std::array<IPt, 3>> up, down;
            lattice_triangles(k, lb.D, up, down);
            std::map<IPt, int> node_id;
            long s = lb.D / k;
            int id = 0;
            for (int j = 0; j <= k; ++j)
                for (int i = 0; i + j <= k; ++i) node_id[IPt{i * s, j * s}] = id++;
            auto dual = [&](const std::array<IPt, 3>& t) {
                IPt g = centroid3(t[0], t[1], t[2]);
                for (int e = 0; e < 3; ++e) {
                    IPt A = t[e], B = t[(e + 1) % 3], C = t[(e + 2) % 3];
                    int m = node_id.at(A);
                    lb.add(m, A, mid(A, B), g);
                    lb.add(m, A, g, mid(C, A));
                }
            };
            for (const auto& t : up) dual(t);
            for (const auto& t : down) dual(t);
        }
    } else {
        throw ConfigError("scheme not valid for triangles");
    }
    s = finish_2d(scheme, k, lb);
    if (s.ns < nk)
        throw ConfigError("subdivision has fewer subcells than basis functions");
    // All three reference edges must be partitioned identically and symmetrically.
    for (int e = 0; e < 3; ++e) {
        const auto& a = s.edge_segments[e];
        const auto& b = s.edge_segments[0];
        if (a.size() != b.size()) throw ConfigError("asymmetric subdivision of cell edges");
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto& r = a[a.size() - 1 - i];
            if (std::abs(a[i].t0 - b[i].t0) > 1e-14 || std::abs(a[i].t1 + r.t0 - 1.0) > 1e-14)
                throw ConfigError("asymmetric subdivision of cell edges");
        }
    }
    finish_graph(s);
    return s;
}

// ---------------------------------------------------------------------------
// Global topology

namespace {

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) {
        while (p[x] != x) {
            p[x] = p[p[x]];
            x = p[x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) p[std::max(a, b)] = std::min(a, b);
    }
};

template <class T>
void build_csr(int n, const std::vector<std::vector<T>>& lists, std::vector<int>& ptr,
               std::vector<T>& idx) {
    ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) ptr[i + 1] = ptr[i] + static_cast<int>(lists[i].size());
    idx.clear();
    idx.reserve(ptr[n]);
    for (int i = 0; i < n; ++i) idx.insert(idx.end(), lists[i].begin(), lists[i].end());
}

}  // namespace

SubcellTopology build_topology(const Mesh& mesh, SubdivisionScheme scheme, int k) {
    if ((mesh.dim == 1) != (scheme == SubdivisionScheme::Uniform1D))
        throw ConfigError("subdivision scheme " + scheme_name(scheme) + " does not match a " +
                          std::to_string(mesh.dim) + "D mesh");
    SubcellTopology T;
    T.mesh = &mesh;
    T.ref = build_subdivision(scheme, k);
    const RefSubdivision& R = T.ref;
    T.dim = mesh.dim;
    T.ncells = mesh.num_cells();
    T.ns = R.ns;
    T.nsub = T.ncells * T.ns;
    T.nlf = mesh.faces_per_cell();
    T.nseg = R.nseg();
    const int nc = T.ncells, ns = T.ns, nlf = T.nlf, nseg = T.nseg;
    const int nrv = static_cast<int>(R.vertices.size());
    const double sc = mesh.scale();

    T.geom.resize(nc);
    for (int c = 0; c < nc; ++c) {
        CellGeom& g = T.geom[c];
        const auto& t = mesh.cells[c];
        g.x0 = mesh.nodes[t[0]];
        if (mesh.dim == 1) {
            g.J[0][0] = mesh.nodes[t[1]].x - g.x0.x;
            g.J[0][1] = 0.0;
            g.J[1][0] = 0.0;
            g.J[1][1] = 1.0;
        } else {
            Vec2 e1 = mesh.nodes[t[1]] - g.x0, e2 = mesh.nodes[t[2]] - g.x0;
            g.J[0][0] = e1.x;
            g.J[0][1] = e2.x;
            g.J[1][0] = e1.y;
            g.J[1][1] = e2.y;
        }
        g.det = g.J[0][0] * g.J[1][1] - g.J[0][1] * g.J[1][0];
        g.Jinv[0][0] = g.J[1][1] / g.det;
        g.Jinv[0][1] = -g.J[0][1] / g.det;
        g.Jinv[1][0] = -g.J[1][0] / g.det;
        g.Jinv[1][1] = g.J[0][0] / g.det;
        g.measure = g.det * R.measure;
    }

    T.sub_area.resize(T.nsub);
    T.sub_centroid.resize(T.nsub);
    for (int c = 0; c < nc; ++c)
        for (int m = 0; m < ns; ++m) {
            T.sub_area[c * ns + m] = R.area[m] * T.geom[c].det;
            T.sub_centroid[c * ns + m] = T.geom[c].map(R.centroid[m]);
        }

    T.edge_len.resize(nc * nlf);
    for (int c = 0; c < nc; ++c)
        for (int e = 0; e < nlf; ++e)
            T.edge_len[c * nlf + e] =
                mesh.dim == 1 ? 1.0 : norm(mesh.face_point(c, e, 1) - mesh.face_point(c, e, 0));

    // Vertex identification.
    UnionFind uf(nc * nrv);
    for (int c = 0; c < nc; ++c) {
        for (int e = 0; e < nlf; ++e) {
            int cn = mesh.nbr[c][e];
            if (cn < 0) continue;
            int en = mesh.nbr_face[c][e];
            const auto& va = R.edge_vertices[e];
            const auto& vb = R.edge_vertices[en];
            if (va.size() != vb.size()) throw ConfigError("non-conforming cross-cell interface");
            const std::size_t nv = va.size();
            for (std::size_t i = 0; i < nv; ++i) {
                const auto& pa = va[i];
                const auto& pb = vb[nv - 1 - i];
                if (mesh.dim == 2 && std::abs(pa.first + pb.first - 1.0) > 1e-12)
                    throw ConfigError("non-conforming cross-cell interface");
                Vec2 xa = T.geom[c].map(R.vertices[pa.second]);
                Vec2 xb = T.geom[cn].map(R.vertices[pb.second]) + mesh.shift[c][e];
                if (norm(xa - xb) > 1e-12 * std::max(1.0, norm(xa)) * 10.0 + 1e-12 * sc)
                    throw ConfigError("non-conforming cross-cell interface between cells " +
                                      std::to_string(c + 1) + " and " + std::to_string(cn + 1));
                uf.unite(c * nrv + pa.second, cn * nrv + pb.second);
            }
        }
    }
    std::vector<int> gid(nc * nrv, -1);
    T.nverts = 0;
    for (int i = 0; i < nc * nrv; ++i) {
        int r = uf.find(i);
        if (gid[r] < 0) gid[r] = T.nverts++;
        gid[i] = gid[r];
    }

    // Subcell vertex lists.
    {
        std::vector<std::vector<int>> sv(T.nsub);
        std::vector<std::vector<Vec2>> sp(T.nsub);
        std::vector<std::vector<int>> vs(T.nverts);
        for (int c = 0; c < nc; ++c)
            for (int m = 0; m < ns; ++m) {
                int g = c * ns + m;
                for (int v : R.polygons[m]) {
                    sv[g].push_back(gid[c * nrv + v]);
                    sp[g].push_back(T.geom[c].map(R.vertices[v]));
                    vs[gid[c * nrv + v]].push_back(g);
                }
            }
        build_csr(T.nsub, sv, T.sub_vert_ptr, T.sub_vert_idx);
        build_csr(T.nsub, sp, T.sub_vert_ptr, T.sub_vert_pos);
        for (auto& l : vs) {
            std::sort(l.begin(), l.end());
            l.erase(std::unique(l.begin(), l.end()), l.end());
        }
        build_csr(T.nverts, vs, T.vert_sub_ptr, T.vert_sub_idx);

        std::vector<std::vector<int>> st(T.nsub);
        for (int g = 0; g < T.nsub; ++g) {
            auto& l = st[g];
            for (int i = T.sub_vert_ptr[g]; i < T.sub_vert_ptr[g + 1]; ++i) {
                int v = T.sub_vert_idx[i];
                l.insert(l.end(), vs[v].begin(), vs[v].end());
            }
            l.push_back(g);
            std::sort(l.begin(), l.end());
            l.erase(std::unique(l.begin(), l.end()), l.end());
        }
        build_csr(T.nsub, st, T.stencil_ptr, T.stencil_idx);

        // Cell corners.
        std::vector<int> corner_ref;
        if (mesh.dim == 1) {
            corner_ref = {0, nrv - 1};
        } else {
            for (Vec2 p : {Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}})
                for (int v = 0; v < nrv; ++v)
                    if (norm(R.vertices[v] - p) < 1e-14) corner_ref.push_back(v);
        }
        std::vector<std::vector<int>> cv(nc);
        std::vector<std::vector<Vec2>> cp(nc);
        std::vector<std::vector<int>> vc(T.nverts);
        for (int c = 0; c < nc; ++c)
            for (int v : corner_ref) {
                cv[c].push_back(gid[c * nrv + v]);
                cp[c].push_back(T.geom[c].map(R.vertices[v]));
                vc[gid[c * nrv + v]].push_back(c);
            }
        build_csr(nc, cv, T.cell_vert_ptr, T.cell_vert_idx);
        build_csr(nc, cp, T.cell_vert_ptr, T.cell_vert_pos);
        for (auto& l : vc) {
            std::sort(l.begin(), l.end());
            l.erase(std::unique(l.begin(), l.end()), l.end());
        }
        build_csr(T.nverts, vc, T.node_cell_ptr, T.node_cell_idx);
    }

    // Global faces.
    const int nf = R.nf();
    T.cell_intra_face.assign(nc * nf, -1);
    T.cell_seg_face.assign(nc * nlf * nseg, -1);
    T.cell_seg_sign.assign(nc * nlf * nseg, 0);
    for (int c = 0; c < nc; ++c) {
        const CellGeom& G = T.geom[c];
        for (int f = 0; f < nf; ++f) {
            const auto& rf = R.faces[f];
            GlobalFace F;
            F.L = c * ns + rf.m;
            F.R = c * ns + rf.p;
            F.cellL = F.cellR = c;
            F.kind = FaceKind::Intra;
            F.idxL = F.idxR = f;
            Vec2 a = G.map(R.vertices[rf.a]), b = G.map(R.vertices[rf.b]);
            if (mesh.dim == 1) {
                F.len = 1.0;
                F.n = {1.0, 0.0};
                F.mid = a;
            } else {
                Vec2 d = b - a;
                F.len = norm(d);
                F.n = {d.y / F.len, -d.x / F.len};
                F.mid = 0.5 * (a + b);
            }
            F.verts = {gid[c * nrv + rf.a], gid[c * nrv + rf.b]};
            T.cell_intra_face[c * nf + f] = static_cast<int>(T.faces.size());
            T.faces.push_back(F);
        }
    }
    for (int c = 0; c < nc; ++c) {
        const CellGeom& G = T.geom[c];
        for (int e = 0; e < nlf; ++e) {
            int cn = mesh.nbr[c][e];
            int en = mesh.nbr_face[c][e];
            if (cn >= 0 && std::make_pair(cn, en) < std::make_pair(c, e)) continue;
            Vec2 nrm;
            if (mesh.dim == 1) {
                nrm = {e == 0 ? -1.0 : 1.0, 0.0};
            } else {
                Vec2 d = mesh.face_point(c, e, 1) - mesh.face_point(c, e, 0);
                double l = norm(d);
                nrm = {d.y / l, -d.x / l};
            }
            for (int s = 0; s < nseg; ++s) {
                const auto& seg = R.edge_segments[e][s];
                GlobalFace F;
                F.L = c * ns + seg.m;
                F.cellL = c;
                F.idxL = e * nseg + s;
                F.n = nrm;
                Vec2 a = G.map(R.vertices[seg.a]), b = G.map(R.vertices[seg.b]);
                F.len = mesh.dim == 1 ? 1.0 : norm(b - a);
                F.mid = 0.5 * (a + b);
                F.verts = {gid[c * nrv + seg.a], gid[c * nrv + seg.b]};
                if (cn >= 0) {
                    int sn = nseg - 1 - s;
                    const auto& segn = R.edge_segments[en][sn];
                    F.R = cn * ns + segn.m;
                    F.cellR = cn;
                    F.idxR = en * nseg + sn;
                    F.kind = FaceKind::Inter;
                    int bi = mesh.bc_of[c][e];
                    F.bc = bi >= 0 ? mesh.boundary[bi].type : BcType::Periodic;
                } else {
                    F.kind = FaceKind::Boundary;
                    F.bc = mesh.boundary[mesh.bc_of[c][e]].type;
                }
                int fid = static_cast<int>(T.faces.size());
                T.faces.push_back(F);
                T.cell_seg_face[(c * nlf + e) * nseg + s] = fid;
                T.cell_seg_sign[(c * nlf + e) * nseg + s] = 1;
                if (cn >= 0) {
                    int sn = nseg - 1 - s;
                    T.cell_seg_face[(cn * nlf + en) * nseg + sn] = fid;
                    T.cell_seg_sign[(cn * nlf + en) * nseg + sn] = -1;
                }
            }
        }
    }
    // 1D faces between cells use the interior normal +x orientation already.
    {
        std::vector<std::vector<int>> sf(T.nsub);
        std::vector<std::vector<signed char>> ss(T.nsub);
        for (int f = 0; f < static_cast<int>(T.faces.size()); ++f) {
            const auto& F = T.faces[f];
            sf[F.L].push_back(f);
            ss[F.L].push_back(1);
            if (F.R >= 0) {
                sf[F.R].push_back(f);
                ss[F.R].push_back(-1);
            }
        }
        build_csr(T.nsub, sf, T.sub_face_ptr, T.sub_face_idx);
        build_csr(T.nsub, ss, T.sub_face_ptr, T.sub_face_sign);
    }

    // Closed-polygon identity per subcell.
    for (int g = 0; g < T.nsub; ++g) {
        Vec2 s;
        double per = 0.0;
        for (int i = T.sub_face_ptr[g]; i < T.sub_face_ptr[g + 1]; ++i) {
            const auto& F = T.faces[T.sub_face_idx[i]];
            s = s + (T.sub_face_sign[i] * F.len) * F.n;
            per += F.len;
        }
        if (norm(s) > 1e-12 * per * 10.0)
            throw ConfigError("subcell " + std::to_string(g) + " is not closed");
    }
    return T;
}

std::vector<int> lmp_stencil(const SubcellTopology& topo, int g) {
    return {topo.stencil_idx.begin() + topo.stencil_ptr[g],
            topo.stencil_idx.begin() + topo.stencil_ptr[g + 1]};
}

}  // namespace sdg
