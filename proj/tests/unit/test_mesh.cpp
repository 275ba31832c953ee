#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <set>

#include "doctest.h"
#include "sdg/mesh.hpp"

using namespace sdg;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
    std::string path = std::string(P_tmpdir) + "/" + name;
    std::ofstream(path) << text;
    return path;
}

Eigen::MatrixXd dense(const Matrix& m) {
    Eigen::MatrixXd e(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) e(i, j) = m(i, j);
    return e;
}

const SubdivisionScheme kTriSchemes[] = {SubdivisionScheme::QuadTri, SubdivisionScheme::VoronoiType,
                                         SubdivisionScheme::TriUniform};

}  // namespace

TEST_CASE("read a two-triangle square") {
    auto path = write_temp("sdg_square.mesh",
                           "2 4 2 4\n0 0\n1 0\n1 1\n0 1\n1 2 3\n1 3 4\n"
                           "1 1 outflow\n1 2 outflow\n2 2 outflow\n2 3 outflow\n");
    Mesh m = read_mesh(path, 2);
    CHECK(m.nodes.size() == 4);
    CHECK(m.num_cells() == 2);
    CHECK(m.boundary.size() == 4);
    int interior = 0;
    for (int c = 0; c < 2; ++c)
        for (int e = 0; e < 3; ++e) interior += m.nbr[c][e] >= 0;
    CHECK(interior == 2);
}

TEST_CASE("out-of-range node index names the cell") {
    auto path = write_temp("sdg_bad.mesh", "2 4 2 0\n0 0\n1 0\n1 1\n0 1\n1 2 999\n1 3 4\n");
    try {
        read_mesh(path, 2);
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("cell 1") != std::string::npos);
        CHECK(msg.find("999") != std::string::npos);
    }
}

TEST_CASE("degenerate and clockwise cells are rejected") {
    auto p1 = write_temp("sdg_cw.mesh", "2 3 1 3\n0 0\n0 1\n1 0\n1 2 3\n1 1 wall\n1 2 wall\n1 3 wall\n");
    CHECK_THROWS_AS(read_mesh(p1, 2), ConfigError);
    auto p2 = write_temp("sdg_flat.mesh", "2 3 1 3\n0 0\n1 0\n2 0\n1 2 3\n1 1 wall\n1 2 wall\n1 3 wall\n");
    CHECK_THROWS_AS(read_mesh(p2, 2), ConfigError);
}

TEST_CASE("write and read round trip") {
    Mesh m = make_rectangle_mesh(0, 1, 0, 1, 3, 2, TrianglePattern::Cross,
                                 {BcType::Periodic, BcType::Outflow, BcType::Periodic, BcType::Inflow});
    std::string path = std::string(P_tmpdir) + "/sdg_rt.mesh";
    write_mesh(m, path);
    Mesh r = read_mesh(path, 2);
    CHECK(r.hash() == m.hash());
}

TEST_CASE("periodic interval") {
    Mesh m = make_interval_mesh(0, 1, 40, BcType::Periodic, BcType::Periodic);
    CHECK(m.num_cells() == 40);
    int periodic = 0;
    for (const auto& b : m.boundary) periodic += b.type == BcType::Periodic;
    CHECK(periodic == 2);
    CHECK(m.nbr[0][0] == 39);
    CHECK(m.nbr[39][1] == 0);
    for (int c = 0; c < 40; ++c) CHECK(m.cell_measure(c) == doctest::Approx(1.0 / 40));
}

TEST_CASE("unpaired periodic face is an error") {
    auto path = write_temp("sdg_per.mesh", "1 3 2 2\n0\n0.5\n1\n1 2\n2 3\n1 1 periodic:0\n2 2 outflow\n");
    CHECK_THROWS_AS(read_mesh(path, 1), ConfigError);
}

TEST_CASE("quad-tri k=1 gives the 3-cycle Laplacian") {
    RefSubdivision s = build_subdivision(SubdivisionScheme::QuadTri, 1);
    CHECK(s.ns == 3);
    Eigen::Matrix3d ref;
    ref << 2, -1, -1, -1, 2, -1, -1, -1, 2;
    CHECK((dense(s.L) - ref).cwiseAbs().maxCoeff() == 0.0);
    Eigen::MatrixXd LpL = dense(s.Lpinv) * dense(s.L);
    Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(3, 3) - Eigen::MatrixXd::Constant(3, 3, 1.0 / 3);
    CHECK((LpL - proj).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("subdivision sizes") {
    CHECK(build_subdivision(SubdivisionScheme::TriUniform, 3).ns == 16);
    for (int k = 0; k <= 6; ++k) {
        int nk = (k + 1) * (k + 2) / 2;
        CHECK(build_subdivision(SubdivisionScheme::QuadTri, k).ns == nk);
        CHECK(build_subdivision(SubdivisionScheme::VoronoiType, k).ns == nk);
        CHECK(build_subdivision(SubdivisionScheme::TriUniform, k).ns == (k + 1) * (k + 1));
    }
    RefSubdivision s = build_subdivision(SubdivisionScheme::Uniform1D, 2);
    CHECK(s.ns == 3);
    for (double a : s.area) CHECK(a == doctest::Approx(1.0 / 3));
}

TEST_CASE("tri-uniform subcells are congruent") {
    RefSubdivision s = build_subdivision(SubdivisionScheme::TriUniform, 3);
    for (double a : s.area) CHECK(a == doctest::Approx(0.5 / 16).epsilon(1e-14));
}

TEST_CASE("reference subdivision invariants") {
    for (auto scheme : kTriSchemes)
        for (int k = 1; k <= 7; ++k) {
            RefSubdivision s = build_subdivision(scheme, k);
            double total = 0;
            for (double a : s.area) total += a;
            CHECK(total == doctest::Approx(0.5).epsilon(1e-12));
            Eigen::MatrixXd A = dense(s.A);
            for (int f = 0; f < s.nf(); ++f) {
                int plus = 0, minus = 0;
                for (int m = 0; m < s.ns; ++m) {
                    plus += A(m, f) == 1.0;
                    minus += A(m, f) == -1.0;
                }
                CHECK(plus == 1);
                CHECK(minus == 1);
            }
            Eigen::MatrixXd L = dense(s.L);
            CHECK((L - A * A.transpose()).cwiseAbs().maxCoeff() == 0.0);
            CHECK((L * Eigen::VectorXd::Ones(s.ns)).cwiseAbs().maxCoeff() == 0.0);
            Eigen::MatrixXd Lp = dense(s.Lpinv);
            CHECK((Lp - Lp.transpose()).cwiseAbs().maxCoeff() < 1e-13);
            Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(s.ns, -1.0, 2.0);
            b.array() -= b.mean();
            CHECK((L * Lp * b - b).norm() <= 1e-10 * b.norm());
        }
}

TEST_CASE("laplacian pseudoinverse rejects invalid input") {
    Matrix L(2, 2);
    L(0, 0) = 2;
    L(0, 1) = -1;
    L(1, 0) = -1;
    L(1, 1) = 2;
    CHECK_THROWS_AS(laplacian_pseudoinverse(L), ConfigError);
    Matrix D(3, 3);  // two components: {0,1} and {2}
    D(0, 0) = 1;
    D(0, 1) = -1;
    D(1, 0) = -1;
    D(1, 1) = 1;
    CHECK_THROWS_AS(laplacian_pseudoinverse(D), ConfigError);
}

TEST_CASE("global topology on periodic and bounded meshes") {
    Mesh per = make_rectangle_mesh(0, 1, 0, 1, 4, 3, TrianglePattern::Diagonal,
                                   {BcType::Periodic, BcType::Periodic, BcType::Periodic, BcType::Periodic});
    Mesh box = make_rectangle_mesh(0, 2, 0, 1, 3, 3, TrianglePattern::Cross,
                                   {BcType::Wall, BcType::Outflow, BcType::Wall, BcType::Inflow});
    for (const Mesh* mesh : {&per, &box})
        for (auto scheme : kTriSchemes)
            for (int k = 1; k <= 4; ++k) {
                SubcellTopology T = build_topology(*mesh, scheme, k);
                for (int c = 0; c < T.ncells; ++c) {
                    double s = 0;
                    for (int m = 0; m < T.ns; ++m) s += T.sub_area[c * T.ns + m];
                    CHECK(s == doctest::Approx(mesh->cell_measure(c)).epsilon(1e-12));
                }
                // Each subcell pair appears once per face; boundary faces only on bounded meshes.
                std::set<std::pair<int, int>> seen;
                int nb = 0;
                for (const auto& F : T.faces) {
                    if (F.R < 0) {
                        ++nb;
                        continue;
                    }
                    CHECK(F.L != F.R);
                    CHECK(std::abs(norm(F.n) - 1.0) < 1e-14);
                }
                if (mesh == &per) CHECK(nb == 0);
                else CHECK(nb == 4 * 3 * T.nseg);
            }
}

TEST_CASE("1D stencil and lone-triangle stencil") {
    Mesh m = make_interval_mesh(0, 1, 5, BcType::Outflow, BcType::Outflow);
    SubcellTopology T = build_topology(m, SubdivisionScheme::Uniform1D, 2);
    auto st = lmp_stencil(T, 7);
    CHECK(st == std::vector<int>{6, 7, 8});
    st = lmp_stencil(T, 0);
    CHECK(st == std::vector<int>{0, 1});

    Mesh one;
    one.dim = 2;
    one.nodes = {{0, 0}, {1, 0}, {0, 1}};
    one.cells = {{0, 1, 2}};
    for (int e = 0; e < 3; ++e) one.boundary.push_back({0, e, BcType::Wall, -1});
    one.finalize();
    SubcellTopology L = build_topology(one, SubdivisionScheme::QuadTri, 1);
    for (int g = 0; g < 3; ++g) CHECK(lmp_stencil(L, g).size() == 3);
}

TEST_CASE("stencil around a vertex shared by six triangles") {
    Mesh m = make_rectangle_mesh(0, 1, 0, 1, 2, 2, TrianglePattern::Diagonal,
                                 {BcType::Wall, BcType::Wall, BcType::Wall, BcType::Wall});
    for (auto scheme : kTriSchemes) {
        SubcellTopology T = build_topology(m, scheme, 2);
        Vec2 center{0.5, 0.5};
        // Brute force: subcells having a vertex at the center.
        std::set<int> touching;
        for (int g = 0; g < T.nsub; ++g)
            for (int i = T.sub_vert_ptr[g]; i < T.sub_vert_ptr[g + 1]; ++i)
                if (norm(T.sub_vert_pos[i] - center) < 1e-12) touching.insert(g);
        std::set<int> cells;
        for (int g : touching) cells.insert(g / T.ns);
        CHECK(cells.size() == 6);
        for (int g : touching) {
            auto st = lmp_stencil(T, g);
            for (int h : touching) CHECK(std::find(st.begin(), st.end(), h) != st.end());
            // Brute-force geometric stencil equals the topological one.
            std::set<int> brute;
            for (int h = 0; h < T.nsub; ++h)
                for (int i = T.sub_vert_ptr[g]; i < T.sub_vert_ptr[g + 1]; ++i)
                    for (int j = T.sub_vert_ptr[h]; j < T.sub_vert_ptr[h + 1]; ++j)
                        if (norm(T.sub_vert_pos[i] - T.sub_vert_pos[j]) < 1e-12) brute.insert(h);
            CHECK(std::vector<int>(brute.begin(), brute.end()) == st);
        }
    }
}

TEST_CASE("generated mesh sizes") {
    auto r = make_rectangle_mesh(0, 1, 0, 1, 12, 12, TrianglePattern::Cross,
                                 {BcType::Inflow, BcType::Inflow, BcType::Inflow, BcType::Inflow});
    CHECK(r.num_cells() == 576);
    auto s = make_sector_mesh(1.2, M_PI / 2, 17, BcType::Wall, BcType::Outflow);
    CHECK(s.num_cells() == 289);
    double area = 0;
    for (int c = 0; c < s.num_cells(); ++c) area += s.cell_measure(c);
    CHECK(area < M_PI / 4 * 1.44);
    CHECK(area > 0.99 * M_PI / 4 * 1.44);
    auto st = make_step_mesh(0.05);
    CHECK(st.num_cells() > 0);
    auto hc = make_half_cylinder_mesh(10, 20);
    CHECK(hc.num_cells() == 400);
}
