#include <doctest.h>

#include <numeric>
#include <stdexcept>

#include "mpcc/mesh.hpp"

using namespace mpcc;

TEST_CASE("structured mesh: counts and coordinates") {
    const Mesh mesh = build_structured_mesh(4);
    CHECK(mesh.n_vertices() == 25);
    CHECK(mesh.n_elements() == 32);
    for (int j = 0; j <= 4; ++j) {
        for (int i = 0; i <= 4; ++i) {
            const auto& p = mesh.vertices[mesh.vertex_index(i, j)];
            CHECK(p[0] == doctest::Approx(i / 4.0).epsilon(1e-15));
            CHECK(p[1] == doctest::Approx(j / 4.0).epsilon(1e-15));
        }
    }
}

TEST_CASE("structured mesh: element areas tile the unit square") {
    for (int nx : {1, 3, 8}) {
        const Mesh mesh = build_structured_mesh(nx);
        const double total = std::accumulate(mesh.element_area.begin(),
                                             mesh.element_area.end(), 0.0);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
        for (double a : mesh.element_area) {
            CHECK(a == doctest::Approx(0.5 / (nx * nx)).epsilon(1e-13));
        }
    }
}

TEST_CASE("structured mesh: positive orientation") {
    const Mesh mesh = build_structured_mesh(3);
    for (const auto& tri : mesh.elements) {
        const auto& p0 = mesh.vertices[tri[0]];
        const auto& p1 = mesh.vertices[tri[1]];
        const auto& p2 = mesh.vertices[tri[2]];
        const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) -
                           (p2[0] - p0[0]) * (p1[1] - p0[1]);
        CHECK(det > 0.0);
    }
}

TEST_CASE("structured mesh: nx=1 split along the cell diagonal") {
    const Mesh mesh = build_structured_mesh(1);
    CHECK(mesh.n_vertices() == 4);
    CHECK(mesh.n_elements() == 2);
    const auto c0 = mesh.centroid(0);
    CHECK(c0[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(c0[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    const auto c1 = mesh.centroid(1);
    CHECK(c1[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(c1[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("structured mesh: invalid size rejected") {
    CHECK_THROWS_AS(build_structured_mesh(0), std::invalid_argument);
    CHECK_THROWS_AS(build_structured_mesh(-2), std::invalid_argument);
}
