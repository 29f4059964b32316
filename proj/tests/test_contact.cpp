#include "rotip/contact.hpp"
#include "rotip/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace rotip;

namespace {

double circ_diff(double a, double b) { return std::abs(std::remainder(a - b, 360.0)); }

PenetrationField field_of(const FingerShape& f, const RigidTransform& pose, std::vector<PosedObject> objs,
                          const ChartGrid& g = {})
{
    return penetration_field(f, pose, objs, g);
}

// Component count of {d > thr} by union-find with azimuth wraparound.
int union_find_components(const PenetrationField& field, double thr)
{
    const ChartGrid& g = field.grid;
    std::vector<std::size_t> parent(g.cells());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    auto on = [&](int i, int j) { return field.at(i, j) > thr; };
    for (int j = 0; j < g.n_s; ++j)
        for (int i = 0; i < g.n_phi; ++i) {
            if (!on(i, j))
                continue;
            const int right = (i + 1) % g.n_phi;
            if (on(right, j))
                parent[find(g.index(i, j))] = find(g.index(right, j));
            if (j + 1 < g.n_s && on(i, j + 1))
                parent[find(g.index(i, j))] = find(g.index(i, j + 1));
        }
    int n = 0;
    for (int j = 0; j < g.n_s; ++j)
        for (int i = 0; i < g.n_phi; ++i)
            if (on(i, j) && find(g.index(i, j)) == g.index(i, j))
                ++n;
    return n;
}

PenetrationField blank_field(const FingerShape& f, const ChartGrid& g)
{
    return {g, f, {}, std::vector<double>(g.cells(), 0.0), std::vector<int>(g.cells(), -1)};
}

} // namespace

TEST_CASE("sphere clear of the pole leaves the field empty")
{
    const FingerShape f;
    const PenetrationField field = field_of(f, {}, {{Sphere{5}, RigidTransform::from_translation({0, 0, 43 + 7})}});
    CHECK(field.max_depth() == 0.0);
    CHECK(extract_patches(field).empty());
}

TEST_CASE("sphere over the pole indents by its overlap")
{
    const FingerShape f;
    const PosedObject ball{Sphere{5}, RigidTransform::from_translation({0, 0, 43 + 4})};
    const PenetrationField field = field_of(f, {}, {ball});
    CHECK(field.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    for (int j = 1; j < 10; ++j)
        CHECK(field.at(17, j) < field.at(17, j - 1));
    // Direct −sdf at sampled cap points.
    for (int j = 0; j < 12; ++j) {
        const Vec3 p = surface_point(f, {33, field.grid.s_mm(f, j)}).point;
        const double expected = std::max(0.0, 5.0 - (p - Vec3(0, 0, 47)).norm());
        CHECK(field.at(33, j) == doctest::Approx(expected).epsilon(1e-12));
    }
    const std::vector<ContactPatch> patches = extract_patches(field);
    REQUIRE(patches.size() == 1);
    CHECK(patches[0].center.s_mm < 0.5);
    CHECK(patches[0].max_penetration == doctest::Approx(1.0));
    CHECK((patches[0].normal - Vec3(0, 0, 1)).norm() < 1e-6);
}

TEST_CASE("half-space on a flat tip indents the face uniformly")
{
    FingerShape f;
    f.tip = TipShape::Flat;
    // Solid region z > 29.5 in the finger frame.
    const PosedObject plane{HalfSpace{Vec3(0, 0, -1), -29.5}, {}};
    const PenetrationField field = field_of(f, {}, {plane});
    const ChartGrid& g = field.grid;
    for (int j = 0; j < g.n_s; ++j) {
        const double s = g.s_mm(f, j);
        for (int i = 0; i < g.n_phi; i += 7) {
            if (s <= f.radius)
                REQUIRE(field.at(i, j) == doctest::Approx(0.5).epsilon(1e-12));
            else if (s > f.radius + 0.5)
                REQUIRE(field.at(i, j) == 0.0);
        }
    }
}

TEST_CASE("opposite indenters give two patches")
{
    const FingerShape f;
    std::vector<PosedObject> objs;
    for (double phi : {0.0, 180.0}) {
        const SurfacePoint sp = surface_point(f, {phi, 28});
        objs.push_back({Sphere{4}, RigidTransform::from_translation(sp.point + sp.normal * 3.2)});
    }
    const std::vector<ContactPatch> patches = extract_patches(field_of(f, {}, objs));
    REQUIRE(patches.size() == 2);
    std::vector<double> phis{patches[0].center.phi_deg, patches[1].center.phi_deg};
    std::sort(phis.begin(), phis.end(), [](double a, double b) { return std::cos(a * kDegToRad) > std::cos(b * kDegToRad); });
    CHECK(circ_diff(phis[0], 0) < 1.0);
    CHECK(circ_diff(phis[1], 180) < 1.0);
    CHECK(patches[0].area >= patches[1].area);
}

TEST_CASE("a blob across the azimuth seam is one patch")
{
    const FingerShape f;
    const ChartGrid g;
    PenetrationField field = blank_field(f, g);
    for (int j = 100; j < 110; ++j)
        for (int i : {356, 357, 358, 359, 0, 1, 2, 3}) {
            field.depth[g.index(i, j)] = 0.4;
            field.object_id[g.index(i, j)] = 0;
        }
    const std::vector<ContactPatch> patches = extract_patches(field);
    REQUIRE(patches.size() == 1);
    CHECK(circ_diff(patches[0].center.phi_deg, 359.5) < 0.01);
}

TEST_CASE("patch count matches a union-find oracle on random fields")
{
    const FingerShape f;
    const ChartGrid g{36, 16};
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 1000; ++trial) {
        PenetrationField field = blank_field(f, g);
        const double density = 0.2 + 0.5 * u(rng);
        for (std::size_t k = 0; k < g.cells(); ++k)
            if (u(rng) < density) {
                field.depth[k] = 0.06 + u(rng);
                field.object_id[k] = 0;
            }
        const std::vector<ContactPatch> patches = extract_patches(field, 0.05, 0.0);
        REQUIRE(static_cast<int>(patches.size()) == union_find_components(field, 0.05));
        for (std::size_t k = 1; k < patches.size(); ++k)
            REQUIRE(patches[k - 1].area >= patches[k].area);
    }
}

TEST_CASE("field is invariant under a common rigid motion")
{
    const FingerShape f;
    const ChartGrid g{90, 40};
    const SurfacePoint sp = surface_point(f, {40, 25});
    const std::vector<PosedObject> objs{{Sphere{5}, RigidTransform::from_translation(sp.point + sp.normal * 4.0)},
                                        {Box{6, 6, 6}, RigidTransform::from_translation({0, 0, 45})}};
    const PenetrationField base = penetration_field(f, {}, objs, g);
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 5; ++k) {
        const RigidTransform T(Quat(u(rng), u(rng), u(rng), u(rng)).normalized(), Vec3(30 * u(rng), 30 * u(rng), 30 * u(rng)));
        std::vector<PosedObject> moved;
        for (const PosedObject& o : objs)
            moved.push_back({o.shape, T * o.pose});
        const PenetrationField field = penetration_field(f, T, moved, g);
        for (std::size_t c = 0; c < g.cells(); ++c)
            REQUIRE(std::abs(field.depth[c] - base.depth[c]) < 1e-9);
    }
}

TEST_CASE("pushing an indenter deeper never decreases depth")
{
    const FingerShape f;
    const ChartGrid g{90, 40};
    for (const ObjectShape& shape : std::vector<ObjectShape>{Sphere{5}, Box{4, 8, 3}, Cylinder{2, 10}}) {
        const SurfacePoint sp = surface_point(f, {200, 30});
        std::vector<double> prev(g.cells(), 0.0);
        for (double gap = 5.0; gap >= -1.0; gap -= 0.25) {
            const std::vector<PosedObject> objs{{shape, RigidTransform::from_translation(sp.point + sp.normal * (2.0 + gap))}};
            const PenetrationField field = penetration_field(f, {}, objs, g);
            for (std::size_t c = 0; c < g.cells(); ++c)
                REQUIRE(field.depth[c] >= prev[c]);
            prev = field.depth;
        }
    }
}

TEST_CASE("relative surface velocity")
{
    const FingerShape f;
    const SurfacePoint eq = surface_point(f, {0, kPi * 13 / 2});
    const PosedObject wall{Box{2, 40, 40}, RigidTransform::from_translation(eq.point + Vec3(1.0, 0, 0))};

    SUBCASE("both at rest")
    {
        const RelativeVelocity rv = relative_surface_velocity(f, {}, 0.0, wall, {}, eq.point);
        CHECK(rv.normal == 0.0);
        CHECK(rv.tangential.norm() == 0.0);
    }
    SUBCASE("spinning finger against a resting object")
    {
        const RelativeVelocity rv = relative_surface_velocity(f, {}, kRadToDeg, wall, {}, eq.point);
        CHECK(rv.tangential.norm() == doctest::Approx(13.0).epsilon(1e-9));
        CHECK(std::abs(rv.normal) < 1e-9);
        // v = ω×r oracle: ω along +z, r along +x gives +y.
        const ContactFrame fr = contact_frame({}, eq.normal);
        const Vec3 v = rv.tangential.x() * fr.t1 + rv.tangential.y() * fr.t2;
        CHECK((v - Vec3(0, 13, 0)).norm() < 1e-9);
    }
    SUBCASE("rolling cylinder without slip")
    {
        const double r = 3.0, omega = 0.5 * kRadToDeg;
        const Vec3 c = eq.point + Vec3(r, 0, 0);
        const PosedObject cyl{Cylinder{r, 60}, RigidTransform::from_translation(c)};
        Twist tw;
        tw.angular = Vec3(0, 0, -omega * 13.0 / r);
        const RelativeVelocity rv = relative_surface_velocity(f, {}, omega, cyl, tw, eq.point);
        CHECK(rv.tangential.norm() < 1e-9);
    }
    SUBCASE("stale contact")
    {
        CHECK_THROWS_AS(relative_surface_velocity(f, {}, 1.0, wall, {}, eq.point + Vec3(0, 0, 2) + Vec3(2, 0, 0)),
                        StaleContact);
    }
}

TEST_CASE("relative velocity is antisymmetric in the two bodies")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int k = 0; k < 500; ++k) {
        RigidMotion a, b;
        a.twist = {Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng))};
        b.twist = {Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng))};
        a.origin = Vec3(u(rng), u(rng), u(rng));
        b.origin = Vec3(u(rng), u(rng), u(rng));
        const Vec3 pa(u(rng), u(rng), u(rng)), pb = pa + Vec3(0.1 * u(rng), 0, 0);
        const ContactFrame fr = contact_frame({}, Vec3(u(rng), u(rng), u(rng)).normalized());
        const RelativeVelocity ab = relative_velocity(a, pa, b, pb, fr);
        const RelativeVelocity ba = relative_velocity(b, pb, a, pa, fr);
        REQUIRE(std::abs(ab.normal + ba.normal) < 1e-12);
        REQUIRE((ab.tangential + ba.tangential).norm() < 1e-12);
    }
}

TEST_CASE("penetration field rejects tiny grids")
{
    const FingerShape f;
    CHECK_THROWS_AS(field_of(f, {}, {}, ChartGrid{4, 16}), GridMismatch);
}
