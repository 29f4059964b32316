#include "rotip/errors.hpp"
#include "rotip/perception.hpp"

#include <doctest.h>

#include <cmath>

using namespace rotip;

namespace {

double circ_diff(double a, double b) { return std::abs(std::remainder(a - b, 360.0)); }

struct Scene
{
    TactileImage img, ref;
};

Scene sphere_scene(const FingerShape& f, const LightingConfig& light, const CameraMapping& map,
                   const std::vector<std::pair<double, double>>& spots, double r = 5, double depth = 1.0)
{
    std::vector<PosedObject> objs;
    for (auto [phi, s] : spots) {
        const SurfacePoint sp = surface_point(f, {phi, s});
        objs.push_back({Sphere{r}, RigidTransform::from_translation(sp.point + sp.normal * (r - depth))});
    }
    const PenetrationField field = penetration_field(f, {}, objs);
    return {quantize8(render(deformation_map(field, 2.0, 1.5), f, light, map)),
            quantize8(render(zero_depth(f), f, light, map))};
}

} // namespace

TEST_CASE("binarize thresholds the largest channel")
{
    TactileImage zero(10, 4);
    CHECK(binarize(zero, 0.05).count() == 0);
    TactileImage half(10, 4);
    std::fill(half.pixels.begin(), half.pixels.end(), 0.5);
    CHECK(binarize(half, 0.05).count() == 40);
    CHECK(binarize(half, 0.6).count() == 0);
    TactileImage one(1, 1);
    one.at(0, 0, 2) = 0.2;
    CHECK(binarize(one, 0.1).at(0, 0));
}

TEST_CASE("reference against itself has no contacts")
{
    const FingerShape f;
    const Scene s = sphere_scene(f, default_lighting(), UnwrappedMapping{}, {});
    CHECK(perceive(s.ref, s.ref, 0.05, 1.0, UnwrappedMapping{}, f).empty());
}

TEST_CASE("single sphere contact is localized")
{
    const FingerShape f;
    const Scene s = sphere_scene(f, default_lighting(), UnwrappedMapping{}, {{120, 10}});
    const std::vector<ContactDetection> det = perceive(s.img, s.ref, 0.05, 1.0, UnwrappedMapping{}, f);
    REQUIRE(!det.empty());
    CHECK(circ_diff(det[0].centroid.phi_deg, 120) <= 2.0);
    CHECK(std::abs(det[0].centroid.s_mm - 10) <= 1.0);
}

TEST_CASE("opposite contacts give two detections")
{
    const FingerShape f;
    const Scene s = sphere_scene(f, default_lighting(), UnwrappedMapping{}, {{0, 25}, {180, 25}});
    const std::vector<ContactDetection> det = perceive(s.img, s.ref, 0.05, 1.0, UnwrappedMapping{}, f);
    REQUIRE(det.size() == 2);
    const bool first_is_zero = circ_diff(det[0].centroid.phi_deg, 0) < 90;
    CHECK(circ_diff(det[first_is_zero ? 0 : 1].centroid.phi_deg, 0) <= 2.0);
    CHECK(circ_diff(det[first_is_zero ? 1 : 0].centroid.phi_deg, 180) <= 2.0);
    CHECK(det[0].area >= det[1].area);
    for (const ContactDetection& d : det) {
        CHECK(d.area >= 1.0);
        CHECK(d.peak_diff > 0.05);
    }
}

TEST_CASE("a contact across the seam is one detection")
{
    const FingerShape f;
    for (double phi : {0.0, 359.5, 0.7}) {
        const Scene s = sphere_scene(f, default_lighting(), UnwrappedMapping{}, {{phi, 28}}, 6, 1.2);
        const std::vector<ContactDetection> det = perceive(s.img, s.ref, 0.05, 1.0, UnwrappedMapping{}, f);
        CHECK(det.size() == 1);
    }
}

TEST_CASE("azimuth equivariance under white lighting")
{
    const FingerShape f;
    const LightingConfig white = white_ring_lighting();
    const double s_mm = 26.0;
    const Scene base = sphere_scene(f, white, UnwrappedMapping{}, {{30, s_mm}});
    const std::vector<ContactDetection> d0 = perceive(base.img, base.ref, 0.05, 1.0, UnwrappedMapping{}, f);
    REQUIRE(d0.size() == 1);
    for (double shift : {17.0, 60.0, 133.0, 250.0}) {
        const Scene moved = sphere_scene(f, white, UnwrappedMapping{}, {{30 + shift, s_mm}});
        const std::vector<ContactDetection> d = perceive(moved.img, moved.ref, 0.05, 1.0, UnwrappedMapping{}, f);
        REQUIRE(d.size() == 1);
        CHECK(circ_diff(d[0].centroid.phi_deg - d0[0].centroid.phi_deg, shift) <= 1.0);
    }
}

TEST_CASE("fisheye images are pulled back onto the chart")
{
    const FingerShape f;
    const FisheyeMapping fe;
    const Scene s = sphere_scene(f, default_lighting(), fe, {{200, 28}}, 5, 1.5);
    const std::vector<ContactDetection> det = perceive(s.img, s.ref, 0.05, 1.0, fe, f);
    REQUIRE(det.size() == 1);
    CHECK(circ_diff(det[0].centroid.phi_deg, 200) <= 5.0);
    CHECK(std::abs(det[0].centroid.s_mm - 28) <= 2.5);
}

TEST_CASE("pole detections flag their azimuth")
{
    const FingerShape f;
    const PenetrationField field = penetration_field(
        f, {}, std::vector<PosedObject>{{Sphere{5}, RigidTransform::from_translation({0, 0, 43 + 4})}});
    const LightingConfig light = default_lighting();
    const TactileImage img = quantize8(render(deformation_map(field, 2.0, 1.5), f, light, UnwrappedMapping{}));
    const TactileImage ref = quantize8(render(zero_depth(f), f, light, UnwrappedMapping{}));
    const std::vector<ContactDetection> det = perceive(img, ref, 0.05, 1.0, UnwrappedMapping{}, f);
    REQUIRE(!det.empty());
    if (det[0].centroid.s_mm < 0.5)
        CHECK(det[0].low_confidence_phi);
    CHECK(det[0].centroid.s_mm < 3.0);
}

TEST_CASE("mismatched images are rejected")
{
    const FingerShape f;
    CHECK_THROWS_AS(perceive(TactileImage(360, 160), TactileImage(10, 10), 0.05, 1.0, UnwrappedMapping{}, f),
                    DimensionMismatch);
    CHECK_THROWS_AS(perceive(TactileImage(10, 10), TactileImage(10, 10), 0.05, 1.0, UnwrappedMapping{}, f),
                    DimensionMismatch);
}

TEST_CASE("detections serialize as one JSON object")
{
    ContactDetection d;
    d.centroid = {12.5, 3.25};
    d.area = 4;
    d.peak_diff = 0.5;
    const std::string line = to_json_line(d);
    CHECK(line.find("\"phi_deg\"") != std::string::npos);
    CHECK(line.find("\"s_mm\"") != std::string::npos);
    CHECK(line.find("\"area_mm2\"") != std::string::npos);
    CHECK(line.find("\"peak\"") != std::string::npos);
    CHECK(line.find('\n') == std::string::npos);
}
