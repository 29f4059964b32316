#pragma once

#include "rotip/contact.hpp"
#include "rotip/geometry.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace rotip {

struct Led
{
    Vec3 position; // mm, finger frame
    Vec3 color;    // rgb in [0, 1]
    double intensity = 1.0;

    bool operator==(const Led&) const = default;
};

struct LightingConfig
{
    std::vector<Led> leds;
    bool diffuser = false;
    double k_d = 0.6;
    double k_s = 0.8;
    double phong_exp = 20.0;
    double ambient = 0.1;
    double attenuation_length = 25.0; // mm

    void validate() const;
    bool operator==(const LightingConfig&) const = default;
};

/// Six LEDs on a 10 mm ring in the base plane, colored R, G, B, R, G, B.
LightingConfig default_lighting();

/// Same ring, all LEDs white: shading without azimuth-dependent color.
LightingConfig white_ring_lighting();

struct ElastomerConfig
{
    double thickness = 2.0;       // mm
    double smoothing_sigma = 1.5; // mm

    void validate() const;
    bool operator==(const ElastomerConfig&) const = default;
};

/// Image axes are the chart: column = azimuth cell, row = arclength cell.
struct UnwrappedMapping
{
    bool operator==(const UnwrappedMapping&) const = default;
};

/// Equidistant fisheye (r = focal·θ) on the finger axis looking toward the tip.
struct FisheyeMapping
{
    double focal_px = 130.0;
    int width = 256;
    int height = 256;
    double camera_z = 0.0; // mm, finger frame

    double field_of_view_deg() const;
    bool operator==(const FisheyeMapping&) const = default;
};

using CameraMapping = std::variant<UnwrappedMapping, FisheyeMapping>;

void validate(const CameraMapping& mapping);

/// Camera position in the finger frame used for view-dependent shading.
Vec3 camera_position(const CameraMapping& mapping);

struct DepthMap
{
    ChartGrid grid;
    FingerShape finger;
    std::vector<double> depth; // row-major, row = s

    double at(int i, int j) const { return depth[grid.index(i, j)]; }
};

struct TactileImage
{
    int width = 0;
    int height = 0;
    std::vector<double> pixels; // row-major rgb triples

    TactileImage() = default;
    TactileImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0.0) {}

    double& at(int x, int y, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    double at(int x, int y, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    double max_channel(int x, int y) const;
    double intensity(int x, int y) const; // mean of the three channels

    bool operator==(const TactileImage&) const = default;
};

/// Clamps indentation to the elastomer thickness and blurs it with a
/// Gaussian of std sigma measured on the surface (azimuth-periodic).
DepthMap deformation_map(const PenetrationField& field, double thickness, double sigma);

/// Undeformed surface of the given chart.
DepthMap zero_depth(const FingerShape& f, const ChartGrid& grid = {});

/// Throws GridMismatch if the depth map belongs to another finger shape.
TactileImage render(const DepthMap& depth, const FingerShape& f, const LightingConfig& light,
                    const CameraMapping& mapping);

/// Per-channel absolute difference; throws DimensionMismatch.
TactileImage diff(const TactileImage& img, const TactileImage& ref);

/// Rounds every channel to the 8-bit grid an image file stores.
TactileImage quantize8(const TactileImage& img);

/// Surface coordinate seen through fisheye pixel (x, y) in continuous image
/// coordinates (pixel centers at integer + 0.5); nullopt outside the sensing area.
std::optional<SurfaceCoord> fisheye_pixel_to_surface(const FisheyeMapping& m, const FingerShape& f, double x,
                                                     double y);

/// Continuous image coordinates of a finger-frame point.
Vec2 fisheye_project(const FisheyeMapping& m, const Vec3& p);

/// Bilinear sample of a chart-shaped image at a surface coordinate.
Vec3 sample_chart_image(const TactileImage& chart_img, const FingerShape& f, const SurfaceCoord& c);

} // namespace rotip
