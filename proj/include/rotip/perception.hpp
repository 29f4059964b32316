#pragma once

#include "rotip/render.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rotip {

struct ContactDetection
{
    SurfaceCoord centroid;
    double area = 0.0;      // mm²
    double peak_diff = 0.0; // max-channel difference
    bool low_confidence_phi = false; // centroid within 0.5 mm of the tip pole

    bool operator==(const ContactDetection&) const = default;
};

struct BinaryMask
{
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> cells;

    bool at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x] != 0; }
    std::size_t count() const;
};

/// mask = 1 where the largest channel of the difference exceeds tau.
BinaryMask binarize(const TactileImage& diff_img, double tau);

/// Difference cells closer than this (surface chord) are one contact. Base-ring
/// lighting splits a dent into an upper and a lower lobe; this rejoins them.
inline constexpr double kLobeMergeGapMm = 3.0;

/// Contacts found in the difference between img and ref, largest first.
/// Unwrapped images are segmented directly on the chart; fisheye images are
/// first pulled back onto `chart` surface coordinates.
std::vector<ContactDetection> perceive(const TactileImage& img, const TactileImage& ref, double tau,
                                       double min_area, const CameraMapping& mapping, const FingerShape& f,
                                       const ChartGrid& chart = {});

/// {"phi_deg":…, "s_mm":…, "area_mm2":…, "peak":…}
std::string to_json_line(const ContactDetection& d);

} // namespace rotip
