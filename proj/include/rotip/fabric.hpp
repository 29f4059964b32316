#pragma once

#include "rotip/geometry.hpp"

#include <span>
#include <vector>

namespace rotip {

/// Planar cloth strip in the world x–z plane at y = plane_y. Node 0 is the
/// pin; segment k runs from node k to node k+1. angles[0] is the absolute
/// heading of segment 0 from +x (toward +z positive), angles[k] the bend of
/// segment k relative to segment k-1.
struct FabricChain
{
    Vec2 pin = Vec2::Zero(); // (x, z) mm
    double plane_y = 0.0;    // mm
    double seg_len = 5.0;    // mm
    std::vector<double> angles = std::vector<double>(20, 0.0); // rad
    double bend_stiffness = 1.0;
    double friction = 0.8;

    /// Node each finger has locked onto while it stays in contact (-1: none).
    int contact_node[2] = {-1, -1};

    void validate() const;
    std::size_t segments() const { return angles.size(); }

    /// Node positions (x, z), pin first.
    std::vector<Vec2> nodes() const;
    Vec3 node_world(const Vec2& xz) const { return {xz.x(), plane_y, xz.y()}; }
    Vec2 tip() const;
    /// Absolute heading of the last segment, degrees.
    double tip_curl_deg() const;
    /// Σ k_b·θ² over the bend joints.
    double bend_energy() const;

    bool operator==(const FabricChain& o) const
    {
        return pin == o.pin && plane_y == o.plane_y && seg_len == o.seg_len && angles == o.angles &&
               bend_stiffness == o.bend_stiffness && friction == o.friction &&
               contact_node[0] == o.contact_node[0] && contact_node[1] == o.contact_node[1];
    }
};

/// Largest bend change any joint receives from drag in one step is
/// kFabricDragCap / k_b radians.
inline constexpr double kFabricDragCap = 0.05;

struct ChainContact
{
    int node = 0;               // contact node, >= 1
    double surface_speed = 0.0; // mm/s; positive rolls the distal flap toward +z then back over
};

/// One drag-and-relax update. Each contact drags the joints distal to its
/// node by friction × |surface_speed| × dt of rolled length, distal joints
/// first, around a roll radius k_b × seg_len. Joints between the pin and the
/// most proximal contact relax toward straight. Nothing moves unless some
/// contact drags.
FabricChain step_fabric(const FabricChain& chain, std::span<const ChainContact> contacts, double dt);

} // namespace rotip
