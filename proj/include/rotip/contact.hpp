#pragma once

#include "rotip/geometry.hpp"

#include <span>
#include <vector>

namespace rotip {

struct PosedObject
{
    ObjectShape shape;
    RigidTransform pose;

    bool operator==(const PosedObject&) const = default;
};

/// Indentation depth of the objects into the nominal sensing surface,
/// sampled on the chart grid. depth and object_id are row-major (row = s).
struct PenetrationField
{
    ChartGrid grid;
    FingerShape finger;
    RigidTransform finger_pose;
    std::vector<double> depth;
    std::vector<int> object_id; // deepest object per cell, -1 where depth is 0

    double at(int i, int j) const { return depth[grid.index(i, j)]; }
    double max_depth() const;
};

struct ContactPatch
{
    SurfaceCoord center;
    Vec3 point;  // world, on the nominal finger surface
    Vec3 normal; // world, outward from the finger
    double max_penetration = 0.0;
    double area = 0.0;
    int object_id = -1;
};

PenetrationField penetration_field(const FingerShape& f, const RigidTransform& finger_pose,
                                   std::span<const PosedObject> objects, const ChartGrid& grid = {});

/// 4-connected components of {d > min_depth}, azimuth-periodic, largest first.
std::vector<ContactPatch> extract_patches(const PenetrationField& field, double min_depth = 0.05,
                                          double min_area = 1.0);

/// Moves a patch center to the locally deepest surface point of its object,
/// so the finger and object normals line up at the returned point.
ContactPatch refine_contact(const FingerShape& f, const RigidTransform& finger_pose, const PosedObject& object,
                            const ContactPatch& patch);

/// Angular velocity in deg/s and linear velocity in mm/s of the body origin.
struct Twist
{
    Vec3 angular = Vec3::Zero();
    Vec3 linear = Vec3::Zero();

    bool operator==(const Twist&) const = default;
};

/// A rigid body's velocity field: twist about `origin`.
struct RigidMotion
{
    Twist twist;
    Vec3 origin = Vec3::Zero();

    Vec3 velocity_at(const Vec3& p) const;
};

/// Surface velocity field of a finger spinning at spin_deg_s about its own axis.
/// Positive spin is clockwise seen from the base looking toward the tip.
RigidMotion finger_motion(const RigidTransform& finger_pose, double spin_deg_s);

struct RelativeVelocity
{
    double normal = 0.0; // mm/s along the finger's outward normal
    Vec2 tangential = Vec2::Zero();
};

/// Orthonormal contact frame: normal plus two tangents, the first along
/// the finger's azimuth direction where defined.
struct ContactFrame
{
    Vec3 normal, t1, t2;
};
ContactFrame contact_frame(const RigidTransform& finger_pose, const Vec3& outward_normal);

/// Velocity of body a's point pa minus body b's point pb, in `frame`.
RelativeVelocity relative_velocity(const RigidMotion& a, const Vec3& pa, const RigidMotion& b, const Vec3& pb,
                                   const ContactFrame& frame);

/// Finger surface velocity minus object surface velocity at a contact point.
/// Each body is evaluated at its own surface point nearest `p`.
/// Throws StaleContact if p is more than 1 mm from either surface.
RelativeVelocity relative_surface_velocity(const FingerShape& f, const RigidTransform& finger_pose,
                                           double spin_deg_s, const PosedObject& object,
                                           const Twist& object_twist, const Vec3& p);

} // namespace rotip
