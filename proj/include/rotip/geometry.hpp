#pragma once

#include <Eigen/Geometry>

#include <variant>

namespace rotip {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

/// Wraps an angle in degrees into [0, 360).
double wrap_deg(double deg);

/// Rigid pose: rotation (unit quaternion) followed by translation in mm.
/// Maps body-frame points to the parent frame: p_parent = R * p_body + t.
class RigidTransform
{
public:
    RigidTransform() = default;
    RigidTransform(const Quat& rotation, const Vec3& translation);

    static RigidTransform identity() { return {}; }
    static RigidTransform from_translation(const Vec3& t) { return {Quat::Identity(), t}; }
    static RigidTransform from_axis_angle(const Vec3& axis, double angle_rad, const Vec3& t = Vec3::Zero());
    /// Roll about x, then pitch about y, then yaw about z (extrinsic), degrees.
    static RigidTransform from_rpy_deg(const Vec3& rpy_deg, const Vec3& t = Vec3::Zero());

    const Quat& rotation() const { return rotation_; }
    const Vec3& translation() const { return translation_; }

    Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
    Vec3 apply_vector(const Vec3& v) const { return rotation_ * v; }

    RigidTransform inverse() const;
    /// this ∘ other: apply `other` first.
    RigidTransform operator*(const RigidTransform& other) const;

    /// Heading of the body x axis about world z, in degrees (-180, 180].
    double yaw_deg() const;

    bool operator==(const RigidTransform& other) const;

private:
    Quat rotation_ = Quat::Identity();
    Vec3 translation_ = Vec3::Zero();
};

enum class TipShape { Hemisphere, Flat };

/// Sensing shell of one finger. Finger frame: origin at the base center,
/// +z toward the tip; the cylindrical wall spans z in [0, body_length].
struct FingerShape
{
    TipShape tip = TipShape::Hemisphere;
    double radius = 13.0;            // mm
    double body_length = 30.0;       // mm
    double sensing_arclength = 40.0; // mm, measured from the tip along a meridian

    /// Meridian length of the tip cap (quarter circle or flat-face radius).
    double cap_meridian() const;
    /// Distance of the tip pole / face center from the base plane.
    double tip_height() const;
    void validate() const;

    bool operator==(const FingerShape&) const = default;
};

/// Azimuth in degrees and meridian arclength from the tip in mm.
struct SurfaceCoord
{
    double phi_deg = 0.0;
    double s_mm = 0.0;

    bool operator==(const SurfaceCoord&) const = default;
};

/// Normalizes φ into [0, 360) and clamps s into [0, S_max].
SurfaceCoord make_surface_coord(const FingerShape& f, double phi_deg, double s_mm);

struct SurfacePoint
{
    Vec3 point;
    Vec3 normal; // outward
};

SurfacePoint surface_point(const FingerShape& f, const SurfaceCoord& c);

/// Nearest sensing-surface coordinate of a finger-frame point.
SurfaceCoord surface_param_of(const FingerShape& f, const Vec3& p);

/// Distance of the surface from the finger axis at arclength s.
double surface_radius(const FingerShape& f, double s_mm);

/// Partial derivatives of surface_point: d/dφ per radian and d/ds per mm.
std::pair<Vec3, Vec3> surface_tangents(const FingerShape& f, const SurfaceCoord& c);

/// Signed distance to the finger solid in the finger frame (negative inside).
/// The shell is treated as extending indefinitely below the base plane.
double finger_sdf(const FingerShape& f, const Vec3& p);

/// Uniform (azimuth, arclength) sampling of the sensing surface.
/// Column i sits at φ = i·360/n_phi, row j at s = j·S_max/n_s.
struct ChartGrid
{
    int n_phi = 360;
    int n_s = 160;

    double dphi_deg() const { return 360.0 / n_phi; }
    double ds(const FingerShape& f) const { return f.sensing_arclength / n_s; }
    double phi_deg(int i) const { return i * dphi_deg(); }
    double s_mm(const FingerShape& f, int j) const { return j * ds(f); }
    std::size_t cells() const { return static_cast<std::size_t>(n_phi) * static_cast<std::size_t>(n_s); }
    std::size_t index(int i, int j) const
    {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_phi) + static_cast<std::size_t>(i);
    }
    /// Surface area of one cell in row j (a ring band of width ds split into n_phi pieces).
    double cell_area(const FingerShape& f, int j) const;

    bool operator==(const ChartGrid&) const = default;
};

// ---------------------------------------------------------------------------
// Object shapes

struct Sphere
{
    double radius;
    bool operator==(const Sphere&) const = default;
};

/// Axis along local z, centered on the origin.
struct Cylinder
{
    double radius;
    double height;
    bool operator==(const Cylinder&) const = default;
};

/// Full edge lengths along local x, y, z, centered on the origin.
struct Box
{
    double wx, wy, wz;
    bool operator==(const Box&) const = default;
};

/// Solid region {p : normal·p < offset} in the local frame.
struct HalfSpace
{
    Vec3 normal;
    double offset;
    bool operator==(const HalfSpace& o) const { return normal == o.normal && offset == o.offset; }
};

using ObjectShape = std::variant<Sphere, Cylinder, Box, HalfSpace>;

void validate(const ObjectShape& shape);

/// Exact signed distance (negative inside) of a posed shape at world point p.
double sdf(const ObjectShape& shape, const RigidTransform& pose, const Vec3& p);

/// Signed distance with p already expressed in the shape's local frame.
double sdf_local(const ObjectShape& shape, const Vec3& p);

/// Unit gradient of sdf at p (outward surface normal direction).
Vec3 sdf_gradient(const ObjectShape& shape, const RigidTransform& pose, const Vec3& p);

/// Nearest point on the shape surface, p - sdf(p)·∇sdf(p).
Vec3 project_to_surface(const ObjectShape& shape, const RigidTransform& pose, const Vec3& p);

} // namespace rotip
