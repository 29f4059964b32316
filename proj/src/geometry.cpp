#include "rotip/geometry.hpp"

#include "rotip/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rotip {

namespace {

double sign_or_plus(double v) { return v < 0.0 ? -1.0 : 1.0; }

// Distance and gradient of an axis-aligned 2D/3D box given q = |p| - half.
template <int N>
double box_distance(const Eigen::Matrix<double, N, 1>& q)
{
    const double outside = q.cwiseMax(0.0).norm();
    const double inside = std::min(q.maxCoeff(), 0.0);
    return outside + inside;
}

template <int N>
Eigen::Matrix<double, N, 1> box_gradient(const Eigen::Matrix<double, N, 1>& q,
                                         const Eigen::Matrix<double, N, 1>& signs)
{
    Eigen::Matrix<double, N, 1> g = Eigen::Matrix<double, N, 1>::Zero();
    if ((q.array() > 0.0).any()) {
        g = q.cwiseMax(0.0).normalized();
    } else {
        int axis = 0;
        q.maxCoeff(&axis);
        g[axis] = 1.0;
    }
    return g.cwiseProduct(signs);
}

} // namespace

double wrap_deg(double deg)
{
    double w = std::fmod(deg, 360.0);
    if (w < 0.0)
        w += 360.0;
    if (w >= 360.0)
        w = 0.0;
    return w;
}

// ---------------------------------------------------------------------------
// RigidTransform

RigidTransform::RigidTransform(const Quat& rotation, const Vec3& translation)
    : rotation_(rotation.normalized()), translation_(translation)
{
}

RigidTransform RigidTransform::from_axis_angle(const Vec3& axis, double angle_rad, const Vec3& t)
{
    return {Quat(Eigen::AngleAxisd(angle_rad, axis.normalized())), t};
}

RigidTransform RigidTransform::from_rpy_deg(const Vec3& rpy_deg, const Vec3& t)
{
    const Quat q = Eigen::AngleAxisd(rpy_deg.z() * kDegToRad, Vec3::UnitZ()) *
                   Eigen::AngleAxisd(rpy_deg.y() * kDegToRad, Vec3::UnitY()) *
                   Eigen::AngleAxisd(rpy_deg.x() * kDegToRad, Vec3::UnitX());
    return {q, t};
}

RigidTransform RigidTransform::inverse() const
{
    const Quat inv = rotation_.conjugate();
    return {inv, -(inv * translation_)};
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const
{
    return {rotation_ * other.rotation_, rotation_ * other.translation_ + translation_};
}

double RigidTransform::yaw_deg() const
{
    const Vec3 x = rotation_ * Vec3::UnitX();
    return std::atan2(x.y(), x.x()) * kRadToDeg;
}

bool RigidTransform::operator==(const RigidTransform& other) const
{
    return rotation_.coeffs() == other.rotation_.coeffs() && translation_ == other.translation_;
}

// ---------------------------------------------------------------------------
// Finger shape and chart

double FingerShape::cap_meridian() const
{
    return tip == TipShape::Hemisphere ? 0.5 * kPi * radius : radius;
}

double FingerShape::tip_height() const
{
    return tip == TipShape::Hemisphere ? body_length + radius : body_length;
}

void FingerShape::validate() const
{
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw ValidationError("finger.radius_mm", "must be > 0");
    if (!(body_length > 0.0) || !std::isfinite(body_length))
        throw ValidationError("finger.body_length_mm", "must be > 0");
    if (!(sensing_arclength > 0.0) || sensing_arclength > cap_meridian() + body_length + 1e-12)
        throw ValidationError("finger.sensing_arclength_mm", "must lie in (0, cap meridian + body length]");
}

SurfaceCoord make_surface_coord(const FingerShape& f, double phi_deg, double s_mm)
{
    return {wrap_deg(phi_deg), std::clamp(s_mm, 0.0, f.sensing_arclength)};
}

double surface_radius(const FingerShape& f, double s)
{
    const double cap = f.cap_meridian();
    if (s >= cap)
        return f.radius;
    return f.tip == TipShape::Hemisphere ? f.radius * std::sin(s / f.radius) : s;
}

SurfacePoint surface_point(const FingerShape& f, const SurfaceCoord& c)
{
    const double phi = c.phi_deg * kDegToRad;
    const double cp = std::cos(phi), sp = std::sin(phi);
    const double cap = f.cap_meridian();
    const double R = f.radius;
    if (c.s_mm >= cap) {
        const double z = f.body_length - (c.s_mm - cap);
        return {Vec3(R * cp, R * sp, z), Vec3(cp, sp, 0.0)};
    }
    if (f.tip == TipShape::Hemisphere) {
        const double theta = c.s_mm / R;
        const double st = std::sin(theta), ct = std::cos(theta);
        const Vec3 n(st * cp, st * sp, ct);
        return {Vec3(0.0, 0.0, f.body_length) + R * n, n};
    }
    return {Vec3(c.s_mm * cp, c.s_mm * sp, f.body_length), Vec3::UnitZ()};
}

std::pair<Vec3, Vec3> surface_tangents(const FingerShape& f, const SurfaceCoord& c)
{
    const double phi = c.phi_deg * kDegToRad;
    const double cp = std::cos(phi), sp = std::sin(phi);
    const double rho = surface_radius(f, c.s_mm);
    const Vec3 d_phi(-rho * sp, rho * cp, 0.0);
    if (c.s_mm >= f.cap_meridian())
        return {d_phi, Vec3(0.0, 0.0, -1.0)};
    if (f.tip == TipShape::Hemisphere) {
        const double theta = c.s_mm / f.radius;
        return {d_phi, Vec3(std::cos(theta) * cp, std::cos(theta) * sp, -std::sin(theta))};
    }
    return {d_phi, Vec3(cp, sp, 0.0)};
}

SurfaceCoord surface_param_of(const FingerShape& f, const Vec3& p)
{
    const double R = f.radius;
    const double L = f.body_length;
    const double cap = f.cap_meridian();
    const double s_max = f.sensing_arclength;
    const double rho = std::hypot(p.x(), p.y());
    const double phi = rho < 1e-12 ? 0.0 : wrap_deg(std::atan2(p.y(), p.x()) * kRadToDeg);
    const double cp = rho < 1e-12 ? 1.0 : p.x() / rho;
    const double sp = rho < 1e-12 ? 0.0 : p.y() / rho;

    // Candidate on the tip cap.
    double s_cap = 0.0;
    Vec3 q_cap;
    if (f.tip == TipShape::Hemisphere) {
        const double theta_max = std::min(0.5 * kPi, s_max / R);
        const double theta = std::clamp(std::atan2(rho, p.z() - L), 0.0, theta_max);
        s_cap = R * theta;
        q_cap = Vec3(R * std::sin(theta) * cp, R * std::sin(theta) * sp, L + R * std::cos(theta));
    } else {
        const double r = std::min(rho, std::min(R, s_max));
        s_cap = r;
        q_cap = Vec3(r * cp, r * sp, L);
    }
    double best_s = s_cap;
    double best_d = (p - q_cap).squaredNorm();

    // Candidate on the cylinder wall.
    if (s_max > cap) {
        const double z_min = L - (s_max - cap);
        const double z = std::clamp(p.z(), z_min, L);
        const Vec3 q_wall(R * cp, R * sp, z);
        const double d = (p - q_wall).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best_s = cap + (L - z);
        }
    }
    if (best_s <= 0.0)
        return {0.0, 0.0};
    return make_surface_coord(f, phi, best_s);
}

double finger_sdf(const FingerShape& f, const Vec3& p)
{
    const double rho = std::hypot(p.x(), p.y());
    const double L = f.body_length;
    if (f.tip == TipShape::Hemisphere) {
        if (p.z() >= L)
            return (p - Vec3(0.0, 0.0, L)).norm() - f.radius;
        return rho - f.radius;
    }
    return box_distance<2>(Eigen::Vector2d(rho - f.radius, p.z() - L));
}

double ChartGrid::cell_area(const FingerShape& f, int j) const
{
    const double h = ds(f);
    const double s = s_mm(f, j);
    const double a = std::max(0.0, s - 0.5 * h);
    const double b = std::min(f.sensing_arclength, s + 0.5 * h);
    const double cap = f.cap_meridian();
    const double R = f.radius;

    // ∫ρ(s) ds over [a, b], piecewise over cap and wall.
    double integral = 0.0;
    const double a_cap = std::min(a, cap), b_cap = std::min(b, cap);
    if (b_cap > a_cap) {
        if (f.tip == TipShape::Hemisphere)
            integral += R * R * (std::cos(a_cap / R) - std::cos(b_cap / R));
        else
            integral += 0.5 * (b_cap * b_cap - a_cap * a_cap);
    }
    const double a_wall = std::max(a, cap), b_wall = std::max(b, cap);
    integral += R * (b_wall - a_wall);
    return integral * dphi_deg() * kDegToRad;
}

// ---------------------------------------------------------------------------
// Object shapes

void validate(const ObjectShape& shape)
{
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            auto positive = [](double v, const char* what) {
                if (!(v > 0.0) || !std::isfinite(v))
                    throw ValidationError(what, "must be > 0");
            };
            if constexpr (std::is_same_v<T, Sphere>) {
                positive(s.radius, "shape.radius_mm");
            } else if constexpr (std::is_same_v<T, Cylinder>) {
                positive(s.radius, "shape.radius_mm");
                positive(s.height, "shape.height_mm");
            } else if constexpr (std::is_same_v<T, Box>) {
                positive(s.wx, "shape.size_mm[0]");
                positive(s.wy, "shape.size_mm[1]");
                positive(s.wz, "shape.size_mm[2]");
            } else {
                if (std::abs(s.normal.norm() - 1.0) > 1e-9)
                    throw ValidationError("shape.normal", "must be unit length");
                if (!std::isfinite(s.offset))
                    throw ValidationError("shape.offset_mm", "must be finite");
            }
        },
        shape);
}

double sdf_local(const ObjectShape& shape, const Vec3& p)
{
    return std::visit(
        [&p](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Sphere>) {
                return p.norm() - s.radius;
            } else if constexpr (std::is_same_v<T, Cylinder>) {
                const double rho = std::hypot(p.x(), p.y());
                return box_distance<2>(Eigen::Vector2d(rho - s.radius, std::abs(p.z()) - 0.5 * s.height));
            } else if constexpr (std::is_same_v<T, Box>) {
                const Vec3 q = p.cwiseAbs() - 0.5 * Vec3(s.wx, s.wy, s.wz);
                return box_distance<3>(q);
            } else {
                return s.normal.dot(p) - s.offset;
            }
        },
        shape);
}

namespace {

Vec3 local_gradient(const ObjectShape& shape, const Vec3& p)
{
    return std::visit(
        [&p](const auto& s) -> Vec3 {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Sphere>) {
                const double n = p.norm();
                return n > 0.0 ? Vec3(p / n) : Vec3(Vec3::UnitZ());
            } else if constexpr (std::is_same_v<T, Cylinder>) {
                const double rho = std::hypot(p.x(), p.y());
                const Eigen::Vector2d q(rho - s.radius, std::abs(p.z()) - 0.5 * s.height);
                const Eigen::Vector2d g = box_gradient<2>(q, Eigen::Vector2d(1.0, sign_or_plus(p.z())));
                const Vec3 radial = rho > 0.0 ? Vec3(p.x() / rho, p.y() / rho, 0.0) : Vec3(Vec3::UnitX());
                return g.x() * radial + g.y() * Vec3::UnitZ();
            } else if constexpr (std::is_same_v<T, Box>) {
                const Vec3 q = p.cwiseAbs() - 0.5 * Vec3(s.wx, s.wy, s.wz);
                const Vec3 signs(sign_or_plus(p.x()), sign_or_plus(p.y()), sign_or_plus(p.z()));
                return box_gradient<3>(q, signs);
            } else {
                return s.normal;
            }
        },
        shape);
}

} // namespace

double sdf(const ObjectShape& shape, const RigidTransform& pose, const Vec3& p)
{
    return sdf_local(shape, pose.inverse().apply(p));
}

Vec3 sdf_gradient(const ObjectShape& shape, const RigidTransform& pose, const Vec3& p)
{
    return pose.apply_vector(local_gradient(shape, pose.inverse().apply(p)));
}

Vec3 project_to_surface(const ObjectShape& shape, const RigidTransform& pose, const Vec3& p)
{
    return p - sdf(shape, pose, p) * sdf_gradient(shape, pose, p);
}

} // namespace rotip
