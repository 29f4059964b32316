#include "rotip/contact.hpp"

#include "rotip/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace rotip {

double PenetrationField::max_depth() const
{
    return depth.empty() ? 0.0 : *std::max_element(depth.begin(), depth.end());
}

PenetrationField penetration_field(const FingerShape& f, const RigidTransform& finger_pose,
                                   std::span<const PosedObject> objects, const ChartGrid& grid)
{
    if (grid.n_phi < 8 || grid.n_s < 8)
        throw GridMismatch("chart grid must be at least 8x8");

    PenetrationField field{grid, f, finger_pose, std::vector<double>(grid.cells(), 0.0),
                           std::vector<int>(grid.cells(), -1)};

    std::vector<RigidTransform> to_local;
    to_local.reserve(objects.size());
    for (const auto& obj : objects)
        to_local.push_back(obj.pose.inverse());

    for (int j = 0; j < grid.n_s; ++j) {
        for (int i = 0; i < grid.n_phi; ++i) {
            const Vec3 p = finger_pose.apply(surface_point(f, {grid.phi_deg(i), grid.s_mm(f, j)}).point);
            double best = 0.0;
            int best_id = -1;
            for (std::size_t k = 0; k < objects.size(); ++k) {
                const double d = -sdf_local(objects[k].shape, to_local[k].apply(p));
                if (d > best) {
                    best = d;
                    best_id = static_cast<int>(k);
                }
            }
            field.depth[grid.index(i, j)] = best;
            field.object_id[grid.index(i, j)] = best_id;
        }
    }
    return field;
}

std::vector<ContactPatch> extract_patches(const PenetrationField& field, double min_depth, double min_area)
{
    if (!(min_depth > 0.0))
        throw InvalidCommand("min_depth must be > 0");

    const ChartGrid& g = field.grid;
    std::vector<char> visited(g.cells(), 0);
    std::vector<ContactPatch> patches;
    std::deque<std::pair<int, int>> queue;

    for (int j0 = 0; j0 < g.n_s; ++j0) {
        for (int i0 = 0; i0 < g.n_phi; ++i0) {
            if (visited[g.index(i0, j0)] || field.at(i0, j0) <= min_depth)
                continue;

            double area = 0.0, w_sum = 0.0, wc = 0.0, wsn = 0.0, peak = 0.0;
            Vec3 wp = Vec3::Zero();
            int peak_id = -1;
            visited[g.index(i0, j0)] = 1;
            queue.emplace_back(i0, j0);
            while (!queue.empty()) {
                const auto [i, j] = queue.front();
                queue.pop_front();
                const double d = field.at(i, j);
                const double phi = g.phi_deg(i) * kDegToRad;
                area += g.cell_area(field.finger, j);
                w_sum += d;
                wp += d * surface_point(field.finger, {g.phi_deg(i), g.s_mm(field.finger, j)}).point;
                wc += d * std::cos(phi);
                wsn += d * std::sin(phi);
                if (d > peak) {
                    peak = d;
                    peak_id = field.object_id[g.index(i, j)];
                }
                const std::pair<int, int> nbrs[4] = {
                    {(i + 1) % g.n_phi, j}, {(i + g.n_phi - 1) % g.n_phi, j}, {i, j + 1}, {i, j - 1}};
                for (const auto& [ni, nj] : nbrs) {
                    if (nj < 0 || nj >= g.n_s)
                        continue;
                    const std::size_t idx = g.index(ni, nj);
                    if (!visited[idx] && field.at(ni, nj) > min_depth) {
                        visited[idx] = 1;
                        queue.emplace_back(ni, nj);
                    }
                }
            }
            if (area < min_area)
                continue;

            ContactPatch patch;
            const double phi_c = (wc == 0.0 && wsn == 0.0) ? 0.0 : std::atan2(wsn, wc) * kRadToDeg;
            // s from the 3-D centroid, which stays on the pole when a patch covers it.
            const double s_c = surface_param_of(field.finger, wp / w_sum).s_mm;
            patch.center = make_surface_coord(field.finger, phi_c, s_c);
            const SurfacePoint sp = surface_point(field.finger, patch.center);
            patch.point = field.finger_pose.apply(sp.point);
            patch.normal = field.finger_pose.apply_vector(sp.normal);
            patch.max_penetration = peak;
            patch.area = area;
            patch.object_id = peak_id;
            patches.push_back(patch);
        }
    }
    std::stable_sort(patches.begin(), patches.end(),
                     [](const ContactPatch& a, const ContactPatch& b) { return a.area > b.area; });
    return patches;
}

namespace {

// Finds the maximum of a 1D function from its derivative by bisection on a
// bracket where the derivative goes from positive to negative.
template <typename Deriv>
bool bisect_maximum(Deriv&& deriv, double lo, double hi, double& out)
{
    // Flat ridges (derivative zero up to rounding) are left alone.
    constexpr double flat = 1e-9;
    const double g_lo = deriv(lo), g_hi = deriv(hi);
    if (!(g_lo > flat && g_hi < -flat))
        return false;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        const double g = deriv(mid);
        if (g > 0.0)
            lo = mid;
        else if (g < 0.0)
            hi = mid;
        else {
            lo = hi = mid;
            break;
        }
    }
    out = 0.5 * (lo + hi);
    return true;
}

} // namespace

ContactPatch refine_contact(const FingerShape& f, const RigidTransform& finger_pose, const PosedObject& object,
                            const ContactPatch& patch)
{
    const double pole_eps = 1e-9;
    double phi = patch.center.phi_deg;
    double s = patch.center.s_mm;

    // d(depth)/dq = -∇sdf · (world tangent along q)
    auto slope = [&](double phi_deg, double s_mm, bool along_phi) {
        const SurfaceCoord c{phi_deg, s_mm};
        const Vec3 p = finger_pose.apply(surface_point(f, c).point);
        const auto [t_phi, t_s] = surface_tangents(f, c);
        const Vec3 t = finger_pose.apply_vector(along_phi ? t_phi : t_s);
        return -sdf_gradient(object.shape, object.pose, p).dot(t);
    };

    for (int round = 0; round < 4; ++round) {
        const double phi_prev = phi, s_prev = s;
        if (s > pole_eps) {
            double out = phi;
            if (bisect_maximum([&](double x) { return slope(x, s, true); }, phi - 5.0, phi + 5.0, out))
                phi = out;
        }
        const double lo = std::max(0.0, s - 2.0), hi = std::min(f.sensing_arclength, s + 2.0);
        double out = s;
        if (bisect_maximum([&](double x) { return slope(phi, x, false); }, lo, hi, out))
            s = out;
        if (phi == phi_prev && s == s_prev)
            break;
    }

    ContactPatch refined = patch;
    refined.center = make_surface_coord(f, phi, s);
    const SurfacePoint sp = surface_point(f, refined.center);
    refined.point = finger_pose.apply(sp.point);
    refined.normal = finger_pose.apply_vector(sp.normal);
    refined.max_penetration = std::max(patch.max_penetration, -sdf(object.shape, object.pose, refined.point));
    return refined;
}

Vec3 RigidMotion::velocity_at(const Vec3& p) const
{
    return twist.linear + (twist.angular * kDegToRad).cross(p - origin);
}

RigidMotion finger_motion(const RigidTransform& finger_pose, double spin_deg_s)
{
    RigidMotion m;
    m.origin = finger_pose.translation();
    m.twist.angular = spin_deg_s * finger_pose.apply_vector(Vec3::UnitZ());
    return m;
}

ContactFrame contact_frame(const RigidTransform& finger_pose, const Vec3& outward_normal)
{
    const Vec3 n = outward_normal.normalized();
    const Vec3 axis = finger_pose.apply_vector(Vec3::UnitZ());
    Vec3 t1 = axis.cross(n);
    if (t1.norm() < 1e-9) {
        // On the tip pole: fall back to the finger's own y axis.
        t1 = finger_pose.apply_vector(Vec3::UnitY());
        t1 -= t1.dot(n) * n;
    }
    t1.normalize();
    return {n, t1, n.cross(t1)};
}

RelativeVelocity relative_velocity(const RigidMotion& a, const Vec3& pa, const RigidMotion& b, const Vec3& pb,
                                   const ContactFrame& frame)
{
    const Vec3 v = a.velocity_at(pa) - b.velocity_at(pb);
    return {v.dot(frame.normal), Vec2(v.dot(frame.t1), v.dot(frame.t2))};
}

RelativeVelocity relative_surface_velocity(const FingerShape& f, const RigidTransform& finger_pose,
                                           double spin_deg_s, const PosedObject& object,
                                           const Twist& object_twist, const Vec3& p)
{
    const Vec3 p_local = finger_pose.inverse().apply(p);
    const SurfacePoint sp = surface_point(f, surface_param_of(f, p_local));
    const Vec3 p_finger = finger_pose.apply(sp.point);
    if ((p_finger - p).norm() > 1.0)
        throw StaleContact("contact point is more than 1 mm from the finger surface");
    if (std::abs(sdf(object.shape, object.pose, p)) > 1.0)
        throw StaleContact("contact point is more than 1 mm from the object surface");
    const Vec3 p_object = project_to_surface(object.shape, object.pose, p);

    const RigidMotion finger = finger_motion(finger_pose, spin_deg_s);
    const RigidMotion body{object_twist, object.pose.translation()};
    return relative_velocity(finger, p_finger, body, p_object,
                             contact_frame(finger_pose, finger_pose.apply_vector(sp.normal)));
}

} // namespace rotip
