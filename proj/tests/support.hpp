#pragma once

#include "rotip/manipulation.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testing_support {

using namespace rotip;

inline World gripper_world(const Vec3& base, double aperture)
{
    World w;
    w.gripper.base_pose = RigidTransform::from_translation(base);
    w.gripper.base_target = w.gripper.base_pose;
    w.gripper.aperture = aperture;
    w.gripper.aperture_target = aperture;
    return w;
}

// Oyster card held flat between the fingers, pressed `pen` into each.
inline World card_world(double pen = 0.3)
{
    World w = gripper_world({0, 0, 70}, 26.76 - 2 * pen);
    w.objects.push_back({"card", Box{0.76, 85.6, 54}, RigidTransform::from_translation({0, 0, 27}), {},
                         ConstraintTag::OnTable});
    return w;
}

// Vertical cylinder of radius r, pressed `pen` into each finger.
inline World cylinder_world(double r, double pen = 0.5)
{
    World w = gripper_world({0, 0, 70}, 26 + 2 * r - 2 * pen);
    w.objects.push_back({"hex_key", Cylinder{r, 60}, RigidTransform::from_translation({0, 0, 30}), {},
                         ConstraintTag::GraspedVertical});
    return w;
}

inline World fabric_world(double mu = 0.8)
{
    World w = gripper_world({70, 0, 60}, 30);
    w.objects.push_back({"table", HalfSpace{Vec3(0, 0, 1), 0}, {}, {}, ConstraintTag::Fixed});
    FabricChain c;
    c.friction = mu;
    w.fabric = c;
    return w;
}

// Finger surface velocity minus object surface velocity, recomputed from
// first principles (v = ω×r about each body's own axis/origin).
inline Vec3 oracle_slip(const StepReport& rep, const World& w, const ContactRecord& c)
{
    const RigidTransform& fp = rep.finger_poses[static_cast<std::size_t>(c.finger)];
    const Vec3 axis = fp.apply_vector(Vec3::UnitZ());
    // Looking along +axis from the base, a right-handed turn appears clockwise.
    const Vec3 omega_f = axis * rep.spin_deg_s[static_cast<std::size_t>(c.finger)] * kDegToRad;
    const Vec3 v_f = omega_f.cross(c.point - fp.translation());
    const Twist& tw = rep.object_twists[static_cast<std::size_t>(c.object)];
    const RigidTransform& op = rep.object_poses[static_cast<std::size_t>(c.object)];
    const Vec3 q = project_to_surface(w.objects[static_cast<std::size_t>(c.object)].shape, op, c.point);
    const Vec3 v_o = tw.linear + (tw.angular * kDegToRad).cross(q - op.translation());
    const Vec3 v = v_f - v_o;
    return v - v.dot(c.normal) * c.normal;
}

inline std::filesystem::path scratch_dir(const std::string& name)
{
    const std::filesystem::path p = std::filesystem::path(ROTIP_TMP_DIR) / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace testing_support
