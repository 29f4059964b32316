#pragma once

#include "rotip/contact.hpp"
#include "rotip/fabric.hpp"
#include "rotip/render.hpp"
#include "rotip/transmission.hpp"

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rotip {

// ---------------------------------------------------------------------------
// Gripper

enum class MountSide { A, B }; // A at -x, B at +x of the base frame

struct FingerUnit
{
    MountSide side = MountSide::A;
    ActuatorState actuator;
    TransmissionConfig transmission;
    FingerShape shape;

    bool operator==(const FingerUnit&) const = default;
};

/// Base rate limit for translation and aperture changes, mm/s.
inline constexpr double kBaseSpeed = 50.0;

struct GripperState
{
    RigidTransform base_pose;
    double aperture = 30.0; // mm between the two finger axes along base x
    std::array<FingerUnit, 2> fingers{FingerUnit{MountSide::A, {}, {}, {}}, FingerUnit{MountSide::B, {}, {}, {}}};
    RigidTransform base_target;
    double aperture_target = 30.0;

    bool operator==(const GripperState&) const = default;
};

/// Fingers hang tip-down from the base: base ∘ T(∓aperture/2 x) ∘ Rx(180°) ∘ Rz(finger angle).
RigidTransform finger_pose(const GripperState& g, int finger);

// ---------------------------------------------------------------------------
// Objects

/// Allowed velocity components: Free = all six; OnTable = (vx, vy, ωz);
/// GraspedVertical = (vz, ωz); Fixed never moves.
enum class ConstraintTag { Free, OnTable, GraspedVertical, Fixed };

struct ObjectState
{
    std::string name;
    ObjectShape shape;
    RigidTransform pose;
    Twist twist; // deg/s, mm/s of the body origin
    ConstraintTag tag = ConstraintTag::Free;

    bool operator==(const ObjectState&) const = default;
};

// ---------------------------------------------------------------------------
// Quasi-static solve

enum class ContactMode { Sticking, Sliding };

/// One contact handed to the solver, all in world coordinates.
struct SolverContact
{
    Vec3 finger_point;    // on the finger surface
    Vec3 object_point;    // on the object surface
    Vec3 normal;          // finger outward normal
    Vec3 finger_velocity; // mm/s of the finger material at finger_point
};

struct TwistSolution
{
    Twist twist;
    std::vector<ContactMode> modes;
    std::vector<double> slip; // mm/s residual tangential speed per contact
};

/// Least squares over the tag's velocity components: minimizes Σ|tangential
/// slip|² subject to zero normal relative velocity, minimal-norm on ties.
/// mu = 0 drops the tangential rows. Twist is about `origin`.
/// Throws NoContact on an empty contact list.
TwistSolution solve_object_twist(std::span<const SolverContact> contacts, const Vec3& origin, ConstraintTag tag,
                                 double mu);

// ---------------------------------------------------------------------------
// World

struct WorldParams
{
    double friction = 1.0; // finger–object μ
    ElastomerConfig elastomer;
    ChartGrid grid;
    double min_depth = 0.05; // mm
    double min_area = 1.0;   // mm²

    bool operator==(const WorldParams&) const = default;
};

/// What one step saw, kept for logging and independent checks.
struct ContactRecord
{
    int finger = 0;
    int object = 0;
    Vec3 point;  // refined contact point on the nominal finger surface
    Vec3 normal; // finger outward
    double penetration = 0.0;
    ContactMode mode = ContactMode::Sticking;
    double slip = 0.0;
};

struct StepReport
{
    double t = 0.0;
    std::array<RigidTransform, 2> finger_poses;
    std::array<double, 2> spin_deg_s{0.0, 0.0};
    std::vector<RigidTransform> object_poses; // before integration
    std::vector<Twist> object_twists;
    std::vector<ContactRecord> contacts;
    double max_penetration = 0.0; // after the step
};

/// Contacts depend only on base pose, aperture and object poses: spinning a
/// finger about its own axis leaves them unchanged.
struct ContactCache
{
    RigidTransform base_pose;
    double aperture = 0.0;
    std::vector<RigidTransform> object_poses;
    std::vector<ContactRecord> contacts;
};

struct World
{
    GripperState gripper;
    std::vector<ObjectState> objects;
    std::optional<FabricChain> fabric;
    WorldParams params;
    double time = 0.0;
    std::optional<ContactCache> cache;
};

/// Contacts of each finger against every object at the current poses.
std::vector<ContactRecord> find_contacts(const World& w);

/// Deepest indentation of any non-fixed object into either finger.
double max_penetration(const World& w);

/// Advances actuators and base, solves object twists from the contacts,
/// integrates poses, steps the fabric and projects out excess penetration.
World step_world(const World& w, double dt, StepReport* report = nullptr);

// ---------------------------------------------------------------------------
// Commands and primitives

struct SpinCommand
{
    double omega_deg_s;
    double duration_s;
    bool operator==(const SpinCommand&) const = default;
};

struct TranslateCommand
{
    double omega_deg_s;
    double duration_s;
    bool operator==(const TranslateCommand&) const = default;
};

struct RollGraspCommand
{
    double press_depth_mm = 1.0;
    double roll_angle_deg = 540.0;
    double roll_speed_deg_s = 90.0;
    bool operator==(const RollGraspCommand&) const = default;
};

struct CloseCommand
{
    double aperture_mm;
    bool operator==(const CloseCommand&) const = default;
};

struct MoveBaseCommand
{
    Vec3 position_mm;
    Vec3 rpy_deg = Vec3::Zero();
    double duration_s = 1.0;
    bool operator==(const MoveBaseCommand&) const = default;
};

using PrimitiveCommand = std::variant<SpinCommand, TranslateCommand, RollGraspCommand, CloseCommand, MoveBaseCommand>;

/// Per-step log row.
struct LogRecord
{
    double t = 0.0;
    double finger_a_deg = 0.0;
    double finger_b_deg = 0.0;
    double aperture = 0.0;
    std::optional<Vec3> obj_position;
    std::optional<double> obj_yaw_deg;
    int n_contacts = 0;
    double max_penetration = 0.0;
    std::optional<Vec2> fabric_tip;
    std::optional<bool> success;
};

LogRecord make_log_record(const World& w, int n_contacts);

/// Called after every step; lets callers sample frames or check reports.
using StepObserver = std::function<void(const World&, const StepReport&)>;

struct PrimitiveResult
{
    World world;
    std::vector<LogRecord> log;
    std::optional<bool> success; // roll-grasp only
};

PrimitiveResult primitive_spin(const World& w, double omega_deg_s, double duration_s, double dt,
                               const StepObserver& obs = {});
PrimitiveResult primitive_translate(const World& w, double omega_deg_s, double duration_s, double dt,
                                    const StepObserver& obs = {});
PrimitiveResult primitive_rollgrasp(const World& w, const RollGraspCommand& cmd, double dt,
                                    const StepObserver& obs = {});
PrimitiveResult primitive_close(const World& w, double aperture_mm, double dt, const StepObserver& obs = {});
PrimitiveResult primitive_move_base(const World& w, const MoveBaseCommand& cmd, double dt,
                                    const StepObserver& obs = {});

PrimitiveResult execute(const World& w, const PrimitiveCommand& cmd, double dt, const StepObserver& obs = {});

} // namespace rotip
