#pragma once

#include "rotip/manipulation.hpp"
#include "rotip/render.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rotip {

/// Position plus roll/pitch/yaw as written in the file.
struct PoseConfig
{
    Vec3 position_mm = Vec3::Zero();
    Vec3 rpy_deg = Vec3::Zero();

    RigidTransform transform() const { return RigidTransform::from_rpy_deg(rpy_deg, position_mm); }
    bool operator==(const PoseConfig&) const = default;
};

struct FingerConfig
{
    FingerShape shape;
    TransmissionConfig transmission;
    LightingConfig lighting = default_lighting();
    CameraMapping mapping = UnwrappedMapping{};
    ElastomerConfig elastomer;

    bool operator==(const FingerConfig&) const = default;
};

struct GripperConfig
{
    PoseConfig base{Vec3(0.0, 0.0, 70.0), Vec3::Zero()};
    double aperture_mm = 30.0;

    bool operator==(const GripperConfig&) const = default;
};

struct ObjectConfig
{
    std::string name;
    ObjectShape shape = Sphere{5.0};
    PoseConfig pose;
    ConstraintTag constraint = ConstraintTag::Free;

    bool operator==(const ObjectConfig&) const = default;
};

struct FabricConfig
{
    Vec2 pin_mm = Vec2::Zero(); // (x, z)
    double plane_y_mm = 0.0;
    int segments = 20;
    double segment_length_mm = 5.0;
    double bend_stiffness = 1.0;
    double friction = 0.8;

    bool operator==(const FabricConfig&) const = default;
};

struct OutputConfig
{
    double frame_period_s = 0.1; // 0 disables frames
    std::string image_format = "ppm";
    std::string out_dir = "out";

    bool operator==(const OutputConfig&) const = default;
};

struct ScenarioConfig
{
    FingerConfig finger;
    GripperConfig gripper;
    std::vector<ObjectConfig> objects;
    std::optional<FabricConfig> fabric;
    double friction = 1.0; // finger–object μ
    std::vector<PrimitiveCommand> commands;
    double dt_s = 0.01;
    OutputConfig output;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Strict parse: unknown keys and out-of-range values raise ValidationError
/// with a dotted path; malformed JSON raises ParseError with a line number.
ScenarioConfig parse_scenario(std::string_view text);

/// Reads and parses a file; a missing file raises ValidationError naming it.
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Fully explicit JSON document; parse_scenario(serialize_scenario(c)) == c.
std::string serialize_scenario(const ScenarioConfig& cfg);

/// Initial world state for a scenario.
World make_world(const ScenarioConfig& cfg);

} // namespace rotip
