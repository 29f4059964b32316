#pragma once

#include <cstdint>
#include <variant>

namespace rotip {

/// Geared single-DoF drive. The actuator turns gear_num/gear_den times per
/// finger turn, so finger angle = actuator angle × gear_den / gear_num.
struct TransmissionConfig
{
    int gear_num = 5;
    int gear_den = 3;
    std::int64_t counts_per_rev = 4096;
    double max_speed = 360.0; // deg/s at the actuator

    void validate() const;
    bool operator==(const TransmissionConfig&) const = default;
};

enum class ActuatorMode { Position, Velocity };

struct ActuatorState
{
    ActuatorMode mode = ActuatorMode::Position;
    double target = 0.0;         // deg in [0, 360) or deg/s, depending on mode
    double actuator_angle = 0.0; // deg, accumulated
    std::int64_t quantized_reading = 0;

    bool operator==(const ActuatorState&) const = default;
};

struct PositionCommand
{
    double deg;
};

struct VelocityCommand
{
    double deg_per_s;
};

using ActuatorCommand = std::variant<PositionCommand, VelocityCommand>;

struct FingerAngle
{
    double accumulated; // deg
    double wrapped;     // deg in [0, 360)
};

/// Encoder reading for an accumulated actuator angle.
std::int64_t quantize_angle(double actuator_angle_deg, std::int64_t counts_per_rev);

/// Throws InvalidCommand on a non-finite command value.
ActuatorState set_command(const ActuatorState& st, const ActuatorCommand& cmd, const TransmissionConfig& cfg);

ActuatorState step_actuator(const ActuatorState& st, const TransmissionConfig& cfg, double dt);

FingerAngle finger_angle(const ActuatorState& st, const TransmissionConfig& cfg);

/// Actuator rate needed for a finger rate (inverse gear map).
double actuator_rate_for_finger(double finger_deg_per_s, const TransmissionConfig& cfg);

} // namespace rotip
