#include "rotip/transmission.hpp"

#include "rotip/errors.hpp"
#include "rotip/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace rotip {

void TransmissionConfig::validate() const
{
    if (gear_num <= 0)
        throw ValidationError("transmission.gear_num", "must be > 0");
    if (gear_den <= 0)
        throw ValidationError("transmission.gear_den", "must be > 0");
    if (counts_per_rev <= 0)
        throw ValidationError("transmission.counts_per_rev", "must be > 0");
    if (!(max_speed > 0.0) || !std::isfinite(max_speed))
        throw ValidationError("transmission.max_speed_deg_s", "must be > 0");
}

std::int64_t quantize_angle(double actuator_angle_deg, std::int64_t counts_per_rev)
{
    const double frac = wrap_deg(actuator_angle_deg) / 360.0;
    const auto counts = static_cast<std::int64_t>(std::llround(frac * static_cast<double>(counts_per_rev)));
    return counts % counts_per_rev;
}

ActuatorState set_command(const ActuatorState& st, const ActuatorCommand& cmd, const TransmissionConfig& cfg)
{
    ActuatorState next = st;
    if (const auto* pos = std::get_if<PositionCommand>(&cmd)) {
        if (!std::isfinite(pos->deg))
            throw InvalidCommand("position command must be finite");
        next.mode = ActuatorMode::Position;
        next.target = wrap_deg(pos->deg);
    } else {
        const double v = std::get<VelocityCommand>(cmd).deg_per_s;
        if (!std::isfinite(v))
            throw InvalidCommand("velocity command must be finite");
        next.mode = ActuatorMode::Velocity;
        next.target = std::clamp(v, -cfg.max_speed, cfg.max_speed);
    }
    return next;
}

ActuatorState step_actuator(const ActuatorState& st, const TransmissionConfig& cfg, double dt)
{
    if (!(dt > 0.0))
        throw InvalidCommand("dt must be > 0");
    ActuatorState next = st;
    if (st.mode == ActuatorMode::Velocity) {
        next.actuator_angle = st.actuator_angle + st.target * dt;
    } else {
        // Shorter modular arc; an exact half turn goes positive.
        double arc = wrap_deg(st.target - wrap_deg(st.actuator_angle));
        if (arc > 180.0)
            arc -= 360.0;
        const double max_step = cfg.max_speed * dt;
        if (std::abs(arc) <= max_step) {
            // Land exactly on the target angle within the current turn.
            const double turns = std::round((st.actuator_angle + arc - st.target) / 360.0);
            next.actuator_angle = turns * 360.0 + st.target;
        } else {
            next.actuator_angle = st.actuator_angle + std::copysign(max_step, arc);
        }
    }
    next.quantized_reading = quantize_angle(next.actuator_angle, cfg.counts_per_rev);
    return next;
}

FingerAngle finger_angle(const ActuatorState& st, const TransmissionConfig& cfg)
{
    const double accumulated = st.actuator_angle * cfg.gear_den / cfg.gear_num;
    return {accumulated, wrap_deg(accumulated)};
}

double actuator_rate_for_finger(double finger_deg_per_s, const TransmissionConfig& cfg)
{
    return finger_deg_per_s * cfg.gear_num / cfg.gear_den;
}

} // namespace rotip
