#include "rotip/fabric.hpp"

#include "rotip/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rotip {

void FabricChain::validate() const
{
    if (angles.empty())
        throw ValidationError("fabric.segments", "must be >= 1");
    if (!(seg_len > 0.0) || !std::isfinite(seg_len))
        throw ValidationError("fabric.segment_length_mm", "must be > 0");
    if (!(bend_stiffness > 0.0) || !std::isfinite(bend_stiffness))
        throw ValidationError("fabric.bend_stiffness", "must be > 0");
    if (!(friction >= 0.0) || !std::isfinite(friction))
        throw ValidationError("fabric.friction", "must be >= 0");
    for (double a : angles)
        if (!std::isfinite(a))
            throw ValidationError("fabric.angles", "must be finite");
}

std::vector<Vec2> FabricChain::nodes() const
{
    std::vector<Vec2> out;
    out.reserve(angles.size() + 1);
    out.push_back(pin);
    double heading = 0.0;
    for (double a : angles) {
        heading += a;
        out.push_back(out.back() + seg_len * Vec2(std::cos(heading), std::sin(heading)));
    }
    return out;
}

Vec2 FabricChain::tip() const
{
    return nodes().back();
}

double FabricChain::tip_curl_deg() const
{
    double heading = 0.0;
    for (double a : angles)
        heading += a;
    return heading * kRadToDeg;
}

double FabricChain::bend_energy() const
{
    double e = 0.0;
    for (std::size_t k = 1; k < angles.size(); ++k)
        e += bend_stiffness * angles[k] * angles[k];
    return e;
}

FabricChain step_fabric(const FabricChain& chain, std::span<const ChainContact> contacts, double dt)
{
    FabricChain next = chain;
    if (contacts.empty())
        return next;

    const int n = static_cast<int>(chain.angles.size());
    const double roll_radius = chain.bend_stiffness * chain.seg_len;
    const double max_bend = chain.seg_len / roll_radius;
    const double cap = kFabricDragCap / chain.bend_stiffness;

    int proximal = n;
    bool dragged = false;
    for (const ChainContact& c : contacts) {
        const int node = std::clamp(c.node, 1, n);
        proximal = std::min(proximal, node);
        const double sign = c.surface_speed > 0.0 ? 1.0 : (c.surface_speed < 0.0 ? -1.0 : 0.0);
        double remaining = chain.friction * std::abs(c.surface_speed) * dt;
        dragged = dragged || remaining > 0.0;
        for (int k = n - 1; k >= node && remaining > 0.0; --k) {
            double& a = next.angles[k];
            const double room = max_bend - sign * a;
            const double d = std::min({remaining / roll_radius, room, cap});
            if (d <= 0.0)
                continue;
            a += sign * d;
            remaining -= d * roll_radius;
        }
    }

    if (!dragged)
        return next;
    // Free span between the pin and the first contact: one pass toward the
    // straight rest shape.
    const double relax = chain.bend_stiffness / (1.0 + chain.bend_stiffness);
    for (int k = 0; k < proximal; ++k)
        next.angles[k] -= relax * next.angles[k];
    return next;
}

} // namespace rotip
