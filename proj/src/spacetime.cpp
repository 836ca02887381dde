#include "lworlds/spacetime.hpp"

#include "lworlds/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lw::spacetime {

void Event::validate() const
{
    if (!std::isfinite(t) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
        throw DomainError("event " + id + " has non-finite coordinates");
    }
}

std::string to_string(IntervalClass c)
{
    switch (c) {
    case IntervalClass::Timelike: return "timelike";
    case IntervalClass::Spacelike: return "spacelike";
    case IntervalClass::Lightlike: return "lightlike";
    }
    return "?";
}

double interval(const Event& a, const Event& b)
{
    const double dt = b.t - a.t, dx = b.x - a.x, dy = b.y - a.y, dz = b.z - a.z;
    return dt * dt - dx * dx - dy * dy - dz * dz;
}

IntervalClass interval_class(const Event& a, const Event& b)
{
    const double dt = b.t - a.t, dx = b.x - a.x, dy = b.y - a.y, dz = b.z - a.z;
    const double scale = std::max({1.0, dt * dt, dx * dx + dy * dy + dz * dz});
    const double s = interval(a, b);
    if (std::abs(s) <= kLightlikeTolerance * scale) {
        return IntervalClass::Lightlike;
    }
    return s > 0 ? IntervalClass::Timelike : IntervalClass::Spacelike;
}

bool causally_precedes(const Event& a, const Event& b)
{
    return a.t <= b.t && interval_class(a, b) != IntervalClass::Spacelike;
}

std::vector<Event> past_light_cone(const Event& e, const std::vector<Event>& candidates)
{
    std::vector<Event> out;
    for (const auto& c : candidates) {
        if (causally_precedes(c, e)) {
            out.push_back(c);
        }
    }
    return out;
}

Frame::Frame(double v) : v_(v)
{
    if (!std::isfinite(v) || std::abs(v) >= 1.0) {
        throw FrameError("frame velocity must satisfy |v| < 1, got " + std::to_string(v));
    }
    gamma_ = 1.0 / std::sqrt(1.0 - v * v);
}

Event boost(const Event& e, const Frame& f)
{
    Event out = e;
    out.t = f.gamma() * (e.t - f.v() * e.x);
    out.x = f.gamma() * (e.x - f.v() * e.t);
    return out;
}

Cascade branching_cascade(const Worldline& object1, const Worldline& object2, double trigger_t,
                          const CascadeOptions& options)
{
    const Frame s(object1.v);
    const Frame s_prime(object2.v);
    const Worldline lines[2] = {object1, object2};
    Cascade out;
    out.degenerate = object1.v == object2.v;
    const std::size_t depth = out.degenerate ? std::min<std::size_t>(options.depth, 2) : options.depth;

    auto make = [&](std::size_t k, int object, double t, std::string frame) {
        const auto& line = lines[object - 1];
        Event e{"E" + std::to_string(k), t, line.x_at(t), line.y, 0.0};
        return CascadeStep{e, object, std::move(frame), boost(e, s).t, boost(e, s_prime).t};
    };

    if (depth == 0) {
        return out;
    }
    out.steps.push_back(make(1, 1, trigger_t, "trigger"));
    while (out.steps.size() < depth) {
        const auto& prev = out.steps.back();
        const std::size_t k = out.steps.size() + 1;
        // E2 is induced in S, E3 in S', alternating.
        const bool in_s = k % 2 == 0;
        const double u = in_s ? s.v() : s_prime.v();
        const int object = prev.object == 1 ? 2 : 1;
        const auto& line = lines[object - 1];
        // t - u x is constant along the hypersurface through prev
        const double c = prev.event.t - u * prev.event.x;
        const double t = (c + u * line.x0) / (1.0 - u * line.v);
        if (options.time_floor && t < *options.time_floor) {
            out.floor_reached = true;
            break;
        }
        out.steps.push_back(make(k, object, t, in_s ? "S" : "S'"));
    }
    return out;
}

}  // namespace lw::spacetime
