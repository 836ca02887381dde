#pragma once

// Minkowski geometry in units with c = 1.

#include <optional>
#include <string>
#include <vector>

namespace lw::spacetime {

struct Event {
    std::string id;
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    /// Throws DomainError for non-finite coordinates.
    void validate() const;
};

enum class IntervalClass { Timelike, Spacelike, Lightlike };

std::string to_string(IntervalClass c);

inline constexpr double kLightlikeTolerance = 1e-12;

/// (dt)^2 - |dx|^2
double interval(const Event& a, const Event& b);
/// Lightlike when |interval| <= 1e-12 * max(1, squared coordinate scale).
IntervalClass interval_class(const Event& a, const Event& b);
/// a can influence b: t_a <= t_b and not spacelike. Lightlike counts.
bool causally_precedes(const Event& a, const Event& b);

std::vector<Event> past_light_cone(const Event& e, const std::vector<Event>& candidates);

class Frame {
public:
    /// Throws FrameError unless |v| < 1.
    explicit Frame(double v);

    double v() const { return v_; }
    double gamma() const { return gamma_; }

private:
    double v_;
    double gamma_;
};

/// Coordinates of `e` in a frame moving with velocity f.v() along x.
Event boost(const Event& e, const Frame& f);

/// x(t) = x0 + v t at transverse offset y.
struct Worldline {
    double x0 = 0.0;
    double v = 0.0;
    double y = 0.0;

    double x_at(double t) const { return x0 + v * t; }
};

struct CascadeStep {
    Event event;
    int object = 1;           ///< 1 or 2
    std::string frame;        ///< frame whose simultaneity induced it; "trigger" for the first
    double t_s = 0.0;         ///< time in S (rest frame of object 1)
    double t_s_prime = 0.0;   ///< time in S' (rest frame of object 2)
};

struct Cascade {
    std::vector<CascadeStep> steps;
    bool degenerate = false;  ///< co-moving objects share simultaneity
    bool floor_reached = false;
};

struct CascadeOptions {
    std::size_t depth = 6;
    /// Stop before emitting an event whose lab time is below this.
    std::optional<double> time_floor;
};

/// Branching anywhere means branching everywhere on the hypersurface of
/// simultaneity: E1 on object 1 induces E2 on object 2 simultaneous in S, E2
/// induces E3 on object 1 simultaneous in S', and so on.
Cascade branching_cascade(const Worldline& object1, const Worldline& object2, double trigger_t,
                          const CascadeOptions& options = {});

}  // namespace lw::spacetime
