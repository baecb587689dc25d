#pragma once

// The two demo scenarios: a ball pushed across a spinning disc with friction,
// and a frictionless glider watched from a fixed vantage point. A Session owns
// the live state; run() steps it and records a dual-frame Trace.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "coriolis/error.hpp"
#include "coriolis/rotframe.hpp"
#include "coriolis/vec3.hpp"

namespace coriolis {

enum class ScenarioKind { ball, glider };
enum class Vantage { rotating, inertial };
enum class Curvature { right, left, straight };

constexpr std::string_view to_string(ScenarioKind k) {
  return k == ScenarioKind::ball ? "ball" : "glider";
}
constexpr std::string_view to_string(Vantage v) {
  return v == Vantage::rotating ? "rotating" : "inertial";
}
constexpr std::string_view to_string(Curvature c) {
  switch (c) {
    case Curvature::right: return "right";
    case Curvature::left: return "left";
    case Curvature::straight: return "straight";
  }
  return "straight";
}

inline std::optional<ScenarioKind> parse_scenario_kind(std::string_view s) {
  if (s == "ball") return ScenarioKind::ball;
  if (s == "glider") return ScenarioKind::glider;
  return std::nullopt;
}

inline std::optional<Vantage> parse_vantage(std::string_view s) {
  if (s == "rotating") return Vantage::rotating;
  if (s == "inertial" || s == "fixed") return Vantage::inertial;
  return std::nullopt;
}

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::ball;
  double disc_radius = 1.0;
  double mass = 0.5;
  FrictionParams friction{0.4, 0.3};
  double omega0 = 0.5;
  // Unset means the scenario default: rotating for the ball, inertial for the glider.
  std::optional<Vantage> vantage;
  double dt = 1e-3;
  double duration = 10.0;
  int record_stride = 10;

  Vantage effective_vantage() const {
    if (vantage) return *vantage;
    return kind == ScenarioKind::ball ? Vantage::rotating : Vantage::inertial;
  }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

inline ScenarioConfig default_config(ScenarioKind kind) {
  ScenarioConfig c;
  c.kind = kind;
  if (kind == ScenarioKind::glider) c.friction = FrictionParams{0.0, 0.0};
  return c;
}

/// Glider friction is forced to zero; everything else is passed through.
inline ScenarioConfig normalized(ScenarioConfig c) {
  if (c.kind == ScenarioKind::glider) {
    c.friction.mu_s = 0.0;
    c.friction.mu_k = 0.0;
  }
  return c;
}

inline void validate(const ScenarioConfig& c) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(c.disc_radius)) throw Error(ErrorKind::config, "disc_radius must be > 0");
  if (!positive(c.mass)) throw Error(ErrorKind::config, "mass must be > 0");
  if (!positive(c.dt)) throw Error(ErrorKind::config, "dt must be > 0");
  if (!positive(c.duration)) throw Error(ErrorKind::config, "duration must be > 0");
  if (!std::isfinite(c.omega0)) throw Error(ErrorKind::config, "omega must be finite");
  if (c.record_stride < 1) throw Error(ErrorKind::config, "record stride must be >= 1");
  if (c.kind == ScenarioKind::glider && (c.friction.mu_s != 0.0 || c.friction.mu_k != 0.0))
    throw Error(ErrorKind::config, "glider moves without surface friction");
  try {
    validate(c.friction);
  } catch (const Error& e) {
    throw Error(ErrorKind::config, e.what());
  }
}

struct TraceSample {
  double t = 0.0;
  Vec3 r_rot{};
  Vec3 v_rot{};
  Vec3 r_in{};
  Vec3 v_in{};
  double theta = 0.0;
  ForceBreakdown forces{};

  friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

inline TraceSample make_sample(const BodyState& body, const RotatingFrame& frame,
                               const ForceBreakdown& forces) {
  const InertialState in = to_inertial(body, frame);
  return {body.t, body.r_rot, body.v_rot, in.r_in, in.v_in, frame.theta(), forces};
}

struct Trace {
  ScenarioConfig config;
  std::vector<TraceSample> samples;
};

class Session;
Session launch(const ScenarioConfig& config, const Vec3& impulse);

/// Live simulation state for one scenario. Single owner; copy to snapshot.
class Session {
 public:
  const ScenarioConfig& config() const noexcept { return config_; }
  const BodyState& body() const noexcept { return body_; }
  const RotatingFrame& frame() const noexcept { return frame_; }
  std::uint64_t step_count() const noexcept { return steps_; }

  /// Force held on the body by run() (N, rotating frame).
  const Vec3& held_force() const noexcept { return held_force_; }
  void hold_force(const Vec3& f) {
    detail::require_finite(f, "held force");
    held_force_ = planar(f);
  }

  /// The disc only has a surface for the ball, and only out to its rim.
  bool on_surface() const {
    return config_.kind == ScenarioKind::ball && norm(body_.r_rot) <= config_.disc_radius;
  }

  ForceBreakdown forces(const Vec3& applied) const {
    return net_forces(body_, frame_, config_.friction, planar(applied), on_surface());
  }

  TraceSample sample(const Vec3& applied) const { return make_sample(body_, frame_, forces(applied)); }

  /// Advances by one dt under `applied`; returns the forces at the new state.
  ForceBreakdown advance(const Vec3& applied) {
    const Vec3 f = planar(applied);
    StepResult next = step(body_, frame_, config_.friction, f, on_surface(), config_.dt);
    body_ = next.state;
    frame_ = next.frame;
    ++steps_;
    return forces(f);
  }

  // Live parameter changes. Position, velocity and angle are untouched.
  void set_spin(double omega) {
    if (!std::isfinite(omega)) throw Error(ErrorKind::config, "omega must be finite");
    frame_.set_spin(omega);
    config_.omega0 = omega;
  }

  void set_friction(const FrictionParams& params) {
    ScenarioConfig next = config_;
    next.friction = params;
    validate(next);
    config_ = next;
  }

  void set_mass(double mass) {
    ScenarioConfig next = config_;
    next.mass = mass;
    validate(next);
    config_ = next;
    body_.mass = mass;
  }

  /// Puts the body back at the disc centre with velocity impulse/mass.
  /// Time and the frame angle keep running.
  void relaunch(const Vec3& impulse) {
    detail::require_finite(impulse, "impulse");
    body_.r_rot = {};
    body_.v_rot = planar(impulse) / body_.mass;
  }

 private:
  friend Session launch(const ScenarioConfig& config, const Vec3& impulse);

  ScenarioConfig config_;
  BodyState body_;
  RotatingFrame frame_;
  Vec3 held_force_{};
  std::uint64_t steps_ = 0;
};

/// Body starts at the disc centre with v_rot = impulse / mass, t = 0.
inline Session launch(const ScenarioConfig& config, const Vec3& impulse) {
  ScenarioConfig c = normalized(config);
  validate(c);
  if (!is_finite(impulse)) throw Error(ErrorKind::config, "impulse must be finite");
  Session s;
  s.config_ = c;
  s.body_ = BodyState{0.0, {}, planar(impulse) / c.mass, c.mass};
  s.frame_ = RotatingFrame(c.omega0);
  return s;
}

/// Number of fixed steps that cover `duration`.
inline std::uint64_t steps_for(double duration, double dt) {
  if (!(duration > 0.0) || !std::isfinite(duration))
    throw Error(ErrorKind::config, "duration must be > 0");
  const double n = std::round(duration / dt);
  return n < 1.0 ? 1 : static_cast<std::uint64_t>(n);
}

/// Steps the session for `duration` seconds, recording the state after every
/// `record_stride`-th step.
inline Trace run(Session& session, double duration) {
  const std::uint64_t n = steps_for(duration, session.config().dt);
  const auto stride = static_cast<std::uint64_t>(session.config().record_stride);
  Trace trace{session.config(), {}};
  trace.samples.reserve(static_cast<std::size_t>(n / stride));
  const Vec3 applied = session.held_force();
  for (std::uint64_t i = 1; i <= n; ++i) {
    const ForceBreakdown f = session.advance(applied);
    if (i % stride == 0) trace.samples.push_back(make_sample(session.body(), session.frame(), f));
  }
  trace.config = session.config();
  return trace;
}

struct VantagePoint {
  Vec3 r;
  Vantage frame;
};

inline VantagePoint vantage_view(const TraceSample& sample, Vantage vantage) {
  return {vantage == Vantage::rotating ? sample.r_rot : sample.r_in, vantage};
}

inline constexpr std::string_view kTraceCsvHeader =
    "t,x_rot,y_rot,z_rot,vx_rot,vy_rot,vz_rot,x_in,y_in,z_in,vx_in,vy_in,vz_in,theta,"
    "fcor_x,fcor_y,fcor_z,fcen_x,fcen_y,fcen_z,ffric_x,ffric_y,ffric_z,fapp_x,fapp_y,fapp_z";

namespace detail {

// Shortest decimal that round-trips to the same double. Negative zero is
// written as 0.
inline void append_number(std::string& out, double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

inline void append_vec(std::string& out, const Vec3& v) {
  out.push_back(',');
  append_number(out, v.x);
  out.push_back(',');
  append_number(out, v.y);
  out.push_back(',');
  append_number(out, v.z);
}

}  // namespace detail

inline std::string trace_csv(const Trace& trace) {
  std::string out(kTraceCsvHeader);
  out.push_back('\n');
  for (const TraceSample& s : trace.samples) {
    detail::append_number(out, s.t);
    detail::append_vec(out, s.r_rot);
    detail::append_vec(out, s.v_rot);
    detail::append_vec(out, s.r_in);
    detail::append_vec(out, s.v_in);
    out.push_back(',');
    detail::append_number(out, s.theta);
    detail::append_vec(out, s.forces.coriolis);
    detail::append_vec(out, s.forces.centrifugal);
    detail::append_vec(out, s.forces.friction);
    detail::append_vec(out, s.forces.applied);
    out.push_back('\n');
  }
  return out;
}

/// Writes the trace as CSV; returns the number of bytes written.
inline std::size_t export_csv(const Trace& trace, std::ostream& os) {
  const std::string text = trace_csv(trace);
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os) throw Error(ErrorKind::export_io, "stream write failed");
  return text.size();
}

inline std::size_t export_csv(const Trace& trace, const std::filesystem::path& destination) {
  std::ofstream os(destination, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::export_io, "cannot open " + destination.string());
  const std::size_t n = export_csv(trace, os);
  os.close();
  if (!os) throw Error(ErrorKind::export_io, "cannot finish writing " + destination.string());
  return n;
}

inline constexpr double kCurvatureTolerance = 1e-9;

/// Sum of (v_i x (v_{i+1} - v_i)).z along the chosen frame's samples.
/// Negative turning is clockwise, i.e. a deflection to the right.
inline double accumulated_turning(const Trace& trace, Vantage frame) {
  double acc = 0.0;
  const auto& s = trace.samples;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const Vec3& v0 = frame == Vantage::rotating ? s[i].v_rot : s[i].v_in;
    const Vec3& v1 = frame == Vantage::rotating ? s[i + 1].v_rot : s[i + 1].v_in;
    acc += cross(v0, v1 - v0).z;
  }
  return acc;
}

inline Curvature curvature_sign(const Trace& trace, Vantage frame) {
  if (trace.samples.size() < 3)
    throw Error(ErrorKind::undefined_curvature, "need at least 3 samples");
  bool moving = false;
  for (const TraceSample& s : trace.samples) {
    const Vec3& v = frame == Vantage::rotating ? s.v_rot : s.v_in;
    if (norm(v) > 0.0) {
      moving = true;
      break;
    }
  }
  if (!moving) throw Error(ErrorKind::undefined_curvature, "trace never moves");
  const double acc = accumulated_turning(trace, frame);
  if (std::abs(acc) < kCurvatureTolerance) return Curvature::straight;
  return acc < 0.0 ? Curvature::right : Curvature::left;
}

}  // namespace coriolis
