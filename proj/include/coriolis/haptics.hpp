#pragma once

// Haptic device abstraction sized to a Falcon-class desktop device: a 4 inch
// cube workspace, roughly 2 lbf peak force and a 1 ms servo tick. The device
// grip drives the body through a spring-damper coupling and the fictitious
// forces are displayed back, saturated at the device maximum.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "coriolis/error.hpp"
#include "coriolis/rotframe.hpp"
#include "coriolis/scenarios.hpp"
#include "coriolis/vec3.hpp"

namespace coriolis {

inline constexpr double kNewtonsPerPoundForce = 4.448;
inline constexpr double kMetersPerInch = 0.0254;

struct DeviceSpec {
  double workspace_half_extent = 2.0 * kMetersPerInch;  // 4" cube
  double f_max = 2.0 * kNewtonsPerPoundForce;           // ~2 lbf
  double tick = 1e-3;
  double resolution_quantum = 0.0;  // 0 disables quantization
};

inline void validate(const DeviceSpec& s) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(s.workspace_half_extent) || !positive(s.f_max) || !positive(s.tick) ||
      !std::isfinite(s.resolution_quantum) || s.resolution_quantum < 0.0)
    throw Error(ErrorKind::config, "invalid device spec");
}

struct CouplingParams {
  double k_c = 50.0;  // N/m
  double b_c = 2.0;   // N*s/m
  double display_gain = 1.0;
};

inline void validate(const CouplingParams& p) {
  auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!nonneg(p.k_c) || !nonneg(p.b_c) || !nonneg(p.display_gain))
    throw Error(ErrorKind::config, "coupling gains must be finite and >= 0");
}

struct HapticFrameCommand {
  std::uint64_t tick_index = 0;
  Vec3 force_out{};
  Vec3 proxy_pos_device{};

  friend bool operator==(const HapticFrameCommand&, const HapticFrameCommand&) = default;
};

/// Scales `v` down to magnitude `max_mag` if it is longer; direction is kept.
/// The result never exceeds `max_mag`, even after rounding.
inline Vec3 clamp_to_magnitude(const Vec3& v, double max_mag) {
  const double n = norm(v);
  if (n <= max_mag) return v;
  Vec3 out = v * (max_mag / n);
  while (norm(out) > max_mag) out *= (1.0 - std::numeric_limits<double>::epsilon());
  return out;
}

struct WorkspaceMapping {
  Vec3 world;   // m, disc coordinates (z = 0)
  Vec3 device;  // m, reading after clamping/quantization
  bool clamped = false;
};

/// Device cube [-h, h]^3 maps uniformly onto the disc: scale disc_radius / h.
/// Readings outside the cube are clamped onto it and flagged.
inline WorkspaceMapping map_device_to_world(const Vec3& p_device, const DeviceSpec& spec,
                                            double disc_radius) {
  detail::require_finite(p_device, "device reading");
  const double h = spec.workspace_half_extent;
  WorkspaceMapping m;
  auto clamp_axis = [&](double v) {
    double c = std::clamp(v, -h, h);
    if (c != v) m.clamped = true;
    if (spec.resolution_quantum > 0.0) {
      c = std::round(c / spec.resolution_quantum) * spec.resolution_quantum;
      c = std::clamp(c, -h, h);
    }
    return c;
  };
  m.device = {clamp_axis(p_device.x), clamp_axis(p_device.y), clamp_axis(p_device.z)};
  m.world = {m.device.x / h * disc_radius, m.device.y / h * disc_radius, 0.0};
  return m;
}

/// Virtual coupling: F = k_c (p_world - r) - b_c v, in the plane.
inline Vec3 coupling_force(const Vec3& p_world, const BodyState& body,
                           const CouplingParams& params) {
  detail::require_finite(p_world, "proxy position");
  return planar(params.k_c * (p_world - body.r_rot) - params.b_c * body.v_rot);
}

/// Only the fictitious forces are rendered on the device.
inline Vec3 display_force(const ForceBreakdown& forces, const CouplingParams& params,
                          const DeviceSpec& spec) {
  return clamp_to_magnitude(params.display_gain * forces.fictitious(), spec.f_max);
}

/// One servo cycle: map the reading, couple it to the body, advance the
/// simulation by one dt, and compute the force to display. The tick index is
/// the session's step count before the step.
inline HapticFrameCommand haptic_tick(const Vec3& device_reading, Session& session,
                                      const DeviceSpec& spec, const CouplingParams& params) {
  if (std::abs(spec.tick - session.config().dt) > 1e-15)
    throw Error(ErrorKind::config, "device tick must equal the simulation dt");
  const WorkspaceMapping mapped =
      map_device_to_world(device_reading, spec, session.config().disc_radius);
  const Vec3 applied = coupling_force(mapped.world, session.body(), params);
  const std::uint64_t index = session.step_count();
  const ForceBreakdown f = session.advance(applied);
  return {index, display_force(f, params, spec), mapped.device};
}

struct ScriptPoint {
  std::uint64_t tick = 0;
  Vec3 p_device{};
};

/// Replays a recorded device path. Holds each point until the next one and
/// the final point forever; an empty script reads the origin.
class ScriptedDevice {
 public:
  ScriptedDevice() = default;

  explicit ScriptedDevice(std::vector<ScriptPoint> points) : points_(std::move(points)) {
    if (!points_.empty() && points_.front().tick != 0)
      throw Error(ErrorKind::invalid_script, "script must start at tick 0");
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (points_[i].tick <= points_[i - 1].tick)
        throw Error(ErrorKind::invalid_script, "script ticks must be strictly increasing");
    }
    for (const auto& p : points_) detail::require_finite(p.p_device, "script point");
  }

  Vec3 read(std::uint64_t tick) const {
    if (points_.empty()) return {};
    auto it = std::upper_bound(points_.begin(), points_.end(), tick,
                               [](std::uint64_t t, const ScriptPoint& p) { return t < p.tick; });
    return std::prev(it)->p_device;
  }

  const std::vector<ScriptPoint>& points() const noexcept { return points_; }

 private:
  std::vector<ScriptPoint> points_;
};

/// Device script CSV: `tick,x,y,z` per line (device metres). A header line
/// starting with "tick" and blank lines are skipped.
inline ScriptedDevice parse_device_script(std::istream& in) {
  std::vector<ScriptPoint> points;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.rfind("tick", 0) == 0) continue;
    std::istringstream row(line);
    ScriptPoint p;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(row >> p.tick >> c1 >> p.p_device.x >> c2 >> p.p_device.y >> c3 >> p.p_device.z) ||
        c1 != ',' || c2 != ',' || c3 != ',')
      throw Error(ErrorKind::invalid_script, "bad row at line " + std::to_string(lineno));
    points.push_back(p);
  }
  return ScriptedDevice(std::move(points));
}

inline ScriptedDevice load_device_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::invalid_script, "cannot open " + path.string());
  return parse_device_script(in);
}

/// FNV-1a over the raw bytes of each command.
class CommandDigest {
 public:
  void add(const HapticFrameCommand& c) {
    mix(&c.tick_index, sizeof c.tick_index);
    for (const Vec3* v : {&c.force_out, &c.proxy_pos_device}) {
      mix(&v->x, sizeof(double));
      mix(&v->y, sizeof(double));
      mix(&v->z, sizeof(double));
    }
  }
  std::uint64_t value() const noexcept { return hash_; }

 private:
  void mix(const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= bytes[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

struct HapticRun {
  Trace trace;
  std::uint64_t digest = 0;
  std::uint64_t ticks = 0;
  HapticFrameCommand last{};
};

/// Drives the session from a device source for `duration` seconds, one
/// haptic tick per simulation step. The trace records the coupling force as
/// the applied force.
template <typename Device>
HapticRun run_with_device(Session& session, const Device& device, const DeviceSpec& spec,
                          const CouplingParams& params, double duration) {
  validate(spec);
  validate(params);
  const std::uint64_t n = steps_for(duration, session.config().dt);
  const auto stride = static_cast<std::uint64_t>(session.config().record_stride);
  HapticRun out;
  out.trace.config = session.config();
  CommandDigest digest;
  for (std::uint64_t i = 1; i <= n; ++i) {
    const Vec3 reading = device.read(session.step_count());
    const WorkspaceMapping mapped =
        map_device_to_world(reading, spec, session.config().disc_radius);
    const Vec3 applied = coupling_force(mapped.world, session.body(), params);
    out.last = haptic_tick(reading, session, spec, params);
    digest.add(out.last);
    if (i % stride == 0) out.trace.samples.push_back(session.sample(applied));
  }
  out.digest = digest.value();
  out.ticks = n;
  return out;
}

}  // namespace coriolis
