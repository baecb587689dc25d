#pragma once

// Point-mass dynamics on a planar turntable, expressed in the co-rotating
// frame. Equations of motion:
//
//   a_rot = (F_applied + F_friction) / m - 2 w x v - w x (w x r) - alpha x r
//
// with w and alpha along +z. Everything here is a pure function of its inputs.

#include <cmath>
#include <optional>
#include <string>

#include "coriolis/error.hpp"
#include "coriolis/vec3.hpp"

namespace coriolis {

namespace detail {

inline void require_finite(const Vec3& v, const char* what) {
  if (!is_finite(v)) throw Error(ErrorKind::invalid_input, std::string(what) + " is not finite");
}

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorKind::invalid_input, std::string(what) + " is not finite");
}

}  // namespace detail

/// Angular state of the turntable. Spin and spin rate are restricted to the
/// +z axis; anything else is rejected at construction.
class RotatingFrame {
 public:
  RotatingFrame() = default;

  explicit RotatingFrame(double omega_z, double alpha_z = 0.0, double theta = 0.0)
      : omega_{0.0, 0.0, omega_z}, alpha_{0.0, 0.0, alpha_z}, theta_(theta) {
    detail::require_finite(omega_, "omega");
    detail::require_finite(alpha_, "alpha");
    detail::require_finite(theta_, "theta");
  }

  RotatingFrame(const Vec3& omega, const Vec3& alpha, double theta)
      : RotatingFrame(omega.z, alpha.z, theta) {
    if (omega.x != 0.0 || omega.y != 0.0 || alpha.x != 0.0 || alpha.y != 0.0)
      throw Error(ErrorKind::invalid_input, "frame spin must be parallel to +z");
  }

  const Vec3& omega() const noexcept { return omega_; }
  const Vec3& alpha() const noexcept { return alpha_; }
  double theta() const noexcept { return theta_; }

  /// Signed spin rate about +z (rad/s).
  double spin() const noexcept { return omega_.z; }
  double spin_rate() const noexcept { return alpha_.z; }

  void set_spin(double omega_z) {
    detail::require_finite(omega_z, "omega");
    omega_.z = omega_z;
  }
  void set_spin_rate(double alpha_z) {
    detail::require_finite(alpha_z, "alpha");
    alpha_.z = alpha_z;
  }

  /// Frame after `dt` seconds. The angle is advanced in closed form so it
  /// never drifts from the spin history.
  RotatingFrame advanced(double dt) const {
    RotatingFrame next = *this;
    next.theta_ = theta_ + omega_.z * dt + 0.5 * alpha_.z * dt * dt;
    next.omega_.z = omega_.z + alpha_.z * dt;
    return next;
  }

  friend bool operator==(const RotatingFrame&, const RotatingFrame&) = default;

 private:
  Vec3 omega_{};
  Vec3 alpha_{};
  double theta_ = 0.0;
};

/// Body position/velocity in the rotating frame.
struct BodyState {
  double t = 0.0;
  Vec3 r_rot{};
  Vec3 v_rot{};
  double mass = 1.0;

  friend bool operator==(const BodyState&, const BodyState&) = default;
};

/// Per-component forces acting on the body, in the rotating frame (N).
struct ForceBreakdown {
  Vec3 coriolis{};
  Vec3 centrifugal{};
  Vec3 euler{};
  Vec3 friction{};
  Vec3 applied{};

  /// Everything except friction: the load the surface has to resist.
  Vec3 load() const { return applied + coriolis + centrifugal + euler; }

  /// Fictitious part only (coriolis + centrifugal + euler).
  Vec3 fictitious() const { return coriolis + centrifugal + euler; }

  // Same grouping as load() so a static balance sums to exactly zero.
  Vec3 total() const { return load() + friction; }

  friend bool operator==(const ForceBreakdown&, const ForceBreakdown&) = default;
};

/// Coulomb friction between the body and the disc surface.
struct FrictionParams {
  double mu_s = 0.0;
  double mu_k = 0.0;
  double g = 9.81;
  double v_eps = 1e-6;

  friend bool operator==(const FrictionParams&, const FrictionParams&) = default;
};

inline void validate(const FrictionParams& p) {
  if (!std::isfinite(p.mu_s) || !std::isfinite(p.mu_k) || !std::isfinite(p.g) ||
      !std::isfinite(p.v_eps))
    throw Error(ErrorKind::invalid_params, "friction parameters must be finite");
  if (p.mu_k < 0.0 || p.mu_s < p.mu_k)
    throw Error(ErrorKind::invalid_params, "friction requires mu_s >= mu_k >= 0");
  if (p.g < 0.0 || p.v_eps < 0.0)
    throw Error(ErrorKind::invalid_params, "g and v_eps must be non-negative");
}

inline void validate(const BodyState& s) {
  detail::require_finite(s.r_rot, "position");
  detail::require_finite(s.v_rot, "velocity");
  detail::require_finite(s.t, "time");
  if (!(s.mass > 0.0) || !std::isfinite(s.mass))
    throw Error(ErrorKind::invalid_input, "mass must be positive");
}

/// -2 w x v
inline Vec3 coriolis_accel(const RotatingFrame& frame, const Vec3& v_rot) {
  detail::require_finite(v_rot, "velocity");
  return -2.0 * cross(frame.omega(), v_rot);
}

/// -w x (w x r); radially outward with magnitude |w|^2 |r| for r in the plane.
inline Vec3 centrifugal_accel(const RotatingFrame& frame, const Vec3& r_rot) {
  detail::require_finite(r_rot, "position");
  return -cross(frame.omega(), cross(frame.omega(), r_rot));
}

/// -alpha x r; only present while the spin rate changes.
inline Vec3 euler_accel(const RotatingFrame& frame, const Vec3& r_rot) {
  detail::require_finite(r_rot, "position");
  return -cross(frame.alpha(), r_rot);
}

/// Coulomb friction from the disc. Slip velocity is v_rot because the surface
/// is at rest in the rotating frame.
///
/// `tangential_load` is every other in-plane force on the body. While the body
/// is at rest (|v| <= v_eps) static friction cancels it exactly if it is within
/// mu_s*m*g, otherwise kinetic friction opposes it.
inline Vec3 surface_friction(const BodyState& state, const FrictionParams& params,
                             const Vec3& tangential_load, bool on_surface) {
  validate(params);
  detail::require_finite(tangential_load, "tangential load");
  if (!on_surface || params.mu_s == 0.0) return {};

  const double normal = state.mass * params.g;
  const Vec3 v = planar(state.v_rot);
  const double speed = norm(v);
  if (speed > params.v_eps) {
    if (params.mu_k == 0.0) return {};
    return (-params.mu_k * normal / speed) * v;
  }

  const Vec3 load = planar(tangential_load);
  const double load_mag = norm(load);
  if (load_mag == 0.0) return {};
  if (load_mag <= params.mu_s * normal) return -load;
  if (params.mu_k == 0.0) return {};
  return (-params.mu_k * normal / load_mag) * load;
}

inline ForceBreakdown net_forces(const BodyState& state, const RotatingFrame& frame,
                                 const FrictionParams& params, const Vec3& applied,
                                 bool on_surface) {
  detail::require_finite(applied, "applied force");
  ForceBreakdown f;
  f.coriolis = state.mass * coriolis_accel(frame, state.v_rot);
  f.centrifugal = state.mass * centrifugal_accel(frame, state.r_rot);
  f.euler = state.mass * euler_accel(frame, state.r_rot);
  f.applied = applied;
  f.friction = surface_friction(state, params, f.load(), on_surface);
  return f;
}

struct StepResult {
  BodyState state;
  RotatingFrame frame;
};

namespace detail {

struct Phase {
  Vec3 r;
  Vec3 v;
};

// Acceleration at `tau` seconds into the step. When `frozen_slip` is set the
// kinetic friction direction is held fixed (used for the sub-step that ends
// exactly when the body stops).
inline Vec3 acceleration(const Phase& p, double tau, double mass, const RotatingFrame& frame,
                         const FrictionParams& params, const Vec3& applied, bool on_surface,
                         const std::optional<Vec3>& frozen_slip) {
  RotatingFrame f = frame;
  f.set_spin(frame.spin() + frame.spin_rate() * tau);
  const BodyState s{0.0, p.r, p.v, mass};
  if (frozen_slip && on_surface) {
    ForceBreakdown fb;
    fb.coriolis = mass * coriolis_accel(f, p.v);
    fb.centrifugal = mass * centrifugal_accel(f, p.r);
    fb.euler = mass * euler_accel(f, p.r);
    fb.applied = applied;
    fb.friction = (-params.mu_k * mass * params.g) * *frozen_slip;
    return fb.total() / mass;
  }
  return net_forces(s, f, params, applied, on_surface).total() / mass;
}

inline Phase rk4(const Phase& p0, double tau0, double h, double mass, const RotatingFrame& frame,
                 const FrictionParams& params, const Vec3& applied, bool on_surface,
                 const std::optional<Vec3>& frozen_slip = std::nullopt) {
  auto acc = [&](const Phase& p, double tau) {
    return acceleration(p, tau, mass, frame, params, applied, on_surface, frozen_slip);
  };
  const Vec3 k1v = acc(p0, tau0);
  const Vec3 k1r = p0.v;
  const Phase p2{p0.r + (0.5 * h) * k1r, p0.v + (0.5 * h) * k1v};
  const Vec3 k2v = acc(p2, tau0 + 0.5 * h);
  const Vec3 k2r = p2.v;
  const Phase p3{p0.r + (0.5 * h) * k2r, p0.v + (0.5 * h) * k2v};
  const Vec3 k3v = acc(p3, tau0 + 0.5 * h);
  const Vec3 k3r = p3.v;
  const Phase p4{p0.r + h * k3r, p0.v + h * k3v};
  const Vec3 k4v = acc(p4, tau0 + h);
  const Vec3 k4r = p4.v;
  return {p0.r + (h / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r),
          p0.v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
}

}  // namespace detail

/// One classical RK4 step of length dt. `applied` and `on_surface` are held
/// for the whole step. If kinetic friction brings the body to rest inside the
/// step, the step is split at the stopping time and the body is left at
/// exactly zero velocity, so friction never reverses motion.
inline StepResult step(const BodyState& state, const RotatingFrame& frame,
                       const FrictionParams& params, const Vec3& applied, bool on_surface,
                       double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw Error(ErrorKind::invalid_timestep, "dt must be positive and finite");
  validate(state);
  validate(params);
  detail::require_finite(applied, "applied force");
  if (state.r_rot.z != 0.0 || state.v_rot.z != 0.0)
    throw Error(ErrorKind::invalid_input, "body state must lie in the z = 0 plane");

  const Vec3 force = planar(applied);
  const double m = state.mass;
  detail::Phase p{state.r_rot, state.v_rot};

  const double speed = norm(p.v);
  const bool slipping = on_surface && params.mu_k > 0.0 && speed > params.v_eps;
  double elapsed = 0.0;

  if (slipping) {
    const Vec3 a0 = detail::acceleration(p, 0.0, m, frame, params, force, on_surface, std::nullopt);
    const double decel = -dot(a0, p.v) / speed;
    if (decel > 0.0 && speed < decel * dt) {
      const double tau = speed / decel;
      p = detail::rk4(p, 0.0, tau, m, frame, params, force, on_surface, p.v / speed);
      p.v = {};
      elapsed = tau;
    }
  }

  if (elapsed < dt) {
    const detail::Phase next = detail::rk4(p, elapsed, dt - elapsed, m, frame, params, force,
                                           on_surface);
    if (slipping && elapsed == 0.0 && dot(next.v, p.v) < 0.0) {
      p = {next.r, {}};
    } else {
      p = next;
    }
  }

  BodyState out = state;
  out.t = state.t + dt;
  out.r_rot = planar(p.r);
  out.v_rot = planar(p.v);
  return {out, frame.advanced(dt)};
}

/// Position and velocity of the body as seen from the fixed frame.
struct InertialState {
  Vec3 r_in;
  Vec3 v_in;
};

inline InertialState to_inertial(const BodyState& state, const RotatingFrame& frame) {
  const double th = frame.theta();
  return {rotate_z(state.r_rot, th),
          rotate_z(state.v_rot + cross(frame.omega(), state.r_rot), th)};
}

struct RotatingState {
  Vec3 r_rot;
  Vec3 v_rot;
};

inline RotatingState to_rotating(const Vec3& r_in, const Vec3& v_in, const RotatingFrame& frame) {
  const double th = frame.theta();
  const Vec3 r = rotate_z(r_in, -th);
  return {r, rotate_z(v_in, -th) - cross(frame.omega(), r)};
}

/// Specific Jacobi integral, 1/2|v|^2 - 1/2|w x r|^2 (J/kg). Conserved for
/// free motion at constant spin.
inline double jacobi_energy(const BodyState& state, const RotatingFrame& frame) {
  const Vec3 wr = cross(frame.omega(), state.r_rot);
  return 0.5 * dot(state.v_rot, state.v_rot) - 0.5 * dot(wr, wr);
}

}  // namespace coriolis
