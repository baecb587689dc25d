#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "coriolis/haptics.hpp"
#include "coriolis/protocol.hpp"
#include "coriolis/scenarios.hpp"

namespace coriolis {

struct LiveConfig {
  ScenarioConfig scenario = default_config(ScenarioKind::ball);
  DeviceSpec device{};
  CouplingParams coupling{};
  Vec3 initial_impulse{};
  std::size_t tail_capacity = protocol::kMaxTraceTail;
};

/// One client's steerable simulation. Messages are applied between physics
/// batches; a rejected message leaves the session untouched.
class LiveSession {
 public:
  explicit LiveSession(LiveConfig config)
      : config_(std::move(config)), session_(launch(config_.scenario, config_.initial_impulse)) {
    validate(config_.device);
    validate(config_.coupling);
    config_.device.tick = session_.config().dt;
    vantage_ = session_.config().effective_vantage();
    last_forces_ = session_.forces({});
  }

  const Session& session() const noexcept { return session_; }
  Vantage vantage() const noexcept { return vantage_; }
  const CouplingParams& coupling() const noexcept { return config_.coupling; }
  std::uint64_t ticks_since_publish() const noexcept { return ticks_since_publish_; }

  std::optional<protocol::ErrorMsg> apply(const protocol::ClientInputMsg& msg) {
    try {
      std::visit([this](const auto& m) { handle(m); }, msg);
    } catch (const Error& e) {
      return protocol::ErrorMsg{e.what()};
    }
    return std::nullopt;
  }

  std::optional<protocol::ErrorMsg> apply_text(std::string_view frame) {
    auto decoded = protocol::decode_client(frame);
    if (auto* err = std::get_if<protocol::ProtocolError>(&decoded))
      return protocol::ErrorMsg{err->reason};
    return apply(std::get<protocol::ClientInputMsg>(decoded));
  }

  /// Runs `ticks` physics steps at the session dt.
  void advance(std::uint64_t ticks) {
    const auto stride = static_cast<std::uint64_t>(session_.config().record_stride);
    for (std::uint64_t i = 0; i < ticks; ++i) {
      Vec3 applied = force_input_;
      if (device_input_) {
        const WorkspaceMapping mapped = map_device_to_world(
            *device_input_, config_.device, session_.config().disc_radius);
        applied = coupling_force(mapped.world, session_.body(), config_.coupling);
        haptic_tick(*device_input_, session_, config_.device, config_.coupling);
      } else {
        session_.advance(applied);
      }
      last_forces_ = session_.forces(applied);
      if (session_.step_count() % stride == 0) record_tail();
      ++ticks_since_publish_;
    }
  }

  protocol::StateMsg publish() {
    protocol::StateMsg m;
    m.seq = ++seq_;
    m.t = session_.body().t;
    m.theta = session_.frame().theta();
    m.omega = session_.frame().spin();
    m.vantage = vantage_;
    const InertialState in = to_inertial(session_.body(), session_.frame());
    m.ball = {session_.body().r_rot, session_.body().v_rot, in.r_in};
    m.forces = last_forces_;
    m.trace_tail.reserve(tail_.size());
    for (const TailPoint& p : tail_) m.trace_tail.push_back(vantage_ == Vantage::rotating ? p.r_rot : p.r_in);
    ticks_since_publish_ = 0;
    return m;
  }

 private:
  struct TailPoint {
    Vec3 r_rot;
    Vec3 r_in;
  };

  void record_tail() {
    tail_.push_back({session_.body().r_rot, to_inertial(session_.body(), session_.frame()).r_in});
    while (tail_.size() > config_.tail_capacity) tail_.pop_front();
  }

  void handle(const protocol::InputMsg& m) {
    if (m.kind == protocol::InputMsg::Kind::position) {
      device_input_ = m.value;
      force_input_ = {};
    } else {
      force_input_ = planar(m.value);
      device_input_.reset();
    }
  }

  void handle(const protocol::SetParamMsg& m) {
    using protocol::Param;
    switch (m.name) {
      case Param::omega:
        session_.set_spin(m.value);
        break;
      case Param::mu_k: {
        FrictionParams f = session_.config().friction;
        f.mu_k = m.value;
        session_.set_friction(f);
        break;
      }
      case Param::mu_s: {
        FrictionParams f = session_.config().friction;
        f.mu_s = m.value;
        session_.set_friction(f);
        break;
      }
      case Param::mass:
        session_.set_mass(m.value);
        break;
      case Param::gain: {
        CouplingParams c = config_.coupling;
        c.display_gain = m.value;
        validate(c);
        config_.coupling = c;
        break;
      }
    }
    last_forces_ = session_.forces(force_input_);
  }

  void handle(const protocol::VantageMsg& m) { vantage_ = m.frame; }

  void handle(const protocol::LaunchMsg& m) {
    session_.relaunch(m.impulse);
    tail_.clear();
    last_forces_ = session_.forces(force_input_);
  }

  void handle(const protocol::ResetMsg&) {
    ScenarioConfig c = session_.config();
    session_ = launch(c, {});
    device_input_.reset();
    force_input_ = {};
    tail_.clear();
    last_forces_ = session_.forces({});
  }

  LiveConfig config_;
  Session session_;
  Vantage vantage_ = Vantage::rotating;
  std::optional<Vec3> device_input_;
  Vec3 force_input_{};
  ForceBreakdown last_forces_{};
  std::deque<TailPoint> tail_;
  std::uint64_t seq_ = 0;
  std::uint64_t ticks_since_publish_ = 0;
};

}  // namespace coriolis
