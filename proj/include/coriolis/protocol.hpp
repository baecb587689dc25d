#pragma once

// Text-frame protocol between the live service and its clients. Each frame is
// one JSON object with a "type" field. Decoding never throws: it yields either
// the message or a ProtocolError. Unknown extra fields are ignored.
//
// client -> service
//   {"type":"input","position":[x,y,z]}      device-coordinate pointer (m)
//   {"type":"input","force":[x,y,z]}         direct applied force (N)
//   {"type":"set_param","name":"omega","value":2.0}
//   {"type":"vantage","frame":"inertial"}
//   {"type":"launch","impulse":[0.5,0.0,0.0]}
//   {"type":"reset"}
//
// service -> client
//   {"type":"state","seq":..,"t":..,"theta":..,"omega":..,"vantage":..,
//    "ball":{"r_rot":[..],"v_rot":[..],"r_in":[..]},
//    "forces":{"coriolis":[..],"centrifugal":[..],"euler":[..],"friction":[..],"applied":[..]},
//    "trace_tail":[[x,y,z],...]}
//   {"type":"error","reason":"..."}

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "coriolis/rotframe.hpp"
#include "coriolis/scenarios.hpp"
#include "coriolis/vec3.hpp"

namespace coriolis::protocol {

using Json = nlohmann::ordered_json;

enum class Param { omega, mu_k, mu_s, mass, gain };

constexpr std::string_view to_string(Param p) {
  switch (p) {
    case Param::omega: return "omega";
    case Param::mu_k: return "mu_k";
    case Param::mu_s: return "mu_s";
    case Param::mass: return "mass";
    case Param::gain: return "gain";
  }
  return "omega";
}

inline std::optional<Param> parse_param(std::string_view s) {
  for (Param p : {Param::omega, Param::mu_k, Param::mu_s, Param::mass, Param::gain})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

struct InputMsg {
  enum class Kind { position, force };
  Kind kind = Kind::position;
  Vec3 value{};
  friend bool operator==(const InputMsg&, const InputMsg&) = default;
};

struct SetParamMsg {
  Param name = Param::omega;
  double value = 0.0;
  friend bool operator==(const SetParamMsg&, const SetParamMsg&) = default;
};

struct VantageMsg {
  Vantage frame = Vantage::rotating;
  friend bool operator==(const VantageMsg&, const VantageMsg&) = default;
};

struct LaunchMsg {
  Vec3 impulse{};
  friend bool operator==(const LaunchMsg&, const LaunchMsg&) = default;
};

struct ResetMsg {
  friend bool operator==(const ResetMsg&, const ResetMsg&) = default;
};

using ClientInputMsg = std::variant<InputMsg, SetParamMsg, VantageMsg, LaunchMsg, ResetMsg>;

struct BallState {
  Vec3 r_rot{};
  Vec3 v_rot{};
  Vec3 r_in{};
  friend bool operator==(const BallState&, const BallState&) = default;
};

struct StateMsg {
  std::uint64_t seq = 0;
  double t = 0.0;
  double theta = 0.0;
  double omega = 0.0;
  Vantage vantage = Vantage::rotating;
  BallState ball{};
  ForceBreakdown forces{};
  std::vector<Vec3> trace_tail;
  friend bool operator==(const StateMsg&, const StateMsg&) = default;
};

struct ErrorMsg {
  std::string reason;
  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

using ServerMsg = std::variant<StateMsg, ErrorMsg>;

struct ProtocolError {
  std::string reason;
  friend bool operator==(const ProtocolError&, const ProtocolError&) = default;
};

template <typename T>
using Decoded = std::variant<T, ProtocolError>;

inline constexpr std::size_t kMaxTraceTail = 256;

// ---------------------------------------------------------------------------
// encode

namespace detail {

// Negative zero is sent as 0.0.
inline double unsigned_zero(double v) { return v == 0.0 ? 0.0 : v; }

inline Json vec(const Vec3& v) {
  return Json::array({unsigned_zero(v.x), unsigned_zero(v.y), unsigned_zero(v.z)});
}

inline Json forces_json(const ForceBreakdown& f) {
  Json j = Json::object();
  j["coriolis"] = vec(f.coriolis);
  j["centrifugal"] = vec(f.centrifugal);
  j["euler"] = vec(f.euler);
  j["friction"] = vec(f.friction);
  j["applied"] = vec(f.applied);
  return j;
}

}  // namespace detail

inline Json to_json(const ClientInputMsg& msg) {
  Json j = Json::object();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, InputMsg>) {
          j["type"] = "input";
          j[m.kind == InputMsg::Kind::position ? "position" : "force"] = detail::vec(m.value);
        } else if constexpr (std::is_same_v<T, SetParamMsg>) {
          j["type"] = "set_param";
          j["name"] = std::string(to_string(m.name));
          j["value"] = m.value;
        } else if constexpr (std::is_same_v<T, VantageMsg>) {
          j["type"] = "vantage";
          j["frame"] = std::string(to_string(m.frame));
        } else if constexpr (std::is_same_v<T, LaunchMsg>) {
          j["type"] = "launch";
          j["impulse"] = detail::vec(m.impulse);
        } else {
          j["type"] = "reset";
        }
      },
      msg);
  return j;
}

inline Json to_json(const StateMsg& m) {
  Json j = Json::object();
  j["type"] = "state";
  j["seq"] = m.seq;
  j["t"] = m.t;
  j["theta"] = m.theta;
  j["omega"] = m.omega;
  j["vantage"] = std::string(to_string(m.vantage));
  Json ball = Json::object();
  ball["r_rot"] = detail::vec(m.ball.r_rot);
  ball["v_rot"] = detail::vec(m.ball.v_rot);
  ball["r_in"] = detail::vec(m.ball.r_in);
  j["ball"] = std::move(ball);
  j["forces"] = detail::forces_json(m.forces);
  Json tail = Json::array();
  for (const Vec3& p : m.trace_tail) tail.push_back(detail::vec(p));
  j["trace_tail"] = std::move(tail);
  return j;
}

inline Json to_json(const ErrorMsg& m) {
  Json j = Json::object();
  j["type"] = "error";
  j["reason"] = m.reason;
  return j;
}

inline std::string encode(const ClientInputMsg& m) { return to_json(m).dump(); }
inline std::string encode(const StateMsg& m) { return to_json(m).dump(); }
inline std::string encode(const ErrorMsg& m) { return to_json(m).dump(); }
inline std::string encode(const ServerMsg& m) {
  return std::visit([](const auto& v) { return encode(v); }, m);
}

// ---------------------------------------------------------------------------
// decode

namespace detail {

struct FieldError {
  std::string reason;
};

inline const Json* field(const Json& obj, const char* name) {
  auto it = obj.find(name);
  return it == obj.end() ? nullptr : &*it;
}

inline std::optional<double> number(const Json* j) {
  if (j == nullptr || !j->is_number()) return std::nullopt;
  const double v = j->get<double>();
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<Vec3> vector3(const Json* j) {
  if (j == nullptr || !j->is_array() || j->size() != 3) return std::nullopt;
  auto x = number(&(*j)[0]);
  auto y = number(&(*j)[1]);
  auto z = number(&(*j)[2]);
  if (!x || !y || !z) return std::nullopt;
  return Vec3{*x, *y, *z};
}

inline std::optional<std::string> string(const Json* j) {
  if (j == nullptr || !j->is_string()) return std::nullopt;
  return j->get<std::string>();
}

inline Decoded<Json> parse_object(std::string_view text) {
  Json j = Json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return ProtocolError{"malformed frame: not valid JSON"};
  if (!j.is_object()) return ProtocolError{"malformed frame: expected an object"};
  return j;
}

}  // namespace detail

inline Decoded<ClientInputMsg> decode_client_json(const Json& j) {
  using detail::field;
  if (!j.is_object()) return ProtocolError{"malformed frame: expected an object"};
  const auto type = detail::string(field(j, "type"));
  if (!type) return ProtocolError{"missing or non-string field: type"};

  if (*type == "input") {
    const Json* pos = field(j, "position");
    const Json* force = field(j, "force");
    if ((pos != nullptr) == (force != nullptr))
      return ProtocolError{"input needs exactly one of position or force"};
    auto v = detail::vector3(pos != nullptr ? pos : force);
    if (!v) return ProtocolError{"input vector must be 3 finite numbers"};
    return ClientInputMsg{
        InputMsg{pos != nullptr ? InputMsg::Kind::position : InputMsg::Kind::force, *v}};
  }
  if (*type == "set_param") {
    const auto name = detail::string(field(j, "name"));
    if (!name) return ProtocolError{"set_param needs a string name"};
    const auto param = parse_param(*name);
    if (!param) return ProtocolError{"unknown parameter: " + *name};
    const auto value = detail::number(field(j, "value"));
    if (!value) return ProtocolError{"set_param needs a finite numeric value"};
    return ClientInputMsg{SetParamMsg{*param, *value}};
  }
  if (*type == "vantage") {
    const auto frame = detail::string(field(j, "frame"));
    if (!frame) return ProtocolError{"vantage needs a string frame"};
    const auto v = parse_vantage(*frame);
    if (!v) return ProtocolError{"unknown vantage: " + *frame};
    return ClientInputMsg{VantageMsg{*v}};
  }
  if (*type == "launch") {
    const auto impulse = detail::vector3(field(j, "impulse"));
    if (!impulse) return ProtocolError{"launch impulse must be 3 finite numbers"};
    return ClientInputMsg{LaunchMsg{*impulse}};
  }
  if (*type == "reset") return ClientInputMsg{ResetMsg{}};
  return ProtocolError{"unknown message type: " + *type};
}

inline Decoded<ClientInputMsg> decode_client(std::string_view text) {
  auto parsed = detail::parse_object(text);
  if (auto* err = std::get_if<ProtocolError>(&parsed)) return *err;
  return decode_client_json(std::get<Json>(parsed));
}

inline Decoded<ServerMsg> decode_server(std::string_view text) {
  using detail::field;
  auto parsed = detail::parse_object(text);
  if (auto* err = std::get_if<ProtocolError>(&parsed)) return *err;
  const Json& j = std::get<Json>(parsed);
  const auto type = detail::string(field(j, "type"));
  if (!type) return ProtocolError{"missing or non-string field: type"};

  if (*type == "error") {
    auto reason = detail::string(field(j, "reason"));
    if (!reason) return ProtocolError{"error needs a string reason"};
    return ServerMsg{ErrorMsg{*reason}};
  }
  if (*type != "state") return ProtocolError{"unknown message type: " + *type};

  StateMsg m;
  const Json* seq = field(j, "seq");
  if (seq == nullptr || !seq->is_number_unsigned()) return ProtocolError{"state needs unsigned seq"};
  m.seq = seq->get<std::uint64_t>();
  const auto t = detail::number(field(j, "t"));
  const auto theta = detail::number(field(j, "theta"));
  const auto omega = detail::number(field(j, "omega"));
  if (!t || !theta || !omega) return ProtocolError{"state needs finite t, theta, omega"};
  m.t = *t;
  m.theta = *theta;
  m.omega = *omega;
  if (const Json* v = field(j, "vantage")) {
    auto s = detail::string(v);
    auto parsed_v = s ? parse_vantage(*s) : std::nullopt;
    if (!parsed_v) return ProtocolError{"state vantage must be rotating or inertial"};
    m.vantage = *parsed_v;
  }

  const Json* ball = field(j, "ball");
  if (ball == nullptr || !ball->is_object()) return ProtocolError{"state needs a ball object"};
  auto r_rot = detail::vector3(field(*ball, "r_rot"));
  auto v_rot = detail::vector3(field(*ball, "v_rot"));
  auto r_in = detail::vector3(field(*ball, "r_in"));
  if (!r_rot || !v_rot || !r_in) return ProtocolError{"ball needs r_rot, v_rot, r_in vectors"};
  m.ball = {*r_rot, *v_rot, *r_in};

  const Json* forces = field(j, "forces");
  if (forces == nullptr || !forces->is_object()) return ProtocolError{"state needs forces"};
  Vec3* slots[] = {&m.forces.coriolis, &m.forces.centrifugal, &m.forces.euler,
                   &m.forces.friction, &m.forces.applied};
  const char* names[] = {"coriolis", "centrifugal", "euler", "friction", "applied"};
  for (int i = 0; i < 5; ++i) {
    auto v = detail::vector3(field(*forces, names[i]));
    if (!v) return ProtocolError{std::string("forces.") + names[i] + " must be a vector"};
    *slots[i] = *v;
  }

  const Json* tail = field(j, "trace_tail");
  if (tail == nullptr || !tail->is_array() || tail->size() > kMaxTraceTail)
    return ProtocolError{"trace_tail must be an array of at most 256 points"};
  for (const Json& p : *tail) {
    auto v = detail::vector3(&p);
    if (!v) return ProtocolError{"trace_tail entries must be vectors"};
    m.trace_tail.push_back(*v);
  }
  return ServerMsg{std::move(m)};
}

}  // namespace coriolis::protocol
