// Drives the ball-on-disc scenario from a scripted device and reports what the
// haptic handle would render.
//
//   haptic_ball [device_script.csv]

#include <cstdio>
#include <iostream>

#include "coriolis/coriolis.hpp"

int main(int argc, char** argv) {
  using namespace coriolis;
  try {
    const ScriptedDevice device =
        argc > 1 ? load_device_script(argv[1])
                 : ScriptedDevice({{0, {0.0, 0.0, 0.0}}, {500, {0.0254, 0.0, 0.0}}, {2500, {0.0, 0.0254, 0.0}}});
    ScenarioConfig cfg = default_config(ScenarioKind::ball);
    cfg.omega0 = 0.8;
    Session session = launch(cfg, {});
    const DeviceSpec spec;
    const CouplingParams coupling;

    double peak = 0;
    CommandDigest digest;
    for (std::uint64_t tick = 0; tick < 8000; ++tick) {
      const HapticFrameCommand cmd = haptic_tick(device.read(tick), session, spec, coupling);
      digest.add(cmd);
      peak = std::max(peak, norm(cmd.force_out));
      if ((tick + 1) % 1000 == 0) {
        const BodyState& b = session.body();
        std::printf("t=%.1f r_rot=(%+.3f, %+.3f) |v|=%.3f force_out=(%+.3f, %+.3f) N\n", b.t, b.r_rot.x,
                    b.r_rot.y, norm(b.v_rot), cmd.force_out.x, cmd.force_out.y);
      }
    }
    std::printf("peak rendered force %.3f N of %.3f N, digest %016llx\n", peak, spec.f_max,
                static_cast<unsigned long long>(digest.value()));
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
}
