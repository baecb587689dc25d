// A frictionless glider launched across a spinning disc, printed from both vantages.

#include <cstdio>

#include "coriolis/coriolis.hpp"

int main() {
  using namespace coriolis;

  ScenarioConfig cfg = default_config(ScenarioKind::glider);
  cfg.omega0 = 1.0;
  cfg.duration = 3.0;
  Session session = launch(cfg, {cfg.mass * 1.0, 0.0, 0.0});
  const Trace trace = run(session, cfg.duration);

  std::printf("%6s %10s %10s   %10s %10s\n", "t", "x_rot", "y_rot", "x_in", "y_in");
  for (std::size_t i = 49; i < trace.samples.size(); i += 50) {
    const TraceSample& s = trace.samples[i];
    std::printf("%6.2f %10.5f %10.5f   %10.5f %10.5f\n", s.t, s.r_rot.x, s.r_rot.y, s.r_in.x, s.r_in.y);
  }
  std::printf("rotating path curves %s, inertial path is %s\n",
              std::string(to_string(curvature_sign(trace, Vantage::rotating))).c_str(),
              std::string(to_string(curvature_sign(trace, Vantage::inertial))).c_str());
}
