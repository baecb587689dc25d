// coriolis: batch simulation, live service, and study tooling.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "coriolis/coriolis.hpp"
#include "coriolis/server.hpp"

namespace {

using namespace coriolis;

constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;

struct ScenarioFlags {
  std::string scenario;
  std::optional<double> omega, mu_k, mu_s, mass, dt, duration, disc_radius;
  std::optional<int> stride;
  std::string vantage;
  std::vector<double> impulse{0.5, 0.0, 0.0};

  void attach(CLI::App& app, bool require_scenario) {
    auto* s = app.add_option("--scenario", scenario, "ball or glider")
                  ->check(CLI::IsMember({"ball", "glider"}));
    if (require_scenario) s->required();
    else scenario = "ball";
    app.add_option("--omega", omega, "disc spin rate [rad/s]");
    app.add_option("--mu-k", mu_k, "kinetic friction coefficient");
    app.add_option("--mu-s", mu_s, "static friction coefficient");
    app.add_option("--mass", mass, "body mass [kg]")->check(CLI::PositiveNumber);
    app.add_option("--dt", dt, "integration step [s]")->check(CLI::PositiveNumber);
    app.add_option("--duration", duration, "simulated time [s]")->check(CLI::NonNegativeNumber);
    app.add_option("--disc-radius", disc_radius, "disc radius [m]")->check(CLI::PositiveNumber);
    app.add_option("--stride", stride, "record every n-th step")->check(CLI::PositiveNumber);
    app.add_option("--vantage", vantage, "rotating or inertial")
        ->check(CLI::IsMember({"rotating", "inertial", "fixed"}));
    app.add_option("--impulse", impulse, "launch impulse X,Y,Z [N s]")
        ->delimiter(',')
        ->expected(3)
        ->capture_default_str();
  }

  ScenarioConfig config() const {
    ScenarioConfig c = default_config(*parse_scenario_kind(scenario));
    if (omega) c.omega0 = *omega;
    if (mu_k) c.friction.mu_k = *mu_k;
    if (mu_s) c.friction.mu_s = *mu_s;
    if (mass) c.mass = *mass;
    if (dt) c.dt = *dt;
    if (duration) c.duration = *duration;
    if (disc_radius) c.disc_radius = *disc_radius;
    if (stride) c.record_stride = *stride;
    if (!vantage.empty()) c.vantage = parse_vantage(vantage);
    c = normalized(c);
    validate(c);
    return c;
  }

  Vec3 impulse_vec() const { return {impulse[0], impulse[1], impulse[2]}; }
};

// Flat key=value file whose keys apply to the subcommand being run.
class FlatConfig : public CLI::ConfigTOML {
 public:
  explicit FlatConfig(const CLI::App& app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    const auto subs = app_.get_subcommands();
    if (subs.empty()) return items;
    for (auto& item : items)
      if (item.parents.empty()) item.parents.push_back(subs.front()->get_name());
    return items;
  }

 private:
  const CLI::App& app_;
};

int exit_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::export_io:
    case ErrorKind::invalid_script:
      return kExitIo;
    default:
      return kExitUsage;
  }
}

std::string curvature_text(const Trace& trace) {
  try {
    return std::string(to_string(curvature_sign(trace, trace.config.effective_vantage())));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::undefined_curvature) return "undefined";
    throw;
  }
}

int cmd_simulate(const ScenarioFlags& flags, const std::string& export_path,
                 const std::string& script_path) {
  const ScenarioConfig cfg = flags.config();
  Session session = launch(cfg, flags.impulse_vec());
  Trace trace;
  std::optional<std::uint64_t> digest;
  if (!script_path.empty()) {
    const ScriptedDevice device = load_device_script(script_path);
    HapticRun r = run_with_device(session, device, DeviceSpec{}, CouplingParams{}, cfg.duration);
    digest = r.digest;
    trace = std::move(r.trace);
  } else {
    trace = run(session, cfg.duration);
  }
  if (!export_path.empty()) export_csv(trace, std::filesystem::path(export_path));

  std::cout << "duration=" << cfg.duration << " samples=" << trace.samples.size()
            << " vantage=" << to_string(cfg.effective_vantage())
            << " curvature=" << curvature_text(trace);
  if (digest) std::cout << " digest=" << std::hex << *digest << std::dec;
  std::cout << '\n';
  return 0;
}

int cmd_serve(const ScenarioFlags& flags, std::optional<unsigned> port, const std::string& address,
              const std::string& static_dir, double publish_hz) {
  service::ServerConfig cfg;
  cfg.address = address;
  if (port) {
    cfg.port = static_cast<unsigned short>(*port);
  } else if (const char* env = std::getenv("PORT")) {
    try {
      cfg.port = static_cast<unsigned short>(std::stoul(env));
    } catch (const std::exception&) {
      throw Error(ErrorKind::config, std::string("PORT is not a number: ") + env);
    }
  }
  cfg.live.scenario = flags.config();
  cfg.live.initial_impulse = {};
  cfg.publish_hz = publish_hz;
  cfg.static_dir = static_dir;
  service::Server server(cfg);
  std::cout << "listening on ws://" << cfg.address << ':' << server.port() << "/" << std::endl;
  server.run();
  return 0;
}

std::vector<study::StudentRecord> load_roster(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::export_io, "cannot open " + path);
  return study::parse_roster(in);
}

void print_assignment(const study::GroupAssignment& a) {
  std::cout << "method=" << to_string(a.method) << " objective=" << a.objective
            << " mean=" << a.overall.mean << " variance=" << a.overall.variance << '\n';
  for (std::size_t g = 0; g < a.groups.size(); ++g) {
    std::cout << "Group " << g + 1 << " mean=" << a.stats[g].mean
              << " variance=" << a.stats[g].variance << ':';
    for (const auto& s : a.groups[g]) std::cout << ' ' << s.id;
    std::cout << '\n';
  }
}

int cmd_balance(const std::string& roster, int k, double weight) {
  study::BalanceOptions opts;
  opts.variance_weight = weight;
  print_assignment(study::balance_groups(load_roster(roster), k, opts));
  return 0;
}

int cmd_report(const std::string& roster, int k, const std::string& pairs_path,
               const std::string& format, const std::string& output) {
  const study::GroupAssignment a = study::balance_groups(load_roster(roster), k);
  std::vector<study::PairSpec> pairs = study::classroom_pairs();
  if (!pairs_path.empty()) {
    std::ifstream in(pairs_path);
    if (!in) throw Error(ErrorKind::export_io, "cannot open " + pairs_path);
    pairs = study::parse_pairs(in);
  }
  const study::Report r = study::report(a, pairs);
  const std::string text = format == "csv" ? study::to_csv(r) : study::to_text(r);
  if (output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(output, std::ios::binary);
    if (!(out << text)) throw Error(ErrorKind::export_io, "cannot write " + output);
  }
  return 0;
}

int cmd_bench(const ScenarioFlags& flags, std::uint64_t ticks) {
  const ScenarioConfig cfg = flags.config();
  Session session = launch(cfg, flags.impulse_vec());
  const ScriptedDevice device({{0, {0.01, 0.0, 0.0}}, {std::max<std::uint64_t>(ticks / 2, 1), {-0.02, 0.015, 0.0}}});
  const DeviceSpec spec;
  const CouplingParams params;
  CommandDigest digest;
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t i = 0; i < ticks; ++i)
    digest.add(haptic_tick(device.read(session.step_count()), session, spec, params));
  const std::chrono::duration<double, std::micro> elapsed = std::chrono::steady_clock::now() - start;
  std::cout << "ticks=" << ticks << " mean_tick_us=" << elapsed.count() / static_cast<double>(ticks)
            << " budget_us=" << spec.tick * 1e6 << " digest=" << std::hex << digest.value() << std::dec
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotating-frame simulator, haptic loop, live service and study tools"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value file mirroring the subcommand flags");
  app.config_formatter(std::make_shared<FlatConfig>(app));

  ScenarioFlags sim_flags;
  std::string export_path, script_path;
  auto* sim = app.add_subcommand("simulate", "run a scenario headless and export its trace");
  sim_flags.attach(*sim, true);
  sim->add_option("--export", export_path, "CSV trace destination");
  sim->add_option("--device-script", script_path, "tick,x,y,z device script driving the haptic loop");

  ScenarioFlags serve_flags;
  std::optional<unsigned> port;
  std::string address = "127.0.0.1", static_dir;
  double publish_hz = 50.0;
  auto* serve = app.add_subcommand("serve", "run the live WebSocket session service");
  serve_flags.attach(*serve, false);
  serve->add_option("--port", port, "listen port (default: $PORT, else 8080)")->check(CLI::Range(0, 65535));
  serve->add_option("--address", address, "listen address")->capture_default_str();
  serve->add_option("--static-dir", static_dir, "directory served to plain HTTP requests");
  serve->add_option("--publish-hz", publish_hz, "state messages per second")
      ->check(CLI::Range(1.0, 1000.0))
      ->capture_default_str();

  std::string roster;
  int groups = 4;
  double weight = 1.0;
  auto* balance = app.add_subcommand("balance", "partition a roster into GPA-balanced groups");
  balance->add_option("--roster", roster, "CSV id,gpa[,quiz_score]")->required();
  balance->add_option("--groups", groups, "number of groups")->capture_default_str();
  balance->add_option("--variance-weight", weight, "weight of the variance term")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  std::string rep_roster, pairs_path, format = "text", output;
  int rep_groups = 4;
  auto* rep = app.add_subcommand("report", "balance a scored roster and compare group pairs");
  rep->add_option("--roster", rep_roster, "CSV id,gpa,quiz_score")->required();
  rep->add_option("--groups", rep_groups, "number of groups")->capture_default_str();
  rep->add_option("--pairs", pairs_path, "pair_id,control,experimental,independent_variable per line");
  rep->add_option("--format", format, "text or csv")->check(CLI::IsMember({"text", "csv"}))->capture_default_str();
  rep->add_option("--output", output, "write the table here instead of stdout");

  ScenarioFlags bench_flags;
  std::uint64_t ticks = 100000;
  auto* bench = app.add_subcommand("bench", "measure the mean haptic tick cost");
  bench_flags.attach(*bench, false);
  bench->add_option("--ticks", ticks, "number of ticks")->check(CLI::PositiveNumber)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_flags, export_path, script_path);
    if (serve->parsed()) return cmd_serve(serve_flags, port, address, static_dir, publish_hz);
    if (balance->parsed()) return cmd_balance(roster, groups, weight);
    if (rep->parsed()) return cmd_report(rep_roster, rep_groups, pairs_path, format, output);
    if (bench->parsed()) return cmd_bench(bench_flags, ticks);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  std::cerr << app.help();
  return kExitUsage;
}
