#include "gridshape/cli.hpp"

#include <CLI11.hpp>

#include <fstream>

#include "gridshape/error.hpp"
#include "gridshape/report.hpp"
#include "gridshape/service.hpp"

namespace gridshape::cli {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidInput, msg); }

std::string_view command_name(Command c) {
  switch (c) {
    case Command::analyze: return "analyze";
    case Command::tune: return "tune";
    case Command::locus: return "locus";
    case Command::frontier: return "frontier";
    case Command::simulate: return "simulate";
    case Command::compare: return "compare";
    case Command::serve: return "serve";
  }
  return "analyze";
}

ControllerSpec resolve_controller(const RunConfig& cfg, const RepresentativeParams& p) {
  ControllerSpec spec = cfg.controller;
  if (spec.kind == ControllerKind::VI) spec.m_v = cfg.m_v.value_or(vi_mv_min(p, spec.d_b));
  spec.validate();
  return spec;
}

TuningTargets resolve_targets(const RunConfig& cfg, double f0) {
  if (!cfg.cos_psi_d || !cfg.alpha_d) invalid("tuning needs --cospsi and --alpha");
  TuningTargets t{*cfg.cos_psi_d, *cfg.alpha_d, cfg.delta_p, parse_frequency_deviation(cfg.delta_omega_d, f0)};
  t.validate();
  return t;
}

class Sink {
 public:
  Sink(const RunConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out) {
    if (cfg.output_dir) std::filesystem::create_directories(*cfg.output_dir);
  }

  bool wants(const std::string& format) const { return cfg_.formats.contains(format); }

  void json(const std::string& stem, const nlohmann::json& j) {
    if (!cfg_.output_dir) {
      out_ << j.dump(2) << '\n';
      return;
    }
    if (!wants("json")) return;
    write(stem + ".json", [&](std::ostream& f) { f << j.dump(2) << '\n'; });
  }

  void csv(const std::string& stem, const StepResponse& r) {
    if (!cfg_.output_dir || !wants("csv")) return;
    write(stem + ".csv", [&](std::ostream& f) { write_response_csv(r, f); });
  }

  void finish() {
    if (cfg_.output_dir) out_ << nlohmann::json{{"artifacts", written_}}.dump(2) << '\n';
  }

 private:
  template <typename F>
  void write(const std::string& name, F&& body) {
    const auto path = *cfg_.output_dir / name;
    std::ofstream f(path);
    body(f);
    if (!f) invalid("cannot write " + path.string());
    written_.push_back(path.string());
  }

  const RunConfig& cfg_;
  std::ostream& out_;
  std::vector<std::string> written_;
};

int dispatch(const RunConfig& cfg, std::ostream& out) {
  if (cfg.command == Command::serve) {
    ServiceConfig sc;
    sc.store_dir = cfg.store_dir;
    sc.cors_origin = cfg.cors_origin;
    out << nlohmann::json{{"listening", cfg.host + ":" + std::to_string(cfg.port)}}.dump() << std::endl;
    return serve(sc, cfg.host, cfg.port);
  }
  if (cfg.case_path.empty()) invalid("--case is required");
  if (!std::filesystem::exists(cfg.case_path)) invalid("case file " + cfg.case_path.string() + " does not exist");
  for (const auto& f : cfg.formats)
    if (f != "json" && f != "csv") invalid("unknown format '" + f + "' (expected json or csv)");

  const ops::Prepared p = ops::prepare(load_case(cfg.case_path));
  Sink sink(cfg, out);
  const std::string stem(command_name(cfg.command));

  switch (cfg.command) {
    case Command::analyze: {
      std::optional<StabilityRegion> region;
      if (cfg.cos_psi_d && cfg.alpha_d) region = StabilityRegion::from_targets(*cfg.alpha_d, *cfg.cos_psi_d);
      sink.json(stem, ops::analyze(p, resolve_controller(cfg, p.params), region));
      break;
    }
    case Command::tune:
      sink.json(stem, ops::tune(p, resolve_targets(cfg, p.c.f0), cfg.coi_override));
      break;
    case Command::locus:
      sink.json(stem, ops::locus(p, resolve_controller(cfg, p.params), std::nullopt));
      break;
    case Command::frontier: {
      std::optional<TuningTargets> t;
      if (cfg.cos_psi_d && cfg.alpha_d) t = resolve_targets(cfg, p.c.f0);
      sink.json(stem, ops::frontier(p, cfg.n_points, t));
      break;
    }
    case Command::simulate: {
      if (cfg.u0.empty()) invalid("--u0 is required");
      ops::SimulateRequest req;
      req.controller = resolve_controller(cfg, p.params);
      req.u0 = ops::parse_vector(cfg.u0);
      req.grid = cfg.grid;
      req.mode = cfg.sim_mode;
      req.heterogeneous = cfg.heterogeneous;
      const ops::Simulated sims = ops::simulate_responses(p, req);
      sink.json(stem, ops::simulate(p, req, sims, std::nullopt));
      if (sims.modal) sink.csv(stem + "_modal", *sims.modal);
      if (sims.direct) sink.csv(stem + "_direct", *sims.direct);
      break;
    }
    case Command::compare: {
      if (cfg.u0.empty()) invalid("--u0 is required");
      ops::CompareRequest req;
      req.d_b = cfg.controller.d_b;
      req.m_v = cfg.m_v;
      req.u0 = ops::parse_vector(cfg.u0);
      req.grid = cfg.grid;
      req.heterogeneous = cfg.heterogeneous;
      const ops::Compared res = ops::compare(p, req);
      sink.json(stem, res.report);
      sink.csv(stem + "_fs", res.fs_response);
      sink.csv(stem + "_vi", res.vi_response);
      break;
    }
    case Command::serve:
      break;
  }
  sink.finish();
  return 0;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(config, out);
  } catch (const Error& e) {
    err << nlohmann::json{{"code", to_string(e.code())}, {"message", e.what()}, {"detail", e.detail()}}.dump()
        << '\n';
    return is_numeric_failure(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << nlohmann::json{{"code", "InvalidInput"}, {"message", e.what()}, {"detail", ""}}.dump() << '\n';
    return 1;
  }
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequency shaping and virtual inertia analysis for linearized power networks", "gridshape"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  RunConfig cfg;
  std::string controller = "fs";
  std::string mode = "direct";
  std::vector<std::string> formats;

  auto add_case = [&](CLI::App* sub) { sub->add_option("--case", cfg.case_path, "Case JSON file")->required(); };
  auto add_controller = [&](CLI::App* sub) {
    sub->add_option("--controller", controller, "fs, vi or none");
    sub->add_option("--db", cfg.controller.d_b, "Inverter inverse droop d_b (pu)");
    sub->add_option("--mv", cfg.m_v, "Virtual inertia m_v (s); VI defaults to the no-Nadir minimum");
  };
  auto add_targets = [&](CLI::App* sub) {
    sub->add_option("--cospsi", cfg.cos_psi_d, "Target minimum damping ratio");
    sub->add_option("--alpha", cfg.alpha_d, "Target minimum decay rate (1/s)");
    sub->add_option("--dp", cfg.delta_p, "Largest net power imbalance (pu)");
    sub->add_option("--dwd", cfg.delta_omega_d, "Allowed COI deviation: pu, or with Hz/mHz suffix");
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--u0", cfg.u0, "Disturbance vector (pu), comma separated")->required();
    sub->add_option("--t-end", cfg.grid.t_end, "Simulation horizon (s)");
    sub->add_option("--dt", cfg.grid.dt, "Sample step (s)");
    sub->add_option("--onset", cfg.grid.onset, "Disturbance onset (s)");
    sub->add_flag("--heterogeneous", cfg.heterogeneous, "Simulate the case's own bus parameters");
  };
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--output-dir", cfg.output_dir, "Write artifacts here instead of stdout");
    sub->add_option("--format", formats, "json and/or csv")->delimiter(',');
  };

  auto* analyze = app.add_subcommand("analyze", "Per-mode poles, damping and decay");
  add_case(analyze);
  add_controller(analyze);
  add_targets(analyze);
  add_output(analyze);

  auto* tune = app.add_subcommand("tune", "Inverse droop meeting damping, decay and COI targets");
  add_case(tune);
  add_targets(tune);
  tune->add_option("--coi-override", cfg.coi_override, "Use this COI droop instead of the imbalance bound");
  add_output(tune);

  auto* locus = app.add_subcommand("locus", "Root locus geometry and branches");
  add_case(locus);
  add_controller(locus);
  add_output(locus);

  auto* frontier = app.add_subcommand("frontier", "Achievable damping/decay frontier");
  add_case(frontier);
  add_targets(frontier);
  frontier->add_option("--points", cfg.n_points, "Points per frontier segment");
  add_output(frontier);

  auto* simulate = app.add_subcommand("simulate", "Step response to a power disturbance");
  add_case(simulate);
  add_controller(simulate);
  add_sim(simulate);
  simulate->add_option("--mode", mode, "modal, direct or both");
  add_output(simulate);

  auto* compare = app.add_subcommand("compare", "FS against VI at equal inverse droop");
  add_case(compare);
  compare->add_option("--db", cfg.controller.d_b, "Inverse droop d_b (pu)")->required();
  compare->add_option("--mv", cfg.m_v, "Virtual inertia m_v (s); defaults to the no-Nadir minimum");
  add_sim(compare);
  add_output(compare);

  auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP service");
  serve_cmd->add_option("--host", cfg.host, "Bind address");
  serve_cmd->add_option("--port", cfg.port, "Port");
  serve_cmd->add_option("--store", cfg.store_dir, "Case store directory");
  serve_cmd->add_option("--cors-origin", cfg.cors_origin, "Allowed browser origin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  const std::pair<CLI::App*, Command> table[] = {
      {analyze, Command::analyze}, {tune, Command::tune},       {locus, Command::locus},
      {frontier, Command::frontier}, {simulate, Command::simulate}, {compare, Command::compare},
      {serve_cmd, Command::serve}};
  for (const auto& [sub, command] : table)
    if (sub->parsed()) cfg.command = command;
  if (!formats.empty()) cfg.formats = {formats.begin(), formats.end()};

  try {
    cfg.controller.kind = controller_kind_from_string(controller);
    if (cfg.command == Command::simulate) cfg.sim_mode = ops::sim_mode_from_string(mode);
  } catch (const Error& e) {
    err << nlohmann::json{{"code", to_string(e.code())}, {"message", e.what()}, {"detail", e.detail()}}.dump()
        << '\n';
    return 1;
  }
  return run(cfg, out, err);
}

}  // namespace gridshape::cli
