#include "gridshape/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>
#include <thread>

#include "gridshape/error.hpp"
#include "gridshape/ops.hpp"
#include "gridshape/report.hpp"
#include "gridshape/tuning.hpp"

namespace gridshape {

namespace {

// VI without an explicit m_v takes the no-Nadir minimum, as on the command line.
ControllerSpec resolve_controller(const ops::Prepared& p, const nlohmann::json& j) {
  ControllerSpec spec = controller_from_json(j);
  if (spec.kind == ControllerKind::VI && (!j.contains("m_v") || j["m_v"].is_null()))
    spec.m_v = vi_mv_min(p.params, spec.d_b);
  return spec;
}

bool valid_id(const std::string& id) {
  static const std::regex pattern("^[0-9a-f]{64}$");
  return std::regex_match(id, pattern);
}

nlohmann::json error_body(ErrorCode code, const std::string& message, const std::string& detail) {
  return {{"code", to_string(code)}, {"message", message}, {"detail", detail}};
}

void send_json(httplib::Response& res, const nlohmann::json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

nlohmann::json parse_body(const httplib::Request& req) {
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("request body is not valid JSON: ") + e.what());
  }
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps library and JSON errors to the error body and status.
Handler guarded(Handler inner) {
  return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
    try {
      inner(req, res);
    } catch (const Error& e) {
      send_json(res, error_body(e.code(), e.what(), e.detail()), http_status(e.code()));
    } catch (const nlohmann::json::exception& e) {
      send_json(res, error_body(ErrorCode::InvalidInput, "malformed request", e.what()), 400);
    } catch (const std::exception& e) {
      send_json(res, error_body(ErrorCode::EigensolveFailure, "internal error", e.what()), 500);
    }
  };
}

TuningTargets targets_from_json(const nlohmann::json& j, double f0) {
  TuningTargets t;
  t.cos_psi_d = j.at("cos_psi_d").get<double>();
  t.alpha_d = j.at("alpha_d").get<double>();
  t.delta_p = j.value("delta_p", 0.0);
  if (j.contains("delta_omega_d_mhz"))
    t.delta_omega_d = j.at("delta_omega_d_mhz").get<double>() * 1e-3 / f0;
  else if (j.contains("delta_omega_d") && j.at("delta_omega_d").is_string())
    t.delta_omega_d = parse_frequency_deviation(j.at("delta_omega_d").get<std::string>(), f0);
  else
    t.delta_omega_d = j.at("delta_omega_d").get<double>();
  t.validate();
  return t;
}

SimGrid grid_from_json(const nlohmann::json& j) {
  SimGrid g{40.0, 0.01, 1.0};
  g.t_end = j.value("t_end", g.t_end);
  g.dt = j.value("dt", g.dt);
  g.onset = j.value("onset", g.onset);
  return g;
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownCase: return 404;
    case ErrorCode::InfeasibleDecayTarget:
    case ErrorCode::CoiDroopExceedsRelaxedBound: return 422;
    default: break;
  }
  return is_numeric_failure(code) ? 500 : 400;
}

CaseStore::CaseStore(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

std::filesystem::path CaseStore::path_of(const std::string& id) const { return dir_ / (id + ".json"); }

std::string CaseStore::put(const NetworkCase& c) const {
  const std::string id = case_hash(c);
  const auto target = path_of(id);
  if (std::filesystem::exists(target)) return id;
  static std::atomic<unsigned long> counter{0};
  std::ostringstream tmp_name;
  tmp_name << "." << id << "." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "." << counter++
           << ".tmp";
  const auto tmp = dir_ / tmp_name.str();
  {
    std::ofstream out(tmp);
    out << to_json(c).dump();
    if (!out) throw Error(ErrorCode::InvalidInput, "cannot write to the case store");
  }
  std::filesystem::rename(tmp, target);
  return id;
}

NetworkCase CaseStore::get(const std::string& id) const {
  if (!valid_id(id) || !std::filesystem::exists(path_of(id)))
    throw Error(ErrorCode::UnknownCase, "unknown case id", id);
  return load_case(path_of(id));
}

std::vector<std::pair<std::string, NetworkCase>> CaseStore::list() const {
  std::vector<std::pair<std::string, NetworkCase>> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    const auto name = entry.path().filename().string();
    if (entry.path().extension() != ".json" || name.front() == '.') continue;
    const std::string id = entry.path().stem().string();
    if (valid_id(id)) out.emplace_back(id, load_case(entry.path()));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

Service::Service(ServiceConfig config) : config_(std::move(config)), store_(config_.store_dir) {}

void Service::mount(httplib::Server& server) const {
  const CaseStore* store = &store_;
  const ServiceConfig cfg = config_;

  auto health = guarded([](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"status", "ok"}, {"version", version()}});
  });
  server.Get("/health", health);
  server.Get("/v1/health", health);

  server.Post("/v1/cases", guarded([store](const httplib::Request& req, httplib::Response& res) {
    const NetworkCase c = case_from_json(parse_body(req));
    build_laplacian(c);
    const std::string id = store->put(c);
    send_json(res, {{"id", id}, {"name", c.name}, {"n", c.size()}}, 201);
  }));

  server.Get("/v1/cases", guarded([store](const httplib::Request&, httplib::Response& res) {
    auto items = nlohmann::json::array();
    for (const auto& [id, c] : store->list()) items.push_back({{"id", id}, {"name", c.name}, {"n", c.size()}});
    send_json(res, {{"cases", items}});
  }));

  server.Get(R"(/v1/cases/([^/]+)/spectrum)", guarded([store](const httplib::Request& req, httplib::Response& res) {
    send_json(res, ops::spectrum(ops::prepare(store->get(req.matches[1]))));
  }));

  server.Post("/v1/analyze", guarded([store](const httplib::Request& req, httplib::Response& res) {
    const nlohmann::json body = parse_body(req);
    const auto p = ops::prepare(store->get(body.at("case_id").get<std::string>()));
    std::optional<StabilityRegion> region;
    if (body.contains("region"))
      region = StabilityRegion::from_targets(body["region"].at("alpha").get<double>(),
                                             body["region"].at("cos_psi").get<double>());
    send_json(res, ops::analyze(p, resolve_controller(p, body.at("controller")), region));
  }));

  server.Post("/v1/tune", guarded([store](const httplib::Request& req, httplib::Response& res) {
    const nlohmann::json body = parse_body(req);
    const auto p = ops::prepare(store->get(body.at("case_id").get<std::string>()));
    std::optional<double> override_coi;
    if (body.contains("coi_override") && !body["coi_override"].is_null())
      override_coi = body["coi_override"].get<double>();
    send_json(res, ops::tune(p, targets_from_json(body.at("targets"), p.c.f0), override_coi));
  }));

  server.Post("/v1/locus", guarded([store](const httplib::Request& req, httplib::Response& res) {
    const nlohmann::json body = parse_body(req);
    const auto p = ops::prepare(store->get(body.at("case_id").get<std::string>()));
    std::optional<std::vector<double>> grid;
    if (body.contains("grid")) grid = body["grid"].get<std::vector<double>>();
    send_json(res, ops::locus(p, resolve_controller(p, body.at("controller")), grid));
  }));

  server.Get("/v1/frontier", guarded([store](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("case_id")) throw Error(ErrorCode::InvalidInput, "case_id query parameter is required");
    const auto p = ops::prepare(store->get(req.get_param_value("case_id")));
    int n_points = 256;
    if (req.has_param("n_points")) n_points = std::stoi(req.get_param_value("n_points"));
    std::optional<TuningTargets> targets;
    if (req.has_param("cos_psi_d") && req.has_param("alpha_d")) {
      TuningTargets t{std::stod(req.get_param_value("cos_psi_d")), std::stod(req.get_param_value("alpha_d")), 0.0, 1.0};
      targets = t;
    }
    send_json(res, ops::frontier(p, n_points, targets));
  }));

  auto sized = [cfg](const httplib::Request& req, const std::function<nlohmann::json(std::optional<std::size_t>)>& make) {
    nlohmann::json body = make(std::nullopt);
    if (req.has_param("full") && req.get_param_value("full") == "1") return body;
    if (body.dump().size() > cfg.downsample_bytes) body = make(cfg.downsample_points);
    return body;
  };

  server.Post("/v1/simulate", guarded([store, sized](const httplib::Request& req, httplib::Response& res) {
    const nlohmann::json body = parse_body(req);
    const auto p = ops::prepare(store->get(body.at("case_id").get<std::string>()));
    ops::SimulateRequest sim;
    sim.u0 = ops::vector_from_json(body.at("u0"));
    sim.grid = grid_from_json(body);
    sim.mode = ops::sim_mode_from_string(body.value("mode", std::string("direct")));
    sim.heterogeneous = body.value("heterogeneous", false);
    std::vector<ControllerSpec> specs;
    if (body.contains("controllers")) {
      for (const auto& c : body["controllers"]) specs.push_back(resolve_controller(p, c));
    } else {
      specs.push_back(resolve_controller(p, body.at("controller")));
    }
    std::vector<ops::Simulated> sims;
    for (const ControllerSpec& spec : specs) {
      sim.controller = spec;
      sims.push_back(ops::simulate_responses(p, sim));
    }
    send_json(res, sized(req, [&](std::optional<std::size_t> max_points) {
      if (!body.contains("controllers")) return ops::simulate(p, sim, sims.front(), max_points);
      auto results = nlohmann::json::array();
      for (std::size_t i = 0; i < specs.size(); ++i) {
        ops::SimulateRequest one = sim;
        one.controller = specs[i];
        results.push_back(ops::simulate(p, one, sims[i], max_points));
      }
      return nlohmann::json{{"results", results}};
    }));
  }));

  server.Post("/v1/compare", guarded([store, sized](const httplib::Request& req, httplib::Response& res) {
    const nlohmann::json body = parse_body(req);
    const auto p = ops::prepare(store->get(body.at("case_id").get<std::string>()));
    ops::CompareRequest cmp;
    cmp.d_b = body.at("d_b").get<double>();
    if (body.contains("m_v") && !body["m_v"].is_null()) cmp.m_v = body["m_v"].get<double>();
    cmp.u0 = ops::vector_from_json(body.at("u0"));
    cmp.grid = grid_from_json(body);
    cmp.heterogeneous = body.value("heterogeneous", false);
    const ops::Compared out = ops::compare(p, cmp);
    const bool series = body.value("include_series", false);
    send_json(res, sized(req, [&](std::optional<std::size_t> max_points) {
      nlohmann::json j = out.report;
      if (series) {
        j["fs"]["response"] = response_json(out.fs_response, max_points);
        j["vi"]["response"] = response_json(out.vi_response, max_points);
      }
      return j;
    }));
  }));

  if (cfg.cors_origin) {
    const std::string origin = *cfg.cors_origin;
    server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    });
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  }
}

int serve(const ServiceConfig& config, const std::string& host, int port) {
  httplib::Server server;
  Service service(config);
  service.mount(server);
  if (!server.listen(host, port)) return 1;
  return 0;
}

}  // namespace gridshape
