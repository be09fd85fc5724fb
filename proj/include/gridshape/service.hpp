#pragma once

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gridshape/error.hpp"
#include "gridshape/netmodel.hpp"

namespace httplib {
class Server;
}

namespace gridshape {

// Directory-backed, content-addressed case storage. Files are created by
// atomic rename, so concurrent identical uploads converge on one file.
class CaseStore {
 public:
  explicit CaseStore(std::filesystem::path dir);

  std::string put(const NetworkCase& c) const;
  NetworkCase get(const std::string& id) const;  // throws UnknownCase
  std::vector<std::pair<std::string, NetworkCase>> list() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_of(const std::string& id) const;
  std::filesystem::path dir_;
};

struct ServiceConfig {
  std::filesystem::path store_dir = "cases";
  std::optional<std::string> cors_origin;
  std::size_t downsample_bytes = 1'000'000;
  std::size_t downsample_points = 4000;
};

// HTTP status for an error code: 400 bad input, 404 unknown case, 422
// infeasible tuning, 500 numeric failure.
int http_status(ErrorCode code);

class Service {
 public:
  explicit Service(ServiceConfig config);

  // Registers the /v1 routes and /health on the server.
  void mount(httplib::Server& server) const;
  const CaseStore& store() const { return store_; }

 private:
  ServiceConfig config_;
  CaseStore store_;
};

// Blocks serving on host:port until the process is stopped.
int serve(const ServiceConfig& config, const std::string& host, int port);

}  // namespace gridshape
