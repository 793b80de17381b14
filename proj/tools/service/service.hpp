#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "chromex/pipeline.hpp"

namespace httplib {
class Server;
}

namespace chromex {

struct ServiceOptions {
  std::size_t max_upload_bytes = 8u << 20;
  std::string cors_origin = "*";
};

/// Stateless HTTP front end over one read-only extractor.
class Service {
 public:
  Service(std::shared_ptr<const Extractor> extractor, ServiceOptions options = {});

  /// Registers the /api routes, CORS headers and JSON error bodies on the server.
  void mount(httplib::Server& server) const;

  const std::string& weights_id() const noexcept { return weights_id_; }

 private:
  std::shared_ptr<const Extractor> extractor_;
  ServiceOptions options_;
  std::string weights_id_;
};

}  // namespace chromex
