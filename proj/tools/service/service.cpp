#include "service.hpp"

#include <httplib.h>

#include <chrono>

#include <json.hpp>

#include "chromex/apps.hpp"
#include "chromex/baselines.hpp"
#include "chromex/colormap_io.hpp"
#include "chromex/error.hpp"
#include "chromex/image.hpp"

namespace chromex {

namespace {

using nlohmann::json;

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kind_mismatch:
    case ErrorCode::no_foreground:
    case ErrorCode::insufficient_points:
    case ErrorCode::empty_input:
      return 422;
    case ErrorCode::invalid_argument:
    case ErrorCode::out_of_range:
    case ErrorCode::corrupt:
    case ErrorCode::io:
    case ErrorCode::shape_mismatch:
      return 400;
    default:
      return 500;
  }
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", code}, {"message", message}}.dump(), "application/json");
}

void send_json(httplib::Response& res, const json& body) {
  res.status = 200;
  res.set_content(body.dump(), "application/json");
}

json colormap_value(const Colormap& c) { return json::parse(colormap_to_json(c)); }

const httplib::MultipartFormData& require_file(const httplib::Request& req, const std::string& name) {
  if (!req.has_file(name)) {
    throw Error(ErrorCode::invalid_argument, "missing multipart field '" + name + "'");
  }
  return req.files.find(name)->second;
}

RgbImage image_field(const httplib::Request& req, const std::string& name) {
  const std::string& bytes = require_file(req, name).content;
  return decode_png({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()});
}

Colormap colormap_field(const httplib::Request& req, const std::string& name) {
  return colormap_from_json(require_file(req, name).content);
}

void send_png(httplib::Response& res, const RgbImage& img) {
  const std::vector<std::uint8_t> png = encode_png(img);
  res.status = 200;
  res.set_content(std::string(png.begin(), png.end()), "image/png");
}

/// Runs a handler, turning library errors into JSON error responses.
template <typename Fn>
httplib::Server::Handler guarded(std::size_t limit, Fn fn) {
  return [limit, fn](const httplib::Request& req, httplib::Response& res) {
    if (req.body.size() > limit) {
      send_error(res, 413, "payload_too_large", "request body exceeds the upload limit");
      return;
    }
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), error_code_name(e.code()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "invalid_argument", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

Service::Service(std::shared_ptr<const Extractor> extractor, ServiceOptions options)
    : extractor_(std::move(extractor)), options_(std::move(options)) {
  if (!extractor_) throw Error(ErrorCode::invalid_argument, "the service needs loaded weights");
  weights_id_ = chromex::weights_id(extractor_->weights());
}

void Service::mount(httplib::Server& server) const {
  const auto extractor = extractor_;
  const std::string id = weights_id_;
  const std::size_t limit = options_.max_upload_bytes;

  server.set_payload_max_length(limit);
  server.set_default_headers({{"Access-Control-Allow-Origin", options_.cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 413) {
      send_error(res, 413, "payload_too_large", "request body exceeds the upload limit");
    } else if (res.status == 404) {
      send_error(res, 404, "not_found", "no such endpoint");
    } else {
      send_error(res, res.status, "http_error", "request failed");
    }
  });

  server.Get("/api/health", [id](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"status", "ok"}, {"weights_id", id}});
  });

  server.Post("/api/extract", guarded(limit, [extractor](const httplib::Request& req, httplib::Response& res) {
    const RgbImage img = image_field(req, "image");
    const std::string method = req.has_file("method") ? req.get_file_value("method").content : "cnn";
    json body;
    if (method == "cnn") {
      const Extraction e = extractor->extract(img);
      body = {{"colormap", colormap_value(e.colormap)},
              {"kind", kind_name(e.colormap.kind)},
              {"timing_ms", e.seconds * 1000.0}};
    } else {
      const auto start = std::chrono::steady_clock::now();
      Colormap c;
      if (method == "palette") {
        c = palette_extract(img);
      } else if (method == "sequence") {
        c = sequence_extract(img);
      } else {
        throw Error(ErrorCode::invalid_argument, "unknown method '" + method + "'");
      }
      const double ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      body = {{"colormap", colormap_value(c)}, {"kind", kind_name(c.kind)}, {"timing_ms", ms}};
    }
    send_json(res, body);
  }));

  server.Post("/api/remap", guarded(limit, [](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    if (!body.is_object() || !body.contains("colormap") || !body.contains("p")) {
      throw Error(ErrorCode::invalid_argument, "body must carry 'colormap' and 'p'");
    }
    const Colormap c = colormap_from_json(body.at("colormap").dump());
    send_json(res, colormap_value(remap(c, body.at("p").get<double>())));
  }));

  server.Post("/api/recolor", guarded(limit, [](const httplib::Request& req, httplib::Response& res) {
    send_png(res, recolor_image(image_field(req, "image"), colormap_field(req, "old"),
                                colormap_field(req, "new")));
  }));

  server.Post("/api/transfer", guarded(limit, [extractor](const httplib::Request& req, httplib::Response& res) {
    const auto extract = [&](const RgbImage& img) { return extractor->extract(img).colormap; };
    send_png(res, transfer(image_field(req, "reference"), image_field(req, "target"), extract));
  }));
}

}  // namespace chromex
