#include "rwt/vetting/server.hpp"

#include <httplib.h>

#include <algorithm>

#include "rwt/datamodel/image_io.hpp"
#include "rwt/datamodel/manifest.hpp"
#include "rwt/datamodel/tensor_io.hpp"
#include "rwt/datamodel/votes.hpp"
#include "rwt/scoremap/boxes.hpp"

namespace rwt::vetting {
namespace {

std::filesystem::path resolve(const ServerOptions& opts, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : opts.base_dir / path;
}

std::vector<scoremap::Box> boxes_for(const ManifestRecord& r, const ServerOptions& opts) {
  if (!r.score_map_path) return {};
  return scoremap::extract_boxes(read_score_map(resolve(opts, *r.score_map_path)),
                                 opts.box_threshold);
}

void draw_box(ImageTensor& img, const scoremap::Box& b) {
  const float color[3] = {1.0f, 0.15f, 0.15f};
  const int x0 = std::clamp(b.x, 0, img.width() - 1), y0 = std::clamp(b.y, 0, img.height() - 1);
  const int x1 = std::clamp(b.x + b.width - 1, 0, img.width() - 1);
  const int y1 = std::clamp(b.y + b.height - 1, 0, img.height() - 1);
  for (int c = 0; c < 3; ++c) {
    for (int x = x0; x <= x1; ++x) img.at(y0, x, c) = img.at(y1, x, c) = color[c];
    for (int y = y0; y <= y1; ++y) img.at(y, x0, c) = img.at(y, x1, c) = color[c];
  }
}

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

int int_param(const httplib::Request& req, const char* name, int fallback) {
  if (!req.has_param(name)) return fallback;
  const std::string v = req.get_param_value(name);
  try {
    std::size_t used = 0;
    const int n = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw Error(std::string("query parameter '") + name + "' must be an integer");
  }
}

template <class F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const VersionConflictError& e) {
    send_json(res, 409, {{"error", e.what()}, {"current", to_json(e.current())}});
  } catch (const UnknownExampleError& e) {
    send_error(res, 404, e.what());
  } catch (const Error& e) {
    send_error(res, 400, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

}  // namespace

nlohmann::json example_detail(const ManifestRecord& record, const ServerOptions& opts,
                              const std::vector<VoteRecord>& votes) {
  nlohmann::json vj = nlohmann::json::array();
  for (const auto& v : votes) {
    vj.push_back({{"worker_id", v.worker_id},
                  {"label", to_string(v.label)},
                  {"vote_time_s", v.vote_time_s},
                  {"batch", v.batch}});
  }
  nlohmann::json bj = nlohmann::json::array();
  for (const auto& b : boxes_for(record, opts)) bj.push_back(scoremap::to_json(b));
  nlohmann::json label = nullptr;
  if (record.label_resolved()) label = to_string(*record.aggregated->label);
  return {{"record", to_json(record)},
          {"label", label},
          {"version", record.version},
          {"votes", vj},
          {"boxes", bj},
          {"image_url", "/api/examples/" + record.image_id + "/image"}};
}

VettingServer::VettingServer(VettingStore& store, ServerOptions opts)
    : store_(store), opts_(std::move(opts)), http_(std::make_unique<httplib::Server>()) {
  votes_ = group_by_image(opts_.votes);
  install_routes();
}

VettingServer::~VettingServer() = default;

int VettingServer::bind(const std::string& host, int port) {
  if (port == 0) return http_->bind_to_any_port(host);
  return http_->bind_to_port(host, port) ? port : -1;
}

bool VettingServer::listen_after_bind() { return http_->listen_after_bind(); }

void VettingServer::stop() { http_->stop(); }

void VettingServer::install_routes() {
  http_->Get("/api/examples", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto filter =
          parse_status_filter(req.has_param("status") ? req.get_param_value("status") : "pending");
      const int page = int_param(req, "page", 1);
      const int page_size = int_param(req, "page_size", opts_.default_page_size);
      if (page_size > opts_.max_page_size) {
        throw Error("page_size exceeds " + std::to_string(opts_.max_page_size));
      }
      const Page p = store_.list(filter, page, page_size);
      nlohmann::json items = nlohmann::json::array();
      for (const auto& r : p.items) items.push_back(to_json(r));
      send_json(res, 200,
                {{"items", items},
                 {"total", p.total},
                 {"page", p.page},
                 {"page_size", p.page_size},
                 {"pages", p.pages},
                 {"status", to_string(filter)}});
    });
  });

  http_->Get(R"(/api/examples/([^/]+))", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
    guarded(res, [&] {
      const auto record = store_.get(req.matches[1]);
      const auto it = votes_.find(record.image_id);
      send_json(res, 200,
                example_detail(record, opts_, it == votes_.end() ? std::vector<VoteRecord>{}
                                                                 : it->second));
    });
  });

  http_->Get(R"(/api/examples/([^/]+)/image)", [this](const httplib::Request& req,
                                                       httplib::Response& res) {
    guarded(res, [&] {
      const auto record = store_.get(req.matches[1]);
      ImageTensor img = load_image(resolve(opts_, record.image_path));
      if (req.has_param("boxes") && req.get_param_value("boxes") == "1") {
        for (const auto& b : boxes_for(record, opts_)) draw_box(img, b);
      }
      const auto png = encode_png(img);
      res.status = 200;
      res.set_content(std::string(png.begin(), png.end()), "image/png");
    });
  });

  http_->Post(R"(/api/examples/([^/]+)/decision)", [this](const httplib::Request& req,
                                                           httplib::Response& res) {
    guarded(res, [&] {
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(req.body);
      } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("request body is not JSON: ") + e.what());
      }
      const std::string id = req.matches[1];
      if (body.is_object() && !body.contains("image_id")) body["image_id"] = id;
      ReviewDecision d = decision_from_json(body);
      if (d.image_id != id) throw Error("image_id in body does not match the URL");
      if (d.reviewer.empty() && req.has_header("X-Reviewer")) {
        d.reviewer = req.get_header_value("X-Reviewer");
      }
      store_.get(id);
      try {
        send_json(res, 200, to_json(store_.submit(d)));
      } catch (const VersionConflictError&) {
        throw;
      } catch (const UnknownExampleError&) {
        throw;
      } catch (const Error& e) {
        send_error(res, 422, e.what());
      }
    });
  });
}

}  // namespace rwt::vetting
