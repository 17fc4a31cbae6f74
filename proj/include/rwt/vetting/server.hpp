#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwt/datamodel/types.hpp"
#include "rwt/vetting/store.hpp"

namespace httplib {
class Server;
}

namespace rwt::vetting {

struct ServerOptions {
  std::filesystem::path base_dir;  // resolves relative image and score-map paths
  std::vector<VoteRecord> votes;
  float box_threshold = 0.8f;
  int default_page_size = 20;
  int max_page_size = 500;
};

// Detail payload for one example: record, current label, version, votes,
// detector boxes and the image URL.
nlohmann::json example_detail(const ManifestRecord& record, const ServerOptions& opts,
                              const std::vector<VoteRecord>& votes);

// Routes:
//   GET  /api/examples?status=&page=&page_size=
//   GET  /api/examples/{id}
//   GET  /api/examples/{id}/image?boxes=1
//   POST /api/examples/{id}/decision
// Errors: 400 invalid request, 404 unknown id, 409 version conflict (body
// carries the current record), 422 rejected decision.
class VettingServer {
 public:
  VettingServer(VettingStore& store, ServerOptions opts);
  ~VettingServer();

  // Returns the bound port, or -1 on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen_after_bind();
  void stop();

 private:
  void install_routes();

  VettingStore& store_;
  ServerOptions opts_;
  std::map<std::string, std::vector<VoteRecord>> votes_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace rwt::vetting
