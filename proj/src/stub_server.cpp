#include <thread>

#include <httplib.h>

#include "cas/errors.hpp"
#include "cas/lm_gateway.hpp"

namespace cas {

using nlohmann::json;

struct ModelServer::Impl {
  std::shared_ptr<ModelBackend> backend;
  httplib::Server server;
  std::thread thread;

  void install() {
    auto handle = [this](auto fn) {
      return [this, fn](const httplib::Request& req, httplib::Response& res) {
        try {
          const json body = json::parse(req.body);
          res.set_content(fn(body).dump(), "application/json");
        } catch (const json::exception& e) {
          res.status = 400;
          res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        } catch (const InvalidArgument& e) {
          res.status = 400;
          res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        } catch (const BackendInputError& e) {
          res.status = 400;
          res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        } catch (const std::exception& e) {
          res.status = 500;
          res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        }
      };
    };

    server.Post("/v1/score", handle([this](const json& b) {
      const std::string continuation = b.at("continuation").get<std::string>();
      return score_result_to_json(backend->score(b.at("prefix").get<std::string>(), continuation));
    }));
    server.Post("/v1/generate", handle([this](const json& b) {
      GenerationRequest r;
      r.prompt = b.at("prompt").get<std::string>();
      r.num_samples = b.value("n", std::size_t{1});
      r.nucleus_p = b.value("top_p", 0.9);
      r.max_new_tokens = b.value("max_new_tokens", std::size_t{15});
      r.seed = b.value("seed", std::uint64_t{0});
      return json{{"samples", backend->generate(r)}};
    }));
    server.Post("/v1/embed", handle([this](const json& b) {
      const auto texts = b.at("texts").get<std::vector<std::string>>();
      return json{{"vectors", backend->embed(texts).vectors}};
    }));
    server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(json{{"status", "ok"}, {"backend", backend->identity()}}.dump(), "application/json");
    });
  }
};

ModelServer::ModelServer(std::shared_ptr<ModelBackend> backend) : impl_(std::make_unique<Impl>()) {
  if (!backend) throw InvalidArgument("ModelServer needs a backend");
  impl_->backend = std::move(backend);
  impl_->install();
}

ModelServer::~ModelServer() { stop(); }

int ModelServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw TransportError("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ModelServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw TransportError("cannot listen on " + host + ":" + std::to_string(port));
}

void ModelServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace cas
