#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "cas/errors.hpp"
#include "cas/lm_gateway.hpp"

namespace cas {
namespace {

using nlohmann::json;

// Splits "http://host:port/base" into ("http://host:port", "/base").
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos) throw InvalidArgument("endpoint needs a scheme: '" + endpoint + "'");
  const auto slash = endpoint.find('/', scheme + 3);
  if (slash == std::string::npos) return {endpoint, ""};
  std::string base = endpoint.substr(slash);
  while (!base.empty() && base.back() == '/') base.pop_back();
  return {endpoint.substr(0, slash), base};
}

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SemaphoreGuard() { s_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

HttpBackendConfig HttpBackendConfig::from_environment() {
  HttpBackendConfig c;
  if (const char* e = std::getenv("CAS_LM_ENDPOINT")) c.endpoint = e;
  if (const char* a = std::getenv("CAS_LM_AUTH")) c.auth_header = a;
  return c;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw InvalidArgument("HTTP backend needs an endpoint (set CAS_LM_ENDPOINT)");
  if (config_.max_in_flight == 0) throw InvalidArgument("max_in_flight must be >= 1");
  std::tie(scheme_host_port_, base_path_) = split_endpoint(config_.endpoint);
  in_flight_ = std::make_unique<std::counting_semaphore<>>(static_cast<std::ptrdiff_t>(config_.max_in_flight));
}

HttpBackend::~HttpBackend() = default;

json HttpBackend::post(const std::string& path, const json& body) {
  SemaphoreGuard guard(*in_flight_);
  const std::string payload = body.dump();
  std::string last_error;
  for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.retry_backoff * (1 << std::min<std::size_t>(attempt - 1, 6)));

    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.auth_header.empty()) headers.emplace("Authorization", config_.auth_header);

    auto res = client.Post(base_path_ + path, headers, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
      continue;
    }
    if (res->status >= 400) {
      throw BackendInputError(path + " rejected the request (HTTP " + std::to_string(res->status) + "): " + res->body);
    }
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      throw BackendInputError(path + " returned invalid JSON: " + e.what());
    }
  }
  throw TransportError(config_.endpoint + path + " failed after " + std::to_string(config_.max_retries + 1) +
                       " attempts: " + last_error);
}

TokenScoreResult HttpBackend::score(std::string_view prefix, std::string_view continuation) {
  if (text::trim(continuation).empty()) throw BackendInputError("continuation is empty");
  const json res = post("/v1/score", {{"prefix", prefix}, {"continuation", continuation}});
  try {
    return score_result_from_json(res, continuation);
  } catch (const json::exception& e) {
    throw BackendInputError(std::string("malformed /v1/score response: ") + e.what());
  }
}

std::vector<std::string> HttpBackend::generate(const GenerationRequest& request) {
  request.validate();
  const json res = post("/v1/generate", {{"prompt", request.prompt},
                                         {"n", request.num_samples},
                                         {"top_p", request.nucleus_p},
                                         {"max_new_tokens", request.max_new_tokens},
                                         {"seed", request.seed}});
  try {
    return res.at("samples").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw BackendInputError(std::string("malformed /v1/generate response: ") + e.what());
  }
}

EmbeddingResult HttpBackend::embed(std::span<const std::string> texts) {
  if (texts.empty()) throw InvalidArgument("embed needs at least one text");
  const json res = post("/v1/embed", {{"texts", std::vector<std::string>(texts.begin(), texts.end())}});
  EmbeddingResult r;
  try {
    r.vectors = res.at("vectors").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw BackendInputError(std::string("malformed /v1/embed response: ") + e.what());
  }
  if (r.vectors.size() != texts.size()) throw BackendInputError("/v1/embed returned the wrong number of vectors");
  for (const auto& v : r.vectors) {
    if (v.size() != r.vectors.front().size()) throw BackendInputError("/v1/embed vectors differ in dimension");
    for (double x : v) {
      if (!std::isfinite(x)) throw BackendInputError("/v1/embed returned a non-finite value");
    }
  }
  return r;
}

}  // namespace cas
