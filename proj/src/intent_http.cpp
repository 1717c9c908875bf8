// Copyright (c) the chartseal authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <openssl/evp.h>

#include <cmath>
#include <cstdlib>
#include <thread>

#include "chartseal/errors.hpp"
#include "chartseal/intent.hpp"

namespace chartseal {

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

HttpBackend::HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.endpoint.find("://") == std::string::npos) {
    throw ArgumentError("endpoint must be an http:// or https:// URL: '" + cfg_.endpoint + "'");
  }
  if (cfg_.max_in_flight < 1) throw ArgumentError("max_in_flight must be at least 1");
  if (cfg_.retries < 0) throw ArgumentError("retries must be non-negative");
  if (!(cfg_.timeout_seconds > 0.0)) throw ArgumentError("timeout must be positive");
}

nlohmann::json HttpBackend::request_body(const MllmRequest& request, const std::string& model) {
  nlohmann::json images = nlohmann::json::array();
  for (const auto& png : request.png_images) {
    images.push_back({{"mime_type", "image/png"}, {"data", base64_encode(png)}});
  }
  nlohmann::json body{{"prompt", request.prompt}, {"images", images}};
  if (!model.empty()) body["model"] = model;
  return body;
}

std::string HttpBackend::response_text(const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) return body;
  if (j.is_string()) return j.get<std::string>();
  if (j.is_object()) {
    if (j.contains("text") && j["text"].is_string()) return j["text"].get<std::string>();
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
      const auto& c = j["choices"][0];
      if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string()) {
        return c["message"]["content"].get<std::string>();
      }
    }
  }
  return body;
}

std::string HttpBackend::complete(const MllmRequest& request) {
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < cfg_.max_in_flight; });
    ++in_flight_;
  }
  struct Release {
    HttpBackend* self;
    ~Release() {
      {
        std::lock_guard lock(self->mu_);
        --self->in_flight_;
      }
      self->cv_.notify_one();
    }
  } release{this};

  const std::size_t scheme_end = cfg_.endpoint.find("://");
  const std::size_t path_start = cfg_.endpoint.find('/', scheme_end + 3);
  const std::string origin = cfg_.endpoint.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);

  httplib::Client client(origin);
  const auto secs = static_cast<time_t>(cfg_.timeout_seconds);
  const auto usecs = static_cast<time_t>((cfg_.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  if (const char* token = std::getenv(cfg_.token_env.c_str()); token != nullptr && *token != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  const std::string body = request_body(request, cfg_.model).dump();

  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::duration<double>(cfg_.backoff_seconds * std::pow(2.0, attempt - 1)));
    }
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return response_text(res->body);
    last_error = "HTTP " + std::to_string(res->status);
    // Client errors other than timeouts and rate limits will not improve on retry.
    if (res->status >= 400 && res->status < 500 && res->status != 408 && res->status != 429) break;
  }
  throw TransportError("request to " + cfg_.endpoint + " failed: " + last_error);
}

}  // namespace chartseal
