#pragma once

// ChatClient over an OpenAI-compatible chat-completions HTTP endpoint.
// Kept apart from unify.hpp so only binaries that talk to a server pull in
// the HTTP library. Define VTG_WITH_OPENSSL (and link OpenSSL) for https URLs.

#ifdef VTG_WITH_OPENSSL
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#endif

#include <cstdlib>
#include <string>

#include "httplib.h"
#include "json.hpp"

#include "vtg/error.hpp"
#include "vtg/unify.hpp"

namespace vtg {

struct EndpointUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // request path
};

// "http://host:8080" gets the default chat-completions path; an explicit path is kept.
inline EndpointUrl split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("endpoint must include a scheme: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ValidationError("unsupported endpoint scheme: " + scheme);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw ValidationError("https endpoints need a build with OpenSSL");
#endif
  const auto path_start = url.find('/', scheme_end + 3);
  EndpointUrl e;
  e.origin = url.substr(0, path_start);
  e.path = path_start == std::string::npos ? "" : url.substr(path_start);
  if (e.path.empty() || e.path == "/") e.path = "/v1/chat/completions";
  return e;
}

class HttpChatClient : public ChatClient {
 public:
  HttpChatClient(const std::string& endpoint, std::string api_key = {})
      : url_(split_endpoint(endpoint)), api_key_(std::move(api_key)) {}

  // Reads the key from the named environment variable; a missing key is allowed
  // for local servers that do not check it.
  static HttpChatClient from_env(const std::string& endpoint, const std::string& env_name) {
    const char* key = env_name.empty() ? nullptr : std::getenv(env_name.c_str());
    return HttpChatClient(endpoint, key ? key : "");
  }

  std::string complete(const ChatRequest& req) override {
    nlohmann::json body;
    body["model"] = req.model;
    body["messages"] = nlohmann::json::array({{{"role", "system"}, {"content", req.system}},
                                              {{"role", "user"}, {"content", req.user}}});
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_tokens;

    httplib::Client cli(url_.origin);
    const auto secs = static_cast<time_t>(req.timeout_seconds);
    const auto usecs = static_cast<time_t>((req.timeout_seconds - static_cast<double>(secs)) * 1e6);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = cli.Post(url_.path, headers, body.dump(), "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) {
      throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("malformed completion response: ") + e.what());
    }
  }

 private:
  EndpointUrl url_;
  std::string api_key_;
};

}  // namespace vtg
