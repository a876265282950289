#include <httplib.h>

#include "secaudit/errors.hpp"
#include "secaudit/llm_backend.hpp"

namespace secaudit {
namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const std::string& url, const std::vector<HttpHeader>& headers,
                    const std::string& body, std::chrono::seconds timeout) override {
    const auto parsed = parse_url(url);
    if (!parsed) throw Error(ErrorCode::InvalidArgument, "not an absolute URL: " + url);

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (parsed->scheme == "https")
      throw Error(ErrorCode::NetworkError, "https endpoints need a build with OpenSSL support");
#endif
    httplib::Client client(parsed->scheme + "://" + parsed->host + ":" + std::to_string(parsed->port));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers hdrs;
    std::string content_type = "application/json";
    for (const auto& h : headers) {
      if (h.name == "Content-Type") {
        content_type = h.value;
        continue;
      }
      hdrs.emplace(h.name, h.value);
    }

    auto res = client.Post(parsed->path, hdrs, body, content_type);
    if (!res) throw Error(ErrorCode::NetworkError, url + ": " + httplib::to_string(res.error()));
    return HttpResponse{res->status, res->body};
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_default_transport() {
  return std::make_shared<HttplibTransport>();
}

}  // namespace secaudit
