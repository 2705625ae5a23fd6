// The only translation unit that includes cpp-httplib.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "casbench/llm/provider.hpp"

namespace casbench::llm {

HttplibTransport::HttplibTransport(std::string endpoint, std::chrono::seconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {}

HttpResponse HttplibTransport::post(const HttpRequest& request) {
    httplib::Client client(endpoint_);
    if (!client.is_valid()) throw TransportError("invalid endpoint '" + endpoint_ + "'");
    client.set_connection_timeout(std::chrono::seconds(30));
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [key, value] : request.headers) {
        if (key == "content-type") {
            content_type = value;
        } else {
            headers.emplace(key, value);
        }
    }
    auto result = client.Post(request.path, headers, request.body, content_type);
    if (!result) throw TransportError("POST " + endpoint_ + request.path + ": " + httplib::to_string(result.error()));
    return {result->status, result->body};
}

}  // namespace casbench::llm
