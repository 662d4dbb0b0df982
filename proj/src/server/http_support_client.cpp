#include "httplib.h"

#include <stdexcept>

#include "facerec/server.hpp"

namespace facerec {

using nlohmann::json;

namespace {

httplib::Client make_client(const std::string& endpoint, int timeoutMs) {
    httplib::Client client(endpoint);
    const auto sec = timeoutMs / 1000;
    const auto usec = (timeoutMs % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    return client;
}

json parse_body(const httplib::Result& res, int expected, const char* what) {
    if (!res) throw TransportError(std::string(what) + ": " + httplib::to_string(res.error()));
    if (res->status != expected)
        throw TransportError(std::string(what) + ": server answered " + std::to_string(res->status));
    json body = json::parse(res->body, nullptr, false);
    if (body.is_discarded()) throw TransportError(std::string(what) + ": response is not JSON");
    return body;
}

}  // namespace

HttpSupportClient::HttpSupportClient(std::string endpoint, int timeoutMs)
    : endpoint_(std::move(endpoint)), timeoutMs_(timeoutMs) {
    const bool scheme = endpoint_.rfind("http://", 0) == 0 || endpoint_.rfind("https://", 0) == 0;
    if (!scheme || endpoint_.find(' ') != std::string::npos || !httplib::Client(endpoint_).is_valid()) throw std::invalid_argument("invalid server endpoint '" + endpoint_ + "'");
    if (timeoutMs_ < 1) throw std::invalid_argument("server timeout must be positive");
}

RemoteIdentification HttpSupportClient::identify(const GrayImage& face) {
    auto client = make_client(endpoint_, timeoutMs_);
    const json req = {{"image", encode_api_image(face)}};
    const json body = parse_body(client.Post("/api/v1/identify", req.dump(), "application/json"), 200, "identify");
    try {
        return identification_from_json(body);
    } catch (const json::exception& e) {
        throw TransportError(std::string("identify: malformed response: ") + e.what());
    }
}

std::string HttpSupportClient::enroll(std::string_view displayName, std::string_view notes, const GrayImage& face) {
    auto client = make_client(endpoint_, timeoutMs_);
    const json req = {{"displayName", displayName}, {"notes", notes}, {"image", encode_api_image(face)}};
    const json body = parse_body(client.Post("/api/v1/enroll", req.dump(), "application/json"), 201, "enroll");
    if (!body.contains("personId") || !body.at("personId").is_string())
        throw TransportError("enroll: response lacks personId");
    return body.at("personId").get<std::string>();
}

json HttpSupportClient::sync(std::optional<int> limit) {
    auto client = make_client(endpoint_, timeoutMs_);
    std::string path = "/api/v1/sync";
    if (limit) path += "?limit=" + std::to_string(*limit);
    return parse_body(client.Get(path), 200, "sync");
}

}  // namespace facerec
