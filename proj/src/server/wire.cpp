#include "facerec/encoding.hpp"
#include "facerec/server.hpp"

namespace facerec {

using nlohmann::json;

json encode_api_image(const GrayImage& img) {
    return {{"encoding", kApiImageEncoding}, {"data", base64_encode(save_pgm(img))}};
}

GrayImage decode_api_image(const json& j) {
    if (!j.is_object() || !j.contains("data") || !j.at("data").is_string())
        throw WireError(400, "image must be an object with a base64 'data' field");
    if (!j.contains("encoding") || j.at("encoding") != kApiImageEncoding)
        throw WireError(400, std::string("image encoding must be '") + kApiImageEncoding + "'");
    const auto bytes = base64_decode(j.at("data").get<std::string>());
    if (!bytes) throw WireError(400, "image data is not valid base64");
    try {
        return load_pgm(*bytes);
    } catch (const PgmError& e) {
        throw WireError(e.kind() == PgmErrorKind::BadDimensions ? 422 : 400, e.what());
    }
}

json to_json(const RemoteIdentification& id) {
    json match = nullptr;
    if (id.match)
        match = {{"personId", id.match->personId},
                 {"displayName", id.match->displayName},
                 {"distance", id.match->distance}};
    return {{"match", match}, {"distance", id.distance ? json(*id.distance) : json(nullptr)}};
}

RemoteIdentification identification_from_json(const json& j) {
    RemoteIdentification out;
    const json& m = j.at("match");
    if (!m.is_null())
        out.match = RemoteMatch{m.at("personId").get<std::string>(), m.at("displayName").get<std::string>(),
                                m.at("distance").get<double>()};
    const json& d = j.at("distance");
    if (!d.is_null()) out.distance = d.get<double>();
    return out;
}

}  // namespace facerec
