#include "json.hpp"

#include "facerec/lbph.hpp"

namespace facerec {

using nlohmann::json;

std::string save_model_json(const RecognizerModel& model) {
    const LbpParams& p = model.params;
    json entries = json::array();
    for (const auto& e : model.entries) {
        const auto bins = e.face.bins();
        entries.push_back({{"label", e.label}, {"histogram", std::vector<double>(bins.begin(), bins.end())}});
    }
    json doc = {{"params",
                 {{"gridX", p.gridX},
                  {"gridY", p.gridY},
                  {"faceW", p.faceW},
                  {"faceH", p.faceH},
                  {"unknownThreshold", p.unknownThreshold}}},
                {"entries", entries}};
    return doc.dump();
}

RecognizerModel load_model_json(std::string_view text) {
    const json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw LbphError("model JSON is not valid JSON");
    try {
        RecognizerModel model;
        const json& p = doc.at("params");
        model.params.gridX = p.at("gridX").get<int>();
        model.params.gridY = p.at("gridY").get<int>();
        model.params.faceW = p.at("faceW").get<int>();
        model.params.faceH = p.at("faceH").get<int>();
        model.params.unknownThreshold = p.at("unknownThreshold").get<double>();
        validate_params(model.params);
        for (const json& e : doc.at("entries"))
            model.entries.push_back({e.at("label").get<std::string>(),
                                     FaceTemplate(model.params.gridX, model.params.gridY,
                                                  e.at("histogram").get<std::vector<double>>())});
        return model;
    } catch (const json::exception& e) {
        throw LbphError(std::string("model JSON: ") + e.what());
    }
}

}  // namespace facerec
