#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "facerec/cascade.hpp"

namespace facerec {

using nlohmann::json;

namespace {

void emit_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::clog << "warning: " << w << '\n';
}

template <typename T>
T field(const json& obj, const char* name) {
    if (!obj.is_object() || !obj.contains(name)) throw CascadeError(std::string("missing field '") + name + "'");
    const json& v = obj.at(name);
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw CascadeError(std::string("field '") + name + "' must be an integer");
    } else {
        if (!v.is_number()) throw CascadeError(std::string("field '") + name + "' must be a number");
    }
    return v.get<T>();
}

const json& array_field(const json& obj, const char* name) {
    if (!obj.is_object() || !obj.contains(name) || !obj.at(name).is_array())
        throw CascadeError(std::string("field '") + name + "' must be an array");
    return obj.at(name);
}

}  // namespace

CascadeModel load_cascade_json(std::string_view text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw CascadeError("cascade JSON is not valid JSON");

    CascadeModel model;
    model.windowW = field<int>(doc, "windowW");
    model.windowH = field<int>(doc, "windowH");
    for (const json& js : array_field(doc, "stages")) {
        Stage stage;
        stage.stageThreshold = field<double>(js, "stageThreshold");
        for (const json& jt : array_field(js, "stumps")) {
            WeakStump stump;
            stump.threshold = field<double>(jt, "threshold");
            stump.leftValue = field<double>(jt, "leftValue");
            stump.rightValue = field<double>(jt, "rightValue");
            if (!jt.contains("feature")) throw CascadeError("missing field 'feature'");
            for (const json& jp : array_field(jt.at("feature"), "parts")) {
                FeaturePart part;
                part.rect = {field<int>(jp, "x"), field<int>(jp, "y"), field<int>(jp, "w"), field<int>(jp, "h")};
                part.weight = field<double>(jp, "weight");
                stump.feature.parts.push_back(part);
            }
            stage.stumps.push_back(std::move(stump));
        }
        model.stages.push_back(std::move(stage));
    }
    emit_warnings(validate_cascade(model));
    return model;
}

std::string save_cascade_json(const CascadeModel& model) {
    json stages = json::array();
    for (const Stage& stage : model.stages) {
        json stumps = json::array();
        for (const WeakStump& stump : stage.stumps) {
            json parts = json::array();
            for (const FeaturePart& p : stump.feature.parts)
                parts.push_back({{"x", p.rect.x}, {"y", p.rect.y}, {"w", p.rect.w}, {"h", p.rect.h},
                                 {"weight", p.weight}});
            stumps.push_back({{"threshold", stump.threshold},
                              {"leftValue", stump.leftValue},
                              {"rightValue", stump.rightValue},
                              {"feature", {{"parts", parts}}}});
        }
        stages.push_back({{"stageThreshold", stage.stageThreshold}, {"stumps", stumps}});
    }
    json doc = {{"windowW", model.windowW}, {"windowH", model.windowH}, {"stages", stages}};
    return doc.dump(2) + "\n";
}

CascadeModel load_cascade_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CascadeError("cannot open cascade file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const bool xml = path.size() >= 4 && path.compare(path.size() - 4, 4, ".xml") == 0;
    return xml ? parse_cascade_xml(buf.str()) : load_cascade_json(buf.str());
}

}  // namespace facerec
