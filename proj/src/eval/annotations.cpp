#include <fstream>
#include <sstream>

#include "json.hpp"

#include "facerec/eval.hpp"

namespace facerec {

using nlohmann::json;

std::vector<Annotation> parse_annotations(std::string_view text) {
    const json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) throw EvalError("annotations must be a JSON array");
    std::vector<Annotation> out;
    try {
        for (const json& a : doc) {
            Annotation ann;
            ann.frame = a.at("frame").get<std::string>();
            if (a.contains("boxes"))
                for (const json& b : a.at("boxes")) {
                    const Rect r{b.at("x").get<int>(), b.at("y").get<int>(), b.at("w").get<int>(), b.at("h").get<int>()};
                    if (r.x < 0 || r.y < 0 || r.w < 1 || r.h < 1)
                        throw EvalError("annotations: bad box in frame " + ann.frame);
                    ann.boxes.push_back(r);
                }
            if (a.contains("label") && !a.at("label").is_null()) ann.label = a.at("label").get<std::string>();
            out.push_back(std::move(ann));
        }
    } catch (const json::exception& e) {
        throw EvalError(std::string("annotations: ") + e.what());
    }
    return out;
}

std::vector<Annotation> read_annotations(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EvalError("cannot open annotations " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_annotations(buf.str());
}

void require_frames(const std::filesystem::path& corpusDir, std::span<const Annotation> annotations) {
    for (const Annotation& a : annotations)
        if (!std::filesystem::is_regular_file(corpusDir / a.frame))
            throw EvalError("missing frame " + (corpusDir / a.frame).string());
}

}  // namespace facerec
