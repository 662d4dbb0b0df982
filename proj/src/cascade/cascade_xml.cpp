#include <charconv>
#include <iostream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "facerec/cascade.hpp"

namespace facerec {

namespace pt = boost::property_tree;

namespace {

bool is_element(const std::string& key) { return key != "<xmlattr>" && key != "<xmlcomment>"; }

std::vector<std::string_view> tokens(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        const std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) out.push_back(text.substr(start, i - start));
    }
    return out;
}

template <typename T>
T parse_number(std::string_view token, const std::string& where) {
    T value{};
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw CascadeError(where + ": malformed number '" + std::string(token) + "'");
    return value;
}

double scalar(const pt::ptree& node, const char* name, const std::string& where) {
    const auto child = node.get_child_optional(name);
    if (!child) throw CascadeError(where + ": missing " + name);
    const auto toks = tokens(child->data());
    if (toks.size() != 1) throw CascadeError(where + ": " + name + " must hold one number");
    return parse_number<double>(toks.front(), where);
}

// Elements named "_" in document order.
std::vector<const pt::ptree*> items(const pt::ptree& node) {
    std::vector<const pt::ptree*> out;
    for (const auto& [key, child] : node)
        if (key == "_") out.push_back(&child);
    return out;
}

const pt::ptree& cascade_root(const pt::ptree& doc) {
    const pt::ptree* storage = &doc;
    if (auto s = doc.get_child_optional("opencv_storage")) storage = &*s;
    for (const auto& [key, child] : *storage)
        if (is_element(key) && child.get_child_optional("stages")) return child;
    if (storage->get_child_optional("stages")) return *storage;
    throw CascadeError("cascade XML: no element with a <stages> list");
}

}  // namespace

CascadeModel parse_cascade_xml(std::string_view text) {
    pt::ptree doc;
    try {
        std::istringstream in{std::string(text)};
        pt::read_xml(in, doc, pt::xml_parser::trim_whitespace);
    } catch (const pt::xml_parser_error& e) {
        throw CascadeError(std::string("cascade XML: ") + e.what());
    }
    const pt::ptree& root = cascade_root(doc);

    CascadeModel model;
    const auto size = root.get_child_optional("size");
    if (!size) throw CascadeError("cascade XML: missing <size>");
    const auto dims = tokens(size->data());
    if (dims.size() != 2) throw CascadeError("cascade XML: <size> must be 'width height'");
    model.windowW = parse_number<int>(dims[0], "size");
    model.windowH = parse_number<int>(dims[1], "size");

    const auto stageNodes = items(root.get_child("stages"));
    for (std::size_t si = 0; si < stageNodes.size(); ++si) {
        const pt::ptree& stageNode = *stageNodes[si];
        const std::string stageWhere = "stage " + std::to_string(si);
        Stage stage;
        const auto trees = stageNode.get_child_optional("trees");
        if (!trees) throw CascadeError(stageWhere + ": missing <trees>");
        const auto treeNodes = items(*trees);
        for (std::size_t ti = 0; ti < treeNodes.size(); ++ti) {
            const std::string where = stageWhere + " tree " + std::to_string(ti);
            const auto nodes = items(*treeNodes[ti]);
            if (nodes.size() != 1)
                throw CascadeError(where + ": unsupported tree with " + std::to_string(nodes.size()) +
                                   " nodes (only single stumps are supported)");
            const pt::ptree& node = *nodes.front();
            if (node.get_child_optional("left_node") || node.get_child_optional("right_node"))
                throw CascadeError(where + ": unsupported tree deeper than a single stump");

            const auto feature = node.get_child_optional("feature");
            if (!feature) throw CascadeError(where + ": missing <feature>");
            if (const auto tilted = feature->get_child_optional("tilted")) {
                const auto toks = tokens(tilted->data());
                if (toks.size() == 1 && parse_number<int>(toks.front(), where) != 0)
                    throw CascadeError(stageWhere + ": unsupported tilted feature");
            }
            const auto rects = feature->get_child_optional("rects");
            if (!rects) throw CascadeError(where + ": missing <rects>");

            WeakStump stump;
            for (const pt::ptree* r : items(*rects)) {
                const auto t = tokens(r->data());
                if (t.size() != 5) throw CascadeError(where + ": rect must be 'x y w h weight'");
                FeaturePart part;
                part.rect = {parse_number<int>(t[0], where), parse_number<int>(t[1], where),
                             parse_number<int>(t[2], where), parse_number<int>(t[3], where)};
                part.weight = parse_number<double>(t[4], where);
                const Rect& pr = part.rect;
                if (pr.x < 0 || pr.y < 0 || pr.w < 1 || pr.h < 1 || pr.right() > model.windowW ||
                    pr.bottom() > model.windowH)
                    throw CascadeError(where + ": feature rect outside the window");
                stump.feature.parts.push_back(part);
            }
            stump.threshold = scalar(node, "threshold", where);
            stump.leftValue = scalar(node, "left_val", where);
            stump.rightValue = scalar(node, "right_val", where);
            stage.stumps.push_back(std::move(stump));
        }
        stage.stageThreshold = scalar(stageNode, "stage_threshold", stageWhere);
        model.stages.push_back(std::move(stage));
    }
    for (const auto& w : validate_cascade(model)) std::clog << "warning: " << w << '\n';
    return model;
}

}  // namespace facerec
