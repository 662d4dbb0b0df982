#include "facerec/pipeline.hpp"

namespace facerec {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::pair<ErrorCode, std::string_view> kErrorNames[] = {
    {ErrorCode::WrongMode, "WrongMode"},       {ErrorCode::UnknownCapture, "UnknownCapture"},
    {ErrorCode::InvalidInput, "InvalidInput"}, {ErrorCode::Transport, "Transport"},
    {ErrorCode::Internal, "Internal"},
};

std::string_view to_string(ErrorCode code) {
    for (const auto& [c, name] : kErrorNames)
        if (c == code) return name;
    return "Internal";
}

ErrorCode parse_error_code(std::string_view text) {
    for (const auto& [c, name] : kErrorNames)
        if (name == text) return c;
    return ErrorCode::Internal;
}

Mode require_mode(const json& j) {
    const auto m = parse_mode(j.get<std::string>());
    if (!m) throw std::invalid_argument("unknown mode '" + j.get<std::string>() + "'");
    return *m;
}

Via parse_via(const json& j) { return j.get<std::string>() == "server" ? Via::Server : Via::Local; }

}  // namespace

std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::Offline: return "Offline";
        case Mode::Online: return "Online";
        case Mode::Enrolment: return "Enrolment";
    }
    return "Offline";
}

std::optional<Mode> parse_mode(std::string_view text) {
    for (Mode m : {Mode::Offline, Mode::Online, Mode::Enrolment})
        if (to_string(m) == text) return m;
    return std::nullopt;
}

std::string_view to_string(Via via) { return via == Via::Server ? "server" : "local"; }

std::string_view event_kind(const PipelineEvent& event) {
    return std::visit(overloaded{
                          [](const FaceDetected&) { return std::string_view("FaceDetected"); },
                          [](const PersonIdentified&) { return std::string_view("PersonIdentified"); },
                          [](const UnknownPerson&) { return std::string_view("UnknownPerson"); },
                          [](const EnrolmentCaptured&) { return std::string_view("EnrolmentCaptured"); },
                          [](const PersonEnrolled&) { return std::string_view("PersonEnrolled"); },
                          [](const StateChanged&) { return std::string_view("StateChanged"); },
                          [](const ErrorEvent&) { return std::string_view("Error"); },
                      },
                      event.payload);
}

json to_json(const PipelineEvent& event) {
    json j = {{"kind", event_kind(event)}, {"at", event.at}};
    std::visit(overloaded{
                   [&](const FaceDetected& e) {
                       j["box"] = {{"x", e.box.x}, {"y", e.box.y}, {"w", e.box.w}, {"h", e.box.h}};
                   },
                   [&](const PersonIdentified& e) {
                       j["personId"] = e.personId;
                       j["displayName"] = e.displayName;
                       j["distance"] = e.distance;
                       j["via"] = to_string(e.via);
                   },
                   [&](const UnknownPerson& e) { j["distance"] = e.distance ? json(*e.distance) : json(nullptr); },
                   [&](const EnrolmentCaptured& e) { j["tempImageRef"] = e.tempImageRef; },
                   [&](const PersonEnrolled& e) {
                       j["personId"] = e.personId;
                       j["displayName"] = e.displayName;
                       j["via"] = to_string(e.via);
                   },
                   [&](const StateChanged& e) {
                       j["from"] = to_string(e.from);
                       j["to"] = to_string(e.to);
                   },
                   [&](const ErrorEvent& e) {
                       j["code"] = to_string(e.code);
                       j["message"] = e.message;
                   },
               },
               event.payload);
    return j;
}

PipelineEvent event_from_json(const json& j) {
    PipelineEvent ev;
    ev.at = j.at("at").get<Millis>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "FaceDetected") {
        const json& b = j.at("box");
        ev.payload = FaceDetected{{b.at("x").get<int>(), b.at("y").get<int>(), b.at("w").get<int>(), b.at("h").get<int>()}};
    } else if (kind == "PersonIdentified") {
        ev.payload = PersonIdentified{j.at("personId").get<std::string>(), j.at("displayName").get<std::string>(),
                                      j.at("distance").get<double>(), parse_via(j.at("via"))};
    } else if (kind == "UnknownPerson") {
        const json& d = j.at("distance");
        ev.payload = UnknownPerson{d.is_null() ? std::nullopt : std::optional<double>(d.get<double>())};
    } else if (kind == "EnrolmentCaptured") {
        ev.payload = EnrolmentCaptured{j.at("tempImageRef").get<std::string>()};
    } else if (kind == "PersonEnrolled") {
        ev.payload = PersonEnrolled{j.at("personId").get<std::string>(), j.at("displayName").get<std::string>(),
                                    parse_via(j.at("via"))};
    } else if (kind == "StateChanged") {
        ev.payload = StateChanged{require_mode(j.at("from")), require_mode(j.at("to"))};
    } else if (kind == "Error") {
        ev.payload = ErrorEvent{parse_error_code(j.at("code").get<std::string>()), j.at("message").get<std::string>()};
    } else {
        throw std::invalid_argument("unknown event kind '" + kind + "'");
    }
    return ev;
}

}  // namespace facerec
