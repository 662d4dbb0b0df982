#include "facerec/pipeline.hpp"

#include <algorithm>

#include "facerec/encoding.hpp"

namespace facerec {

namespace fs = std::filesystem;

namespace {

// Removes a temporary capture when the owning scope ends.
class TempFile {
public:
    explicit TempFile(fs::path path) : path_(std::move(path)) {}
    TempFile(const TempFile&) = delete;
    TempFile& operator=(const TempFile&) = delete;
    ~TempFile() {
        if (!path_.empty()) {
            std::error_code ec;
            fs::remove(path_, ec);
        }
    }
    const fs::path& path() const { return path_; }
    fs::path release() { return std::exchange(path_, {}); }

private:
    fs::path path_;
};

bool valid_ref(std::string_view ref) {
    return !ref.empty() && ref.find('/') == std::string_view::npos && ref.find('\\') == std::string_view::npos &&
           ref != "." && ref != "..";
}

}  // namespace

Rect select_primary_face(std::span<const Rect> boxes) {
    if (boxes.empty()) throw PipelineError("select_primary_face: no boxes");
    return *std::min_element(boxes.begin(), boxes.end(), [](const Rect& a, const Rect& b) {
        if (a.area() != b.area()) return a.area() > b.area();
        return std::tie(a.y, a.x) < std::tie(b.y, b.x);
    });
}

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<const CascadeModel> cascade, std::shared_ptr<FaceStore> store,
                   std::shared_ptr<SupportClient> server, Mode initial)
    : config_(std::move(config)),
      cascade_(std::move(cascade)),
      store_(std::move(store)),
      server_(std::move(server)),
      mode_(initial),
      resumeMode_(initial == Mode::Enrolment ? Mode::Offline : initial) {
    if (config_.cooldownMs < 0) throw PipelineError("cooldownMs must be >= 0");
    validate_params(config_.detectParams);
    validate_params(config_.lbpParams);
    if (config_.tempDirectory.empty())
        config_.tempDirectory = fs::temp_directory_path() / ("facerec-" + random_hex(6));
    std::error_code ec;
    fs::create_directories(config_.tempDirectory, ec);
    if (ec) throw PipelineError("cannot create temp directory " + config_.tempDirectory.string());
}

PipelineEvent Pipeline::make_event(Millis now, EventPayload payload) {
    lastEventAt_ = std::max(lastEventAt_, now);
    return PipelineEvent{lastEventAt_, std::move(payload)};
}

fs::path Pipeline::write_temp(const GrayImage& face) const {
    fs::path path = config_.tempDirectory / ("capture-" + random_hex(8) + ".pgm");
    write_pgm_file(path, face);
    return path;
}

void Pipeline::clear_pending() {
    if (!pending_) return;
    std::error_code ec;
    fs::remove(config_.tempDirectory / *pending_, ec);
    pending_.reset();
}

const RecognizerModel* Pipeline::recognizer() {
    if (!store_ || store_->empty()) return nullptr;
    const auto generation = store_->generation();
    if (!model_ || modelGeneration_ != generation) {
        model_ = build_recognizer(*store_, config_.lbpParams);
        modelGeneration_ = generation;
    }
    return &*model_;
}

void Pipeline::identify_locally(const GrayImage& face, Millis now, std::vector<PipelineEvent>& out) {
    const RecognizerModel* model = recognizer();
    if (!model) {
        out.push_back(make_event(now, UnknownPerson{std::nullopt}));
        return;
    }
    const PredictionResult result = predict(*model, face);
    if (!result.isKnown) {
        out.push_back(make_event(now, UnknownPerson{result.distance}));
        return;
    }
    const PersonRecord person = store_->record_usage(result.label, now);
    out.push_back(make_event(now, PersonIdentified{person.id, person.displayName, result.distance, Via::Local}));
}

std::vector<PipelineEvent> Pipeline::process_frame(const GrayImage& frame, Millis now) {
    if (!cascade_) throw PipelineError("pipeline has no cascade model");
    if (mode_ == Mode::Offline && !store_) throw PipelineError("offline mode needs a local face store");
    if (mode_ == Mode::Online && !server_) throw PipelineError("online mode needs a support server endpoint");
    if (mode_ == Mode::Enrolment && !store_ && !server_)
        throw PipelineError("enrolment mode needs a local face store or a support server");

    if (lastDetectionAt_ && now - *lastDetectionAt_ < config_.cooldownMs) return {};
    if (frame.width() < cascade_->windowW || frame.height() < cascade_->windowH) return {};

    const auto boxes = detect(*cascade_, frame, config_.detectParams);
    if (boxes.empty()) return {};

    std::vector<PipelineEvent> events;
    const Rect box = select_primary_face(boxes);
    events.push_back(make_event(now, FaceDetected{box}));
    lastDetectionAt_ = now;

    TempFile capture(write_temp(crop(frame, box)));
    const GrayImage face = read_pgm_file(capture.path());

    switch (mode_) {
        case Mode::Offline:
            identify_locally(face, now, events);
            break;
        case Mode::Online:
            try {
                const RemoteIdentification remote = server_->identify(face);
                if (remote.match)
                    events.push_back(make_event(now, PersonIdentified{remote.match->personId, remote.match->displayName,
                                                                      remote.match->distance, Via::Server}));
                else
                    events.push_back(make_event(now, UnknownPerson{remote.distance}));
            } catch (const TransportError& e) {
                if (config_.onlineFallback && store_)
                    identify_locally(face, now, events);
                else
                    events.push_back(make_event(now, ErrorEvent{ErrorCode::Transport, e.what()}));
            }
            break;
        case Mode::Enrolment:
            clear_pending();
            pending_ = capture.release().filename().string();
            events.push_back(make_event(now, EnrolmentCaptured{*pending_}));
            break;
    }
    return events;
}

PipelineEvent Pipeline::set_mode(Mode mode, Millis now) {
    const Mode from = mode_;
    if (mode == Mode::Enrolment && from != Mode::Enrolment) resumeMode_ = from;
    clear_pending();
    mode_ = mode;
    return make_event(now, StateChanged{from, mode});
}

PipelineEvent Pipeline::complete_enrolment(std::string_view tempImageRef, std::string_view displayName,
                                           std::string_view notes, Millis now) {
    if (mode_ != Mode::Enrolment)
        return make_event(now, ErrorEvent{ErrorCode::WrongMode, "enrolment can only be completed in Enrolment mode"});
    if (!valid_ref(tempImageRef) || !pending_ || *pending_ != tempImageRef)
        return make_event(now, ErrorEvent{ErrorCode::UnknownCapture,
                                          "no pending capture named '" + std::string(tempImageRef) + "'"});
    if (displayName.empty()) return make_event(now, ErrorEvent{ErrorCode::InvalidInput, "display name must not be empty"});

    std::optional<GrayImage> face;
    try {
        face = read_pgm_file(config_.tempDirectory / *pending_);
    } catch (const std::exception& e) {
        pending_.reset();
        return make_event(now, ErrorEvent{ErrorCode::UnknownCapture, e.what()});
    }

    std::optional<PipelineEvent> result;
    if (resumeMode_ == Mode::Online && server_) {
        try {
            const std::string id = server_->enroll(displayName, notes, *face);
            result = make_event(now, PersonEnrolled{id, std::string(displayName), Via::Server});
        } catch (const TransportError& e) {
            if (!(config_.onlineFallback && store_))
                return make_event(now, ErrorEvent{ErrorCode::Transport, e.what()});
        }
    }
    if (!result) {
        if (!store_) return make_event(now, ErrorEvent{ErrorCode::Internal, "no local face store configured"});
        try {
            const PersonRecord person = store_->enroll(displayName, notes, *face, now);
            result = make_event(now, PersonEnrolled{person.id, person.displayName, Via::Local});
        } catch (const StoreError& e) {
            const ErrorCode code = e.kind() == StoreErrorKind::EmptyName ? ErrorCode::InvalidInput : ErrorCode::Internal;
            return make_event(now, ErrorEvent{code, e.what()});
        }
    }
    clear_pending();
    return *result;
}

std::optional<PipelineEvent> Pipeline::check_connectivity(const std::function<bool()>& probe, Millis now) {
    if (mode_ == Mode::Enrolment) return std::nullopt;
    const bool reachable = probe();
    if (reachable && mode_ == Mode::Offline) return set_mode(Mode::Online, now);
    if (!reachable && mode_ == Mode::Online) return set_mode(Mode::Offline, now);
    return std::nullopt;
}

}  // namespace facerec
