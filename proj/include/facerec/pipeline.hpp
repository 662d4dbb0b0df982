#pragma once

// Frame-processing state machine: detection cooldown, offline/online
// recognition routing, enrolment captures and the feedback event stream.

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "facerec/cascade.hpp"
#include "facerec/facestore.hpp"
#include "facerec/lbph.hpp"

namespace facerec {

enum class Mode { Offline, Online, Enrolment };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view text);

enum class Via { Local, Server };

std::string_view to_string(Via via);

// ---------------------------------------------------------------------------
// Events

struct FaceDetected {
    Rect box;
};

struct PersonIdentified {
    std::string personId;
    std::string displayName;
    double distance = 0.0;
    Via via = Via::Local;
};

/// distance is absent when nothing was enrolled to compare against.
struct UnknownPerson {
    std::optional<double> distance;
};

struct EnrolmentCaptured {
    std::string tempImageRef;
};

/// Confirmation that a pending capture was stored as a new person.
struct PersonEnrolled {
    std::string personId;
    std::string displayName;
    Via via = Via::Local;
};

struct StateChanged {
    Mode from;
    Mode to;
};

enum class ErrorCode { WrongMode, UnknownCapture, InvalidInput, Transport, Internal };

struct ErrorEvent {
    ErrorCode code = ErrorCode::Internal;
    std::string message;
};

using EventPayload =
    std::variant<FaceDetected, PersonIdentified, UnknownPerson, EnrolmentCaptured, PersonEnrolled, StateChanged, ErrorEvent>;

struct PipelineEvent {
    Millis at = 0;
    EventPayload payload;

    template <typename T>
    bool is() const { return std::holds_alternative<T>(payload); }
    template <typename T>
    const T& as() const { return std::get<T>(payload); }
};

std::string_view event_kind(const PipelineEvent& event);
nlohmann::json to_json(const PipelineEvent& event);
PipelineEvent event_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Support server client

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RemoteMatch {
    std::string personId;
    std::string displayName;
    double distance = 0.0;
};

struct RemoteIdentification {
    std::optional<RemoteMatch> match;
    std::optional<double> distance;  // nearest distance, absent for an empty store
};

/// Remote identification/enrolment. Implementations throw TransportError
/// when the server cannot be reached or answers garbage.
class SupportClient {
public:
    virtual ~SupportClient() = default;
    virtual RemoteIdentification identify(const GrayImage& face) = 0;
    virtual std::string enroll(std::string_view displayName, std::string_view notes, const GrayImage& face) = 0;
};

// ---------------------------------------------------------------------------
// Pipeline

class PipelineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    Millis cooldownMs = 2000;
    DetectParams detectParams;
    LbpParams lbpParams;
    std::optional<std::string> serverEndpoint;
    bool onlineFallback = true;
    int serverTimeoutMs = 3000;
    std::filesystem::path tempDirectory;
};

class Pipeline {
public:
    Pipeline(PipelineConfig config, std::shared_ptr<const CascadeModel> cascade, std::shared_ptr<FaceStore> store,
             std::shared_ptr<SupportClient> server, Mode initial = Mode::Offline);

    std::vector<PipelineEvent> process_frame(const GrayImage& frame, Millis now);
    PipelineEvent set_mode(Mode mode, Millis now);
    PipelineEvent complete_enrolment(std::string_view tempImageRef, std::string_view displayName,
                                     std::string_view notes, Millis now);
    std::optional<PipelineEvent> check_connectivity(const std::function<bool()>& probe, Millis now);

    Mode mode() const { return mode_; }
    std::optional<Millis> last_detection_at() const { return lastDetectionAt_; }
    std::optional<std::string> pending_capture() const { return pending_; }
    const PipelineConfig& config() const { return config_; }
    const std::filesystem::path& temp_directory() const { return config_.tempDirectory; }

private:
    PipelineEvent make_event(Millis now, EventPayload payload);
    std::filesystem::path write_temp(const GrayImage& face) const;
    void clear_pending();
    void identify_locally(const GrayImage& face, Millis now, std::vector<PipelineEvent>& out);
    const RecognizerModel* recognizer();

    PipelineConfig config_;
    std::shared_ptr<const CascadeModel> cascade_;
    std::shared_ptr<FaceStore> store_;
    std::shared_ptr<SupportClient> server_;
    Mode mode_;
    Mode resumeMode_;  // mode active before entering Enrolment
    std::optional<Millis> lastDetectionAt_;
    std::optional<std::string> pending_;
    Millis lastEventAt_ = 0;

    std::optional<RecognizerModel> model_;
    std::uint64_t modelGeneration_ = 0;
};

/// Largest-area box; ties go to the topmost, then leftmost.
Rect select_primary_face(std::span<const Rect> boxes);

}  // namespace facerec
