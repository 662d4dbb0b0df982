#pragma once

// HTTP support server: identification, enrolment and database sync for
// mobile clients, plus the console endpoints hosting a Pipeline.
//
//   POST /api/v1/identify            {image}                     -> {match, distance}
//   POST /api/v1/enroll              {displayName, notes, image} -> 201 {personId}
//   GET  /api/v1/sync?limit=K                                    -> {persons: [...]}
//   POST /api/v1/detect              {image}                     -> {boxes: [...]}
//   GET  /api/v1/state                                           -> {mode, pendingCapture}
//   POST /api/v1/state               {mode}                      -> StateChanged event
//   POST /api/v1/frame               {image}                     -> [events]
//   POST /api/v1/enrolment/complete  {tempRef, displayName, notes}
//   GET  /api/v1/events              server-sent events, one JSON event per data line
//   GET  /health                     "ok"
//
// Images travel as {"encoding": "pgm+base64", "data": <base64 of a P5 PGM>}.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "facerec/cascade.hpp"
#include "facerec/facestore.hpp"
#include "facerec/pipeline.hpp"

namespace httplib {
class Server;
}

namespace facerec {

inline constexpr const char* kApiImageEncoding = "pgm+base64";

/// Request decoding failure carrying the HTTP status to answer with.
class WireError : public std::runtime_error {
public:
    WireError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

nlohmann::json encode_api_image(const GrayImage& img);
/// 400 for bad base64/PGM, 422 for PGM headers with unusable dimensions.
GrayImage decode_api_image(const nlohmann::json& j);

nlohmann::json to_json(const RemoteIdentification& id);
RemoteIdentification identification_from_json(const nlohmann::json& j);

/// SupportClient speaking the /api/v1 protocol over HTTP.
class HttpSupportClient : public SupportClient {
public:
    explicit HttpSupportClient(std::string endpoint, int timeoutMs = 3000);

    RemoteIdentification identify(const GrayImage& face) override;
    std::string enroll(std::string_view displayName, std::string_view notes, const GrayImage& face) override;
    nlohmann::json sync(std::optional<int> limit = std::nullopt);

private:
    std::string endpoint_;
    int timeoutMs_;
};

/// In-order fan-out of serialized events to any number of subscribers.
class EventHub {
public:
    explicit EventHub(std::size_t backlog = 1024) : backlog_(backlog) {}

    void publish(const PipelineEvent& event);
    /// Sequence number of the next event to be published.
    std::uint64_t cursor() const;
    /// Events at or after `cursor` (advanced past them); waits up to
    /// `timeout` when none are available yet.
    std::vector<std::string> wait(std::uint64_t& cursor, std::chrono::milliseconds timeout);
    void close();
    bool closed() const;

private:
    std::size_t backlog_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::string> buffer_;
    std::uint64_t first_ = 0;  // sequence number of buffer_.front()
    bool closed_ = false;
};

struct ServerOptions {
    StoreConfig store;
    std::shared_ptr<const CascadeModel> cascade;  // optional; /detect and /frame need it
    LbpParams lbp;
    DetectParams detect;
    PipelineConfig pipeline;
    /// Upstream used by the hosted pipeline in Online mode; when unset the
    /// pipeline talks to this server in-process.
    std::shared_ptr<SupportClient> upstream;
};

class SupportServer {
public:
    explicit SupportServer(ServerOptions options);
    ~SupportServer();

    SupportServer(const SupportServer&) = delete;
    SupportServer& operator=(const SupportServer&) = delete;

    /// Binds and serves on a background thread; port 0 picks a free port.
    /// Returns the bound port.
    int start(const std::string& host, int port);
    /// Binds and serves on the calling thread until stop().
    bool run(const std::string& host, int port);
    void stop();

    // Operations behind the endpoints, usable in-process.
    RemoteIdentification identify(const GrayImage& face);
    std::string enroll(std::string_view displayName, std::string_view notes, const GrayImage& face);
    nlohmann::json sync(std::optional<int> limit) const;

    FaceStore& store() { return *store_; }
    EventHub& events() { return hub_; }

private:
    void install_routes();
    const RecognizerModel* recognizer_locked();

    ServerOptions options_;
    std::shared_ptr<FaceStore> store_;
    std::unique_ptr<httplib::Server> http_;
    std::thread thread_;

    std::mutex recognizerMutex_;
    std::optional<RecognizerModel> model_;
    std::uint64_t modelGeneration_ = 0;

    std::mutex pipelineMutex_;
    std::unique_ptr<Pipeline> pipeline_;

    EventHub hub_;
};

}  // namespace facerec
