#include "httplib.h"

#include "facerec/server.hpp"

namespace facerec {

using nlohmann::json;

namespace {

// Pipeline-facing client that answers from the hosting server's own store.
class InProcessClient : public SupportClient {
public:
    explicit InProcessClient(SupportServer& server) : server_(server) {}
    RemoteIdentification identify(const GrayImage& face) override { return server_.identify(face); }
    std::string enroll(std::string_view displayName, std::string_view notes, const GrayImage& face) override {
        return server_.enroll(displayName, notes, face);
    }

private:
    SupportServer& server_;
};

void reply_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
    reply_json(res, status, {{"error", message}});
}

json parse_object(const httplib::Request& req) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw WireError(400, "request body must be a JSON object");
    return body;
}

std::string string_field(const json& body, const char* name, bool required) {
    if (!body.contains(name)) {
        if (required) throw WireError(400, std::string("missing field '") + name + "'");
        return {};
    }
    if (!body.at(name).is_string()) throw WireError(400, std::string("field '") + name + "' must be a string");
    return body.at(name).get<std::string>();
}

const json& image_field(const json& body) {
    if (!body.contains("image")) throw WireError(400, "missing field 'image'");
    return body.at("image");
}

json rect_json(const Rect& r) { return {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler fn) {
    return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const WireError& e) {
            reply_error(res, e.status(), e.what());
        } catch (const json::exception& e) {
            reply_error(res, 400, e.what());
        } catch (const StoreError& e) {
            reply_error(res, e.kind() == StoreErrorKind::EmptyName ? 400 : 500, e.what());
        } catch (const PipelineError& e) {
            reply_error(res, 503, e.what());
        } catch (const std::exception& e) {
            reply_error(res, 500, e.what());
        }
    };
}

int status_for(const PipelineEvent& ev) {
    if (!ev.is<ErrorEvent>()) return 200;
    switch (ev.as<ErrorEvent>().code) {
        case ErrorCode::WrongMode: return 409;
        case ErrorCode::UnknownCapture:
        case ErrorCode::InvalidInput: return 400;
        case ErrorCode::Transport: return 502;
        case ErrorCode::Internal: return 500;
    }
    return 500;
}

}  // namespace

SupportServer::SupportServer(ServerOptions options)
    : options_(std::move(options)),
      store_(std::make_shared<FaceStore>(options_.store)),
      http_(std::make_unique<httplib::Server>()) {
    validate_params(options_.lbp);
    validate_params(options_.detect);
    PipelineConfig pc = options_.pipeline;
    pc.detectParams = options_.detect;
    pc.lbpParams = options_.lbp;
    std::shared_ptr<SupportClient> upstream = options_.upstream;
    if (!upstream) upstream = std::make_shared<InProcessClient>(*this);
    pipeline_ = std::make_unique<Pipeline>(std::move(pc), options_.cascade, store_, std::move(upstream));
    install_routes();
}

SupportServer::~SupportServer() { stop(); }

const RecognizerModel* SupportServer::recognizer_locked() {
    if (store_->empty()) return nullptr;
    const auto generation = store_->generation();
    if (!model_ || modelGeneration_ != generation) {
        model_ = build_recognizer(*store_, options_.lbp);
        modelGeneration_ = generation;
    }
    return &*model_;
}

RemoteIdentification SupportServer::identify(const GrayImage& face) {
    std::lock_guard lock(recognizerMutex_);
    const RecognizerModel* model = recognizer_locked();
    if (!model) return {};
    const PredictionResult result = predict(*model, face);
    RemoteIdentification out;
    out.distance = result.distance;
    if (result.isKnown) {
        const PersonRecord person = store_->record_usage(result.label, now_millis());
        out.match = RemoteMatch{person.id, person.displayName, result.distance};
    }
    return out;
}

std::string SupportServer::enroll(std::string_view displayName, std::string_view notes, const GrayImage& face) {
    std::lock_guard lock(recognizerMutex_);
    return store_->enroll(displayName, notes, face, now_millis()).id;
}

json SupportServer::sync(std::optional<int> limit) const {
    if (limit && *limit < 1) throw WireError(400, "limit must be at least 1");
    const auto records = store_->retention_order();
    const std::size_t k = limit ? std::size_t(*limit) : store_->capacity();
    json persons = json::array();
    for (std::size_t i = 0; i < records.size() && i < k; ++i) {
        const PersonRecord& r = records[i];
        json faces = json::array();
        for (const auto& name : r.faceImages) faces.push_back(encode_api_image(store_->load_face(name)));
        persons.push_back({{"personId", r.id},
                           {"displayName", r.displayName},
                           {"notes", r.notes},
                           {"usageCount", r.usageCount},
                           {"faces", faces}});
    }
    return {{"persons", persons}};
}

void SupportServer::install_routes() {
    httplib::Server& srv = *http_;
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    srv.Get("/health", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });

    srv.Post("/api/v1/identify", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const GrayImage img = decode_api_image(image_field(parse_object(req)));
                 reply_json(res, 200, to_json(identify(img)));
             }));

    srv.Post("/api/v1/enroll", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const json body = parse_object(req);
                 const std::string name = string_field(body, "displayName", true);
                 const std::string notes = string_field(body, "notes", false);
                 if (name.empty()) throw WireError(400, "displayName must not be empty");
                 GrayImage img = [&] {
                     try {
                         return decode_api_image(image_field(body));
                     } catch (const WireError& e) {
                         throw WireError(400, e.what());
                     }
                 }();
                 reply_json(res, 201, {{"personId", enroll(name, notes, img)}});
             }));

    srv.Get("/api/v1/sync", guarded([this](const httplib::Request& req, httplib::Response& res) {
                std::optional<int> limit;
                if (req.has_param("limit")) {
                    const std::string text = req.get_param_value("limit");
                    std::size_t used = 0;
                    long value = 0;
                    try {
                        value = std::stol(text, &used);
                    } catch (const std::exception&) {
                        throw WireError(400, "limit must be an integer");
                    }
                    if (used != text.size()) throw WireError(400, "limit must be an integer");
                    if (value < 1) throw WireError(400, "limit must be at least 1");
                    limit = int(std::min<long>(value, 1'000'000));
                }
                reply_json(res, 200, sync(limit));
            }));

    srv.Post("/api/v1/detect", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 if (!options_.cascade) throw PipelineError("no cascade model loaded");
                 const GrayImage img = decode_api_image(image_field(parse_object(req)));
                 json boxes = json::array();
                 if (img.width() >= options_.cascade->windowW && img.height() >= options_.cascade->windowH)
                     for (const Rect& r : detect(*options_.cascade, img, options_.detect)) boxes.push_back(rect_json(r));
                 reply_json(res, 200, {{"boxes", boxes}});
             }));

    srv.Get("/api/v1/state", guarded([this](const httplib::Request&, httplib::Response& res) {
                std::lock_guard lock(pipelineMutex_);
                const auto pending = pipeline_->pending_capture();
                reply_json(res, 200,
                           {{"mode", to_string(pipeline_->mode())},
                            {"pendingCapture", pending ? json(*pending) : json(nullptr)}});
            }));

    srv.Post("/api/v1/state", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto mode = parse_mode(string_field(parse_object(req), "mode", true));
                 if (!mode) throw WireError(400, "mode must be Offline, Online or Enrolment");
                 std::lock_guard lock(pipelineMutex_);
                 const PipelineEvent ev = pipeline_->set_mode(*mode, now_millis());
                 hub_.publish(ev);
                 reply_json(res, 200, to_json(ev));
             }));

    srv.Post("/api/v1/frame", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 if (!options_.cascade) throw PipelineError("no cascade model loaded");
                 const GrayImage img = decode_api_image(image_field(parse_object(req)));
                 std::lock_guard lock(pipelineMutex_);
                 const auto events = pipeline_->process_frame(img, now_millis());
                 json out = json::array();
                 for (const auto& ev : events) {
                     hub_.publish(ev);
                     out.push_back(to_json(ev));
                 }
                 reply_json(res, 200, out);
             }));

    srv.Post("/api/v1/enrolment/complete", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const json body = parse_object(req);
                 const std::string ref = string_field(body, "tempRef", true);
                 const std::string name = string_field(body, "displayName", false);
                 const std::string notes = string_field(body, "notes", false);
                 std::lock_guard lock(pipelineMutex_);
                 const PipelineEvent ev = pipeline_->complete_enrolment(ref, name, notes, now_millis());
                 hub_.publish(ev);
                 const int status = status_for(ev);
                 reply_json(res, status == 200 ? 201 : status, to_json(ev));
             }));

    srv.Get("/api/v1/events", [this](const httplib::Request&, httplib::Response& res) {
        auto cursor = std::make_shared<std::uint64_t>(hub_.cursor());
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [this, cursor](std::size_t, httplib::DataSink& sink) {
            const auto events = hub_.wait(*cursor, std::chrono::milliseconds(250));
            if (hub_.closed()) {
                sink.done();
                return true;
            }
            for (const auto& e : events) {
                const std::string frame = "data: " + e + "\n\n";
                if (!sink.write(frame.data(), frame.size())) return false;
            }
            return sink.is_writable();
        });
    });
}

int SupportServer::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = http_->bind_to_any_port(host);
    } else if (!http_->bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { http_->listen_after_bind(); });
    return bound;
}

bool SupportServer::run(const std::string& host, int port) { return http_->listen(host, port); }

void SupportServer::stop() {
    hub_.close();
    if (http_) http_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace facerec
