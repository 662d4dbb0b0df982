// facerec: evaluation harness, enrolment/identification and the support server.
//
// Exit codes: 0 success, 1 evaluation or runtime error, 2 usage error.

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "facerec/cascade.hpp"
#include "facerec/eval.hpp"
#include "facerec/facestore.hpp"
#include "facerec/server.hpp"

namespace {

using namespace facerec;
using nlohmann::json;

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

struct DetectOptions {
    double scaleFactor = 1.1;
    int minNeighbors = 3;
    double stepFraction = 0.05;
    double eps = 0.2;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--scale-factor", scaleFactor, "Scan scale step (> 1)")->capture_default_str();
        cmd->add_option("--min-neighbors", minNeighbors, "Raw hits needed per grouped detection")->capture_default_str();
        cmd->add_option("--step", stepFraction, "Window step as a fraction of window width")->capture_default_str();
        cmd->add_option("--eps", eps, "Rectangle grouping tolerance")->capture_default_str();
    }
    DetectParams params() const { return {scaleFactor, minNeighbors, std::nullopt, stepFraction, eps}; }
};

struct LbpOptions {
    int gridX = 8;
    int gridY = 8;
    int faceSize = 100;
    double threshold = 0.5;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--grid-x", gridX, "Histogram regions across")->capture_default_str();
        cmd->add_option("--grid-y", gridY, "Histogram regions down")->capture_default_str();
        cmd->add_option("--face-size", faceSize, "Canonical face side in pixels")->capture_default_str();
        cmd->add_option("--threshold", threshold, "Unknown-person distance threshold")->capture_default_str();
    }
    LbpParams params() const {
        LbpParams p;
        p.gridX = gridX;
        p.gridY = gridY;
        p.faceW = p.faceH = faceSize;
        p.unknownThreshold = threshold;
        return p;
    }
};

struct StoreOptions {
    std::string dir;
    std::size_t capacity = 10;
    std::string keyEnv = "FACESTORE_KEY";

    void add_to(CLI::App* cmd, bool required) {
        auto* opt = cmd->add_option("--store", dir, "Face store directory")->envname("STORE_DIR");
        if (required) opt->required();
        cmd->add_option("--capacity", capacity, "Maximum enrolled persons")->envname("CAPACITY")->capture_default_str();
        cmd->add_option("--key-env", keyEnv, "Environment variable holding the store key")->capture_default_str();
    }
    StoreConfig config() const { return {dir, capacity, keyEnv}; }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

template <typename Report>
void print_reports(const std::vector<Report>& reports, bool csv) {
    std::cout << (csv ? render_csv(std::span<const Report>(reports)) : render_table(std::span<const Report>(reports)));
}

std::vector<DetectionReport> detection_counts(const json& doc) {
    std::vector<DetectionReport> out;
    for (const json& r : doc) {
        DetectionReport d;
        d.id = r.at("id").get<std::string>();
        d.framesWithFaces = r.value("framesWithFaces", 0);
        d.correct = r.at("correct").get<int>();
        d.incorrect = r.at("incorrect").get<int>();
        d.detections = r.value("detections", d.correct + d.incorrect);
        if (d.detections != d.correct + d.incorrect)
            throw std::runtime_error("row " + d.id + ": detections != correct + incorrect");
        out.push_back(d);
    }
    return out;
}

std::vector<RecognitionReport> recognition_counts(const json& doc) {
    std::vector<RecognitionReport> out;
    for (const json& r : doc) {
        RecognitionReport d;
        d.id = r.at("id").get<std::string>();
        d.correct = r.at("correct").get<int>();
        d.incorrect = r.at("incorrect").get<int>();
        d.experiments = r.value("experiments", d.correct + d.incorrect);
        if (d.experiments != d.correct + d.incorrect)
            throw std::runtime_error("row " + d.id + ": experiments != correct + incorrect");
        out.push_back(d);
    }
    return out;
}

// Loads a face image, optionally reduced to the largest detected face.
GrayImage load_face(const std::string& image, const std::string& cascadePath, const DetectParams& params) {
    GrayImage img = read_pgm_file(image);
    if (cascadePath.empty()) return img;
    const CascadeModel cascade = load_cascade_file(cascadePath);
    const auto boxes = detect(cascade, img, params);
    if (boxes.empty()) throw std::runtime_error("no face detected in " + image);
    return crop(img, boxes.front());
}

SupportServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Face detection and recognition toolkit"};
    app.require_subcommand(1);

    // eval ------------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "Accuracy evaluation over frame corpora");
    eval->require_subcommand(1);

    auto* evalDetect = eval->add_subcommand("detect", "Score detections against annotated frames");
    std::string corpus, cascadePath;
    std::vector<std::string> annotationFiles;
    double iouThreshold = 0.5;
    bool csv = false, showTimings = false;
    DetectOptions detectOpts;
    evalDetect->add_option("--corpus", corpus, "Directory holding the PGM frames")->required();
    evalDetect->add_option("--annotations", annotationFiles, "Annotation JSON; one report row per file")->required();
    evalDetect->add_option("--cascade", cascadePath, "Cascade (.xml legacy or native .json)")->required();
    evalDetect->add_option("--iou", iouThreshold, "IoU needed for a correct detection")->capture_default_str();
    evalDetect->add_flag("--csv", csv, "CSV output");
    evalDetect->add_flag("--timings", showTimings, "Print per-frame processing times");
    detectOpts.add_to(evalDetect);

    auto* evalRecognize = eval->add_subcommand("recognize", "Score recognition of labelled face crops");
    std::string labelsFile;
    bool requireKnown = false;
    StoreOptions storeOpts;
    LbpOptions lbpOpts;
    evalRecognize->add_option("--corpus", corpus, "Directory holding the PGM frames")->required();
    evalRecognize->add_option("--labels", labelsFile, "Annotation JSON with a label per frame")->required();
    evalRecognize->add_flag("--require-known", requireKnown, "Count matches beyond the threshold as incorrect");
    evalRecognize->add_flag("--csv", csv, "CSV output");
    storeOpts.add_to(evalRecognize, true);
    lbpOpts.add_to(evalRecognize);

    auto* evalRender = eval->add_subcommand("render", "Render report tables from raw counts");
    std::string countsFile, kind = "detection";
    evalRender->add_option("counts", countsFile, "JSON array of {id, correct, incorrect, ...}")->required();
    evalRender->add_option("--kind", kind, "detection or recognition")
        ->check(CLI::IsMember({"detection", "recognition"}))
        ->capture_default_str();
    evalRender->add_flag("--csv", csv, "CSV output");

    // serve -----------------------------------------------------------------
    auto* serve = app.add_subcommand("serve", "Run the support server and console endpoints");
    std::string host = "0.0.0.0", upstream, tempDir;
    int port = 8080;
    long long cooldownMs = 2000;
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--port", port, "Listen port")->envname("PORT")->capture_default_str();
    serve->add_option("--cascade", cascadePath, "Cascade for /detect and /frame")->envname("CASCADE_PATH");
    serve->add_option("--upstream", upstream, "Support server used by the hosted pipeline when Online");
    serve->add_option("--temp-dir", tempDir, "Directory for temporary face captures");
    serve->add_option("--cooldown-ms", cooldownMs, "Delay between detections")->capture_default_str();
    storeOpts.add_to(serve, true);
    lbpOpts.add_to(serve);
    detectOpts.add_to(serve);

    // enroll / identify -----------------------------------------------------
    auto* enroll = app.add_subcommand("enroll", "Add a person to a local store or a support server");
    std::string name, notes, image, server;
    enroll->add_option("--name", name, "Display name")->required();
    enroll->add_option("--notes", notes, "Free-form notes");
    enroll->add_option("--image", image, "Face image (PGM)")->required();
    enroll->add_option("--server", server, "Support server URL instead of a local store");
    enroll->add_option("--cascade", cascadePath, "Detect and crop the largest face first");
    storeOpts.add_to(enroll, false);
    detectOpts.add_to(enroll);

    auto* identify = app.add_subcommand("identify", "Identify a face against a local store or a support server");
    identify->add_option("--image", image, "Face image (PGM)")->required();
    identify->add_option("--server", server, "Support server URL instead of a local store");
    identify->add_option("--cascade", cascadePath, "Detect and crop the largest face first");
    storeOpts.add_to(identify, false);
    lbpOpts.add_to(identify);
    detectOpts.add_to(identify);

    // cascade convert -------------------------------------------------------
    auto* cascadeCmd = app.add_subcommand("cascade", "Cascade model utilities");
    cascadeCmd->require_subcommand(1);
    auto* convert = cascadeCmd->add_subcommand("convert", "Convert a legacy XML cascade to native JSON");
    std::string input, output = "-";
    convert->add_option("input", input, "Legacy cascade XML")->required();
    convert->add_option("output", output, "Output JSON ('-' for stdout)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*evalDetect) {
            const CascadeModel cascade = load_cascade_file(cascadePath);
            std::vector<DetectionReport> reports;
            std::size_t slow = 0;
            for (const auto& file : annotationFiles) {
                const auto annotations = read_annotations(file);
                auto result = eval_detection(corpus, annotations, cascade, detectOpts.params(), iouThreshold,
                                             std::filesystem::path(file).stem().string());
                for (const auto& t : result.timings) {
                    if (showTimings) std::cerr << t.frame << '\t' << t.millis << " ms\n";
                    if (t.overBudget) {
                        ++slow;
                        std::cerr << "slow frame: " << t.frame << ' ' << t.millis << " ms (budget " << kFrameBudgetMs
                                  << " ms)\n";
                    }
                }
                reports.push_back(result.report);
            }
            print_reports(reports, csv);
            if (slow > 0) std::cerr << slow << " frame(s) over the " << kFrameBudgetMs << " ms budget\n";
        } else if (*evalRecognize) {
            const FaceStore store(storeOpts.config());
            const auto annotations = read_annotations(labelsFile);
            print_reports(eval_recognition(corpus, annotations, store, lbpOpts.params(), {requireKnown}), csv);
        } else if (*evalRender) {
            const json doc = json::parse(read_file(countsFile));
            if (kind == "detection")
                print_reports(detection_counts(doc), csv);
            else
                print_reports(recognition_counts(doc), csv);
        } else if (*serve) {
            ServerOptions opts;
            opts.store = storeOpts.config();
            if (!cascadePath.empty()) opts.cascade = std::make_shared<CascadeModel>(load_cascade_file(cascadePath));
            opts.lbp = lbpOpts.params();
            opts.detect = detectOpts.params();
            opts.pipeline.cooldownMs = cooldownMs;
            opts.pipeline.tempDirectory = tempDir;
            if (!upstream.empty()) opts.upstream = std::make_shared<HttpSupportClient>(upstream);
            SupportServer srv(std::move(opts));
            g_server = &srv;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on " << host << ":" << port << '\n';
            if (!srv.run(host, port)) {
                std::cerr << "error: cannot listen on " << host << ":" << port << '\n';
                return kExitError;
            }
            g_server = nullptr;
        } else if (*enroll) {
            const GrayImage face = load_face(image, cascadePath, detectOpts.params());
            if (!server.empty()) {
                HttpSupportClient client(server);
                std::cout << client.enroll(name, notes, face) << '\n';
            } else {
                if (storeOpts.dir.empty()) throw CLI::RequiredError("--store or --server");
                FaceStore store(storeOpts.config());
                std::cout << store.enroll(name, notes, face, now_millis()).id << '\n';
            }
        } else if (*identify) {
            const GrayImage face = load_face(image, cascadePath, detectOpts.params());
            RemoteIdentification result;
            if (!server.empty()) {
                HttpSupportClient client(server);
                result = client.identify(face);
            } else {
                if (storeOpts.dir.empty()) throw CLI::RequiredError("--store or --server");
                FaceStore store(storeOpts.config());
                if (!store.empty()) {
                    const PredictionResult p = predict(build_recognizer(store, lbpOpts.params()), face);
                    result.distance = p.distance;
                    if (p.isKnown) {
                        const PersonRecord person = store.record_usage(p.label, now_millis());
                        result.match = RemoteMatch{person.id, person.displayName, p.distance};
                    }
                }
            }
            std::cout << to_json(result).dump(2) << '\n';
        } else if (*convert) {
            const std::string text = save_cascade_json(parse_cascade_xml(read_file(input)));
            if (output == "-") {
                std::cout << text;
            } else {
                std::ofstream out(output, std::ios::binary);
                if (!out) throw std::runtime_error("cannot write " + output);
                out << text;
            }
        }
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return 0;
}
