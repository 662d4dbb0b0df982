#pragma once

// Detection and recognition accuracy harness over frame corpora:
// a directory of PGM frames plus a JSON annotation list
//
//   [{"frame": "f001.pgm", "boxes": [{"x":..,"y":..,"w":..,"h":..}], "label": "person"}]

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "facerec/cascade.hpp"
#include "facerec/facestore.hpp"
#include "facerec/lbph.hpp"

namespace facerec {

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Annotation {
    std::string frame;
    std::vector<Rect> boxes;
    std::optional<std::string> label;
};

std::vector<Annotation> parse_annotations(std::string_view json);
std::vector<Annotation> read_annotations(const std::filesystem::path& path);

/// Throws EvalError naming the first annotation whose frame is missing.
void require_frames(const std::filesystem::path& corpusDir, std::span<const Annotation> annotations);

double iou(const Rect& a, const Rect& b);

struct Match {
    std::size_t detection;
    std::size_t truth;
    double iou;
};

/// Greedy one-to-one matching by descending IoU (ties by detection, then
/// truth index); only pairs with IoU >= threshold are considered.
std::vector<Match> greedy_match(std::span<const Rect> detections, std::span<const Rect> truths, double threshold);

struct DetectionReport {
    std::string id;
    int framesWithFaces = 0;
    int detections = 0;
    int correct = 0;
    int incorrect = 0;

    /// Percentage of correct detections; nullopt when nothing was detected.
    std::optional<double> accuracy() const;
};

struct RecognitionReport {
    std::string id;
    int experiments = 0;
    int correct = 0;
    int incorrect = 0;

    std::optional<double> accuracy() const;
};

/// Per-frame processing budget for the flagged performance check.
inline constexpr double kFrameBudgetMs = 400.0;

struct FrameTiming {
    std::string frame;
    double millis = 0.0;
    bool overBudget = false;
};

struct DetectionEvaluation {
    DetectionReport report;
    std::vector<FrameTiming> timings;
};

DetectionEvaluation eval_detection(const std::filesystem::path& corpusDir, std::span<const Annotation> annotations,
                                   const CascadeModel& cascade, const DetectParams& params,
                                   double iouThreshold = 0.5, std::string id = "corpus");

struct RecognitionOptions {
    /// Count a prediction as correct only when it is also within the
    /// recognizer's unknown threshold.
    bool requireKnown = false;
};

/// One report per person, in order of first appearance. Labels may name a
/// person id or a unique display name. Crops the first box when present,
/// otherwise uses the whole frame.
std::vector<RecognitionReport> eval_recognition(const std::filesystem::path& corpusDir,
                                                std::span<const Annotation> annotations, const FaceStore& store,
                                                const LbpParams& params, RecognitionOptions options = {});

/// "88.24" style, two decimals; "n/a" for nullopt.
std::string format_accuracy(std::optional<double> accuracy);

std::string render_table(std::span<const DetectionReport> reports);
std::string render_table(std::span<const RecognitionReport> reports);
std::string render_csv(std::span<const DetectionReport> reports);
std::string render_csv(std::span<const RecognitionReport> reports);

}  // namespace facerec
