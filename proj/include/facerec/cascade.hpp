#pragma once

// Boosted cascade of Haar-like threshold stumps with a multi-scale sliding
// window scan and rectangle grouping.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "facerec/imaging.hpp"

namespace facerec {

struct FeaturePart {
    Rect rect;  // window-relative, base window coordinates
    double weight = 0.0;

    friend bool operator==(const FeaturePart&, const FeaturePart&) = default;
};

struct HaarFeature {
    std::vector<FeaturePart> parts;  // 2 or 3

    friend bool operator==(const HaarFeature&, const HaarFeature&) = default;
};

struct WeakStump {
    HaarFeature feature;
    double threshold = 0.0;
    double leftValue = 0.0;   // taken when feature value < threshold
    double rightValue = 0.0;

    friend bool operator==(const WeakStump&, const WeakStump&) = default;
};

struct Stage {
    std::vector<WeakStump> stumps;
    double stageThreshold = 0.0;

    friend bool operator==(const Stage&, const Stage&) = default;
};

struct CascadeModel {
    int windowW = 0;
    int windowH = 0;
    std::vector<Stage> stages;

    friend bool operator==(const CascadeModel&, const CascadeModel&) = default;
};

class CascadeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws CascadeError on structural violations; returns soft warnings
/// (features whose weighted areas do not cancel).
std::vector<std::string> validate_cascade(const CascadeModel& model);

struct DetectParams {
    double scaleFactor = 1.1;
    int minNeighbors = 3;
    std::optional<Size> minSize;  // defaults to the model window
    double stepFraction = 0.05;
    double groupingEps = 0.2;
};

void validate_params(const DetectParams& params);

struct WindowStats {
    double mean = 0.0;
    double stddev = 1.0;
};

/// Mean and standard deviation of the window, stddev floored at 1.
WindowStats window_stats(const IntegralImage& ii, const Rect& window);

struct WindowVerdict {
    bool accepted = false;
    std::optional<std::size_t> rejectedAtStage;
};

WindowVerdict evaluate_window(const CascadeModel& model, const IntegralImage& ii, const Rect& window);

/// Every accepted window of the scan, sorted by (y, x, w, h). No grouping.
std::vector<Rect> detect_raw(const CascadeModel& model, const GrayImage& img, const DetectParams& params = {});

/// Grouped detections ordered by descending area, ties by (y, x).
std::vector<Rect> detect(const CascadeModel& model, const GrayImage& img, const DetectParams& params = {});

bool rects_similar(const Rect& a, const Rect& b, double eps);

std::vector<Rect> group_rectangles(std::span<const Rect> rects, int minNeighbors, double eps);

// Interchange formats.

/// Legacy Haar cascade XML (stump trees, untilted features only).
CascadeModel parse_cascade_xml(std::string_view text);

CascadeModel load_cascade_json(std::string_view text);
std::string save_cascade_json(const CascadeModel& model);

/// Loads by extension: ".xml" as legacy XML, anything else as native JSON.
CascadeModel load_cascade_file(const std::string& path);

}  // namespace facerec
