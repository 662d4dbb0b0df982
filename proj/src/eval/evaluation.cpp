#include <algorithm>
#include <chrono>
#include <map>

#include "facerec/eval.hpp"

namespace facerec {

double iou(const Rect& a, const Rect& b) {
    const int ix = std::max(0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
    const int iy = std::max(0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
    const double inter = double(ix) * iy;
    const double uni = double(a.area()) + double(b.area()) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<Match> greedy_match(std::span<const Rect> detections, std::span<const Rect> truths, double threshold) {
    std::vector<Match> candidates;
    for (std::size_t d = 0; d < detections.size(); ++d)
        for (std::size_t t = 0; t < truths.size(); ++t)
            if (const double v = iou(detections[d], truths[t]); v >= threshold) candidates.push_back({d, t, v});
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Match& a, const Match& b) { return a.iou > b.iou; });

    std::vector<bool> usedDet(detections.size()), usedTruth(truths.size());
    std::vector<Match> out;
    for (const Match& m : candidates) {
        if (usedDet[m.detection] || usedTruth[m.truth]) continue;
        usedDet[m.detection] = usedTruth[m.truth] = true;
        out.push_back(m);
    }
    return out;
}

namespace {
std::optional<double> percent(int correct, int total) {
    if (total == 0) return std::nullopt;
    return 100.0 * correct / total;
}
}  // namespace

std::optional<double> DetectionReport::accuracy() const { return percent(correct, detections); }
std::optional<double> RecognitionReport::accuracy() const { return percent(correct, experiments); }

DetectionEvaluation eval_detection(const std::filesystem::path& corpusDir, std::span<const Annotation> annotations,
                                   const CascadeModel& cascade, const DetectParams& params, double iouThreshold,
                                   std::string id) {
    require_frames(corpusDir, annotations);
    DetectionEvaluation out;
    out.report.id = std::move(id);
    for (const Annotation& a : annotations) {
        const GrayImage frame = read_pgm_file(corpusDir / a.frame);
        const auto start = std::chrono::steady_clock::now();
        std::vector<Rect> found;
        if (frame.width() >= cascade.windowW && frame.height() >= cascade.windowH)
            found = detect(cascade, frame, params);
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        out.timings.push_back({a.frame, ms, ms > kFrameBudgetMs});

        const int correct = int(greedy_match(found, a.boxes, iouThreshold).size());
        if (!a.boxes.empty()) ++out.report.framesWithFaces;
        out.report.detections += int(found.size());
        out.report.correct += correct;
        out.report.incorrect += int(found.size()) - correct;
    }
    return out;
}

std::vector<RecognitionReport> eval_recognition(const std::filesystem::path& corpusDir,
                                                std::span<const Annotation> annotations, const FaceStore& store,
                                                const LbpParams& params, RecognitionOptions options) {
    require_frames(corpusDir, annotations);
    const auto records = store.records();

    // Resolve each label to a person id: exact id first, then unique name.
    auto resolve = [&](const std::string& label) -> std::string {
        for (const PersonRecord& r : records)
            if (r.id == label) return r.id;
        std::optional<std::string> found;
        for (const PersonRecord& r : records) {
            if (r.displayName != label) continue;
            if (found) throw EvalError("label '" + label + "' matches more than one enrolled person");
            found = r.id;
        }
        if (!found) throw EvalError("label '" + label + "' is not enrolled in the store");
        return *found;
    };

    std::vector<RecognitionReport> reports;
    std::map<std::string, std::size_t> index;
    std::vector<std::pair<const Annotation*, std::string>> work;
    for (const Annotation& a : annotations) {
        if (!a.label) continue;
        const std::string personId = resolve(*a.label);
        work.emplace_back(&a, personId);
        // One row per person, named by the first label that referred to them.
        if (index.emplace(personId, reports.size()).second) reports.push_back({*a.label, 0, 0, 0});
    }
    if (work.empty()) return reports;

    const RecognizerModel model = build_recognizer(store, params);
    for (const auto& [a, personId] : work) {
        GrayImage frame = read_pgm_file(corpusDir / a->frame);
        const GrayImage face = a->boxes.empty() ? std::move(frame) : crop(frame, a->boxes.front());
        const PredictionResult p = predict(model, face);
        const bool ok = p.label == personId && (!options.requireKnown || p.isKnown);
        RecognitionReport& r = reports[index.at(personId)];
        ++r.experiments;
        ++(ok ? r.correct : r.incorrect);
    }
    return reports;
}

}  // namespace facerec
