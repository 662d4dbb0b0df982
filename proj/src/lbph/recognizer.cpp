#include <algorithm>
#include <string>

#include "facerec/lbph.hpp"

namespace facerec {

FaceTemplate::FaceTemplate(int gridX, int gridY, std::vector<double> bins)
    : gridX_(gridX), gridY_(gridY), bins_(std::move(bins)) {
    if (gridX < 1 || gridY < 1) throw LbphError("template grid must be at least 1x1");
    if (bins_.size() != std::size_t(gridX) * gridY * kLbpBins)
        throw LbphError("template length " + std::to_string(bins_.size()) + " does not match grid " +
                        std::to_string(gridX) + "x" + std::to_string(gridY));
}

std::span<const double> FaceTemplate::region(int rx, int ry) const {
    return std::span<const double>(bins_).subspan((std::size_t(ry) * gridX_ + rx) * kLbpBins, kLbpBins);
}

FaceTemplate spatial_histogram(const GrayImage& codes, const LbpParams& params) {
    if (params.gridX < 1 || params.gridY < 1) throw LbphError("LBP grid must be at least 1x1");
    if (codes.width() < params.gridX || codes.height() < params.gridY)
        throw LbphError("code image smaller than the histogram grid");

    std::vector<double> bins(std::size_t(params.gridX) * params.gridY * kLbpBins, 0.0);
    std::vector<std::int64_t> counts(kLbpBins);
    for (int ry = 0; ry < params.gridY; ++ry) {
        const int y0 = int(std::int64_t(ry) * codes.height() / params.gridY);
        const int y1 = int(std::int64_t(ry + 1) * codes.height() / params.gridY);
        for (int rx = 0; rx < params.gridX; ++rx) {
            const int x0 = int(std::int64_t(rx) * codes.width() / params.gridX);
            const int x1 = int(std::int64_t(rx + 1) * codes.width() / params.gridX);
            std::fill(counts.begin(), counts.end(), 0);
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) ++counts[codes.at(x, y)];
            const double total = double(std::int64_t(x1 - x0) * (y1 - y0));
            double* out = bins.data() + (std::size_t(ry) * params.gridX + rx) * kLbpBins;
            for (int b = 0; b < kLbpBins; ++b) out[b] = double(counts[std::size_t(b)]) / total;
        }
    }
    return FaceTemplate(params.gridX, params.gridY, std::move(bins));
}

double chi_square_distance(const FaceTemplate& a, const FaceTemplate& b) {
    const auto x = a.bins();
    const auto y = b.bins();
    if (x.size() != y.size())
        throw LbphError("chi_square_distance: template lengths differ (" + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = x[i] + y[i];
        if (s > 0.0) {
            const double diff = x[i] - y[i];
            d += diff * diff / s;
        }
    }
    return d;
}

FaceTemplate extract_template(const GrayImage& face, const LbpParams& params) {
    validate_params(params);
    const GrayImage canonical = resize_bilinear(face, params.faceW, params.faceH);
    return spatial_histogram(lbp_image(canonical, params.convention), params);
}

RecognizerModel train(std::span<const LabeledFace> faces, const LbpParams& params) {
    if (faces.empty()) throw LbphError("train: no faces");
    validate_params(params);
    RecognizerModel model{params, {}};
    model.entries.reserve(faces.size());
    for (const LabeledFace& f : faces) model.entries.push_back({f.label, extract_template(f.image, params)});
    return model;
}

PredictionResult predict_template(const RecognizerModel& model, const FaceTemplate& probe) {
    if (model.entries.empty()) throw LbphError("predict: model has no entries");
    PredictionResult best;
    for (std::size_t i = 0; i < model.entries.size(); ++i) {
        const double d = chi_square_distance(model.entries[i].face, probe);
        if (i == 0 || d < best.distance) {
            best.label = model.entries[i].label;
            best.distance = d;
            best.entryIndex = i;
        }
    }
    best.isKnown = best.distance <= model.params.unknownThreshold;
    return best;
}

PredictionResult predict(const RecognizerModel& model, const GrayImage& face) {
    if (model.entries.empty()) throw LbphError("predict: model has no entries");
    return predict_template(model, extract_template(face, model.params));
}

}  // namespace facerec
