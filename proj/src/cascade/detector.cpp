#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <tuple>
#include <type_traits>
#include <vector>

#include "facerec/cascade.hpp"

namespace facerec {

namespace {

// Cascade resolved for one window size and integral-table stride: every
// feature rect becomes four corner offsets from the window's top-left table
// entry. Two-rect features carry a zero-weight third part, which the
// evaluator skips.
struct ScaledPart {
    std::ptrdiff_t tl, tr, bl, br;
    double weight;
};

struct ScaledStump {
    ScaledPart parts[3];
    double threshold;
    // Outside [below, above] the reciprocal product decides the comparison
    // the same way the exact quotient would.
    double below, above;
    double values[2];  // [rightValue, leftValue], indexed by (f < threshold)
};

struct ScaledStage {
    std::uint32_t firstStump, stumpCount;
    double stageThreshold;
};

struct ScaledCascade {
    int windowW, windowH;
    std::ptrdiff_t stride;
    std::vector<ScaledStump> stumps;
    std::vector<ScaledStage> stages;
};

// raw * (1 / norm) is within 4 ulp of the correctly rounded raw / norm.
constexpr double kQuotientSlack = 1e-15;
constexpr double kTiny = 1e-300;

int scale_coord(int v, double s) { return int(std::lround(v * s)); }

ScaledCascade scale_cascade(const CascadeModel& model, int windowW, int windowH, int stride) {
    const double s = double(windowW) / model.windowW;
    ScaledCascade out{windowW, windowH, stride, {}, {}};
    for (const Stage& stage : model.stages) {
        out.stages.push_back({std::uint32_t(out.stumps.size()), std::uint32_t(stage.stumps.size()), stage.stageThreshold});
        for (const WeakStump& stump : stage.stumps) {
            const double margin = kQuotientSlack * std::abs(stump.threshold) + kTiny;
            ScaledStump scaled{{}, stump.threshold, stump.threshold - margin, stump.threshold + margin,
                               {stump.rightValue, stump.leftValue}};
            const auto& parts = stump.feature.parts;
            if (parts.size() > 3) throw CascadeError("feature has more than 3 rects");
            for (std::size_t i = 0; i < parts.size(); ++i) {
                const FeaturePart& p = parts[i];
                // Multiply then round each coordinate; clamp the rounding
                // overshoot back inside the window.
                const int x = std::clamp(scale_coord(p.rect.x, s), 0, windowW - 1);
                const int y = std::clamp(scale_coord(p.rect.y, s), 0, windowH - 1);
                const int w = std::clamp(scale_coord(p.rect.w, s), 1, windowW - x);
                const int h = std::clamp(scale_coord(p.rect.h, s), 1, windowH - y);
                const std::ptrdiff_t top = std::ptrdiff_t(y) * stride, bottom = std::ptrdiff_t(y + h) * stride;
                scaled.parts[i] = {top + x, top + x + w, bottom + x, bottom + x + w, p.weight};
            }
            out.stumps.push_back(scaled);
        }
    }
    return out;
}

WindowStats stats_unchecked(const IntegralImage& ii, int x, int y, int w, int h) {
    const double area = double(w) * h;
    const double mean = double(ii.box_sum(x, y, w, h)) / area;
    const double var = double(ii.box_squared_sum(x, y, w, h)) / area - mean * mean;
    return {mean, std::sqrt(std::max(var, 1.0))};
}

// Rect sums are read from a table of T. A 32-bit copy of the sums table is
// exact whenever the whole-image total fits: unsigned wraparound in the
// four-corner difference cancels because the true rect sum is in range.
template <typename T>
std::int64_t corner_sum(const T* origin, const ScaledPart& p) {
    using U = std::make_unsigned_t<T>;
    return std::int64_t(T(U(origin[p.br]) - U(origin[p.tr]) - U(origin[p.bl]) + U(origin[p.tl])));
}

// Decides raw / norm < threshold exactly as the division would, dividing
// only when the reciprocal product lands too close to call.
inline bool below_threshold(const ScaledStump& t, double raw, double norm, double inv) {
    const double q = raw * inv;
    const bool below = q < t.below;
    const bool above = q > t.above;
    if (!(below | above)) [[unlikely]]
        return raw / norm < t.threshold;
    return below;
}

template <typename T>
WindowVerdict run_cascade(const ScaledCascade& sc, const IntegralImage& ii, const T* table, int x, int y) {
    const WindowStats st = stats_unchecked(ii, x, y, sc.windowW, sc.windowH);
    const double norm = double(sc.windowW) * sc.windowH * st.stddev;
    const double inv = 1.0 / norm;
    const T* origin = table + std::ptrdiff_t(y) * sc.stride + x;
    const ScaledStump* stumps = sc.stumps.data();
    for (std::size_t i = 0; i < sc.stages.size(); ++i) {
        const ScaledStage& stage = sc.stages[i];
        double stageSum = 0.0;
        for (const ScaledStump* t = stumps + stage.firstStump, *tEnd = t + stage.stumpCount; t != tEnd; ++t) {
            double raw = t->parts[0].weight * double(corner_sum(origin, t->parts[0]));
            raw += t->parts[1].weight * double(corner_sum(origin, t->parts[1]));
            if (t->parts[2].weight != 0.0) raw += t->parts[2].weight * double(corner_sum(origin, t->parts[2]));
            stageSum += t->values[below_threshold(*t, raw, norm, inv)];
        }
        if (stageSum < stage.stageThreshold) return {false, i};
    }
    return {true, std::nullopt};
}

void require_window(const IntegralImage& ii, const Rect& window) {
    if (!ii.contains(window))
        throw CascadeError("window (" + std::to_string(window.x) + "," + std::to_string(window.y) + "," +
                           std::to_string(window.w) + "," + std::to_string(window.h) + ") outside image");
}

}  // namespace

std::vector<std::string> validate_cascade(const CascadeModel& model) {
    if (model.windowW < 1 || model.windowH < 1) throw CascadeError("cascade window must be at least 1x1");
    if (model.stages.empty()) throw CascadeError("cascade has no stages");
    std::vector<std::string> warnings;
    for (std::size_t si = 0; si < model.stages.size(); ++si) {
        const Stage& stage = model.stages[si];
        if (stage.stumps.empty()) throw CascadeError("stage " + std::to_string(si) + " has no stumps");
        for (std::size_t ti = 0; ti < stage.stumps.size(); ++ti) {
            const WeakStump& stump = stage.stumps[ti];
            const std::string where = "stage " + std::to_string(si) + " stump " + std::to_string(ti);
            if (stump.leftValue == stump.rightValue) throw CascadeError(where + ": constant stump");
            const auto& parts = stump.feature.parts;
            if (parts.size() < 2 || parts.size() > 3)
                throw CascadeError(where + ": feature needs 2 or 3 rects, has " + std::to_string(parts.size()));
            double balance = 0.0;
            double largest = 0.0;
            for (const FeaturePart& p : parts) {
                const Rect& r = p.rect;
                if (r.x < 0 || r.y < 0 || r.w < 1 || r.h < 1 || r.right() > model.windowW ||
                    r.bottom() > model.windowH)
                    throw CascadeError(where + ": feature rect outside " + std::to_string(model.windowW) + "x" +
                                       std::to_string(model.windowH) + " window");
                const double term = p.weight * double(r.area());
                balance += term;
                largest = std::max(largest, std::abs(term));
            }
            if (std::abs(balance) > 0.05 * largest)
                warnings.push_back(where + ": weighted feature areas do not cancel (sum " + std::to_string(balance) +
                                   ")");
        }
    }
    return warnings;
}

void validate_params(const DetectParams& params) {
    if (!(params.scaleFactor > 1.0)) throw CascadeError("scaleFactor must be > 1");
    if (params.minNeighbors < 0) throw CascadeError("minNeighbors must be >= 0");
    if (!(params.stepFraction > 0.0 && params.stepFraction <= 1.0))
        throw CascadeError("stepFraction must be in (0, 1]");
    if (!(params.groupingEps >= 0.0)) throw CascadeError("groupingEps must be >= 0");
    if (params.minSize && (params.minSize->w < 1 || params.minSize->h < 1))
        throw CascadeError("minSize must be positive");
}

WindowStats window_stats(const IntegralImage& ii, const Rect& window) {
    require_window(ii, window);
    return stats_unchecked(ii, window.x, window.y, window.w, window.h);
}

WindowVerdict evaluate_window(const CascadeModel& model, const IntegralImage& ii, const Rect& window) {
    require_window(ii, window);
    // Width and height are each rounded from the same scale, so their ratios
    // to the model window may differ by half a pixel in each dimension.
    const double slack = 0.5 / model.windowW + 0.5 / model.windowH + 1e-12;
    if (std::abs(double(window.w) / model.windowW - double(window.h) / model.windowH) > slack)
        throw CascadeError("window aspect does not match the cascade window");
    return run_cascade(scale_cascade(model, window.w, window.h, ii.width()), ii, ii.sums_data(), window.x, window.y);
}

std::vector<Rect> detect_raw(const CascadeModel& model, const GrayImage& img, const DetectParams& params) {
    validate_params(params);
    if (img.width() < model.windowW || img.height() < model.windowH)
        throw CascadeError("image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                           " smaller than cascade window " + std::to_string(model.windowW) + "x" +
                           std::to_string(model.windowH));
    const Size minSize = params.minSize.value_or(Size{model.windowW, model.windowH});
    const IntegralImage ii(img);

    // Narrow copy of the sums table when the image total fits in 32 bits;
    // halves the memory the stump loop walks.
    std::vector<std::int32_t> narrow;
    const std::size_t cells = std::size_t(ii.width()) * std::size_t(ii.height());
    if (ii.sums_data()[cells - 1] <= std::numeric_limits<std::int32_t>::max())
        narrow.assign(ii.sums_data(), ii.sums_data() + cells);

    std::vector<Rect> hits;
    int previousW = -1;
    for (double s = 1.0;; s *= params.scaleFactor) {
        const int ww = int(std::lround(model.windowW * s));
        const int wh = int(std::lround(model.windowH * s));
        if (ww > img.width() || wh > img.height()) break;
        if (ww < minSize.w || wh < minSize.h || ww == previousW) continue;
        previousW = ww;

        const ScaledCascade sc = scale_cascade(model, ww, wh, ii.width());
        const int step = std::max(1, int(std::lround(params.stepFraction * ww)));
        for (int y = 0; y + wh <= img.height(); y += step)
            for (int x = 0; x + ww <= img.width(); x += step)
                if (narrow.empty() ? run_cascade(sc, ii, ii.sums_data(), x, y).accepted
                                   : run_cascade(sc, ii, narrow.data(), x, y).accepted)
                    hits.push_back({x, y, ww, wh});
    }
    std::sort(hits.begin(), hits.end(), [](const Rect& a, const Rect& b) {
        return std::tie(a.y, a.x, a.w, a.h) < std::tie(b.y, b.x, b.w, b.h);
    });
    return hits;
}

std::vector<Rect> detect(const CascadeModel& model, const GrayImage& img, const DetectParams& params) {
    const auto hits = detect_raw(model, img, params);
    return group_rectangles(hits, params.minNeighbors, params.groupingEps);
}

}  // namespace facerec
