#pragma once

// Local Binary Patterns Histograms: 3x3 LBP codes, spatial histograms and a
// chi-square nearest-neighbour recognizer.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "facerec/imaging.hpp"

namespace facerec {

class LbphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bit polarity of an LBP code.
enum class LbpConvention {
    CenterAtLeastNeighbor,  // bit = 1 iff centre >= neighbour
    Complemented,           // bitwise complement of the above
};

struct LbpParams {
    int gridX = 8;
    int gridY = 8;
    int faceW = 100;
    int faceH = 100;
    double unknownThreshold = 0.5;
    LbpConvention convention = LbpConvention::CenterAtLeastNeighbor;  // not serialized
};

void validate_params(const LbpParams& params);

inline constexpr int kLbpBins = 256;

/// Concatenated, per-region normalized LBP histograms (row-major regions).
class FaceTemplate {
public:
    FaceTemplate() = default;
    FaceTemplate(int gridX, int gridY, std::vector<double> bins);

    int grid_x() const { return gridX_; }
    int grid_y() const { return gridY_; }
    std::span<const double> bins() const { return bins_; }
    std::span<const double> region(int rx, int ry) const;

    friend bool operator==(const FaceTemplate&, const FaceTemplate&) = default;

private:
    int gridX_ = 0;
    int gridY_ = 0;
    std::vector<double> bins_;
};

/// Code of the 3x3 neighbourhood centred on (x, y). Neighbours are visited
/// clockwise from the top-left; the first visited neighbour is the most
/// significant bit.
std::uint8_t lbp_code(const GrayImage& img, int x, int y,
                      LbpConvention convention = LbpConvention::CenterAtLeastNeighbor);

/// (w-2) x (h-2) image of codes for every interior pixel.
GrayImage lbp_image(const GrayImage& img, LbpConvention convention = LbpConvention::CenterAtLeastNeighbor);

FaceTemplate spatial_histogram(const GrayImage& codes, const LbpParams& params);

/// Symmetric chi-square: sum of (a-b)^2/(a+b) over bins where a+b > 0.
double chi_square_distance(const FaceTemplate& a, const FaceTemplate& b);

FaceTemplate extract_template(const GrayImage& face, const LbpParams& params);

struct RecognizerEntry {
    std::string label;
    FaceTemplate face;
};

struct RecognizerModel {
    LbpParams params;
    std::vector<RecognizerEntry> entries;
};

struct PredictionResult {
    std::string label;
    double distance = 0.0;
    bool isKnown = false;
    std::size_t entryIndex = 0;
};

struct LabeledFace {
    GrayImage image;
    std::string label;
};

RecognizerModel train(std::span<const LabeledFace> faces, const LbpParams& params);

PredictionResult predict(const RecognizerModel& model, const GrayImage& face);
PredictionResult predict_template(const RecognizerModel& model, const FaceTemplate& probe);

std::string save_model_json(const RecognizerModel& model);
RecognizerModel load_model_json(std::string_view text);

}  // namespace facerec
