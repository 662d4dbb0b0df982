#include <array>
#include <string>

#include "facerec/lbph.hpp"

namespace facerec {

namespace {

// (dy, dx), clockwise from the top-left neighbour.
constexpr std::array<std::array<int, 2>, 8> kNeighbours{{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1},
}};

inline std::uint8_t code_unchecked(const GrayImage& img, int x, int y, LbpConvention convention) {
    const std::uint8_t centre = img.at(x, y);
    unsigned code = 0;
    for (const auto& [dy, dx] : kNeighbours) code = (code << 1) | (centre >= img.at(x + dx, y + dy) ? 1u : 0u);
    if (convention == LbpConvention::Complemented) code = ~code & 0xFFu;
    return std::uint8_t(code);
}

}  // namespace

void validate_params(const LbpParams& params) {
    if (params.gridX < 1 || params.gridY < 1) throw LbphError("LBP grid must be at least 1x1");
    if (params.faceW < params.gridX + 2 || params.faceH < params.gridY + 2)
        throw LbphError("canonical face size must exceed the grid by 2 pixels");
    if (!(params.unknownThreshold >= 0.0)) throw LbphError("unknownThreshold must be >= 0");
}

std::uint8_t lbp_code(const GrayImage& img, int x, int y, LbpConvention convention) {
    if (x < 1 || y < 1 || x > img.width() - 2 || y > img.height() - 2)
        throw LbphError("lbp_code: (" + std::to_string(x) + "," + std::to_string(y) + ") is on the border");
    return code_unchecked(img, x, y, convention);
}

GrayImage lbp_image(const GrayImage& img, LbpConvention convention) {
    if (img.width() < 3 || img.height() < 3) throw LbphError("lbp_image: image must be at least 3x3");
    GrayImage out(img.width() - 2, img.height() - 2);
    for (int y = 1; y < img.height() - 1; ++y)
        for (int x = 1; x < img.width() - 1; ++x) out.at(x - 1, y - 1) = code_unchecked(img, x, y, convention);
    return out;
}

}  // namespace facerec
