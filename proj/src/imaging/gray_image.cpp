#include "facerec/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace facerec {

namespace {

void require_dimensions(int width, int height) {
    if (width < 1 || height < 1)
        throw ImageError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                         std::to_string(height));
}

void require_inside(const GrayImage& img, const Rect& r) {
    if (!img.contains(r))
        throw ImageError("rect (" + std::to_string(r.x) + "," + std::to_string(r.y) + "," +
                         std::to_string(r.w) + "," + std::to_string(r.h) + ") outside " +
                         std::to_string(img.width()) + "x" + std::to_string(img.height()) + " image");
}

}  // namespace

GrayImage::GrayImage(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
    require_dimensions(width, height);
    pixels_.assign(std::size_t(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    require_dimensions(width, height);
    if (pixels_.size() != std::size_t(width) * height)
        throw ImageError("pixel count " + std::to_string(pixels_.size()) + " does not match " +
                         std::to_string(width) + "x" + std::to_string(height));
}

bool GrayImage::contains(const Rect& r) const {
    return r.x >= 0 && r.y >= 0 && r.w >= 1 && r.h >= 1 && r.x <= width_ - r.w && r.y <= height_ - r.h;
}

GrayImage crop(const GrayImage& img, const Rect& r) {
    require_inside(img, r);
    std::vector<std::uint8_t> out;
    out.reserve(std::size_t(r.area()));
    for (int j = 0; j < r.h; ++j) {
        auto src = img.row(r.y + j).subspan(std::size_t(r.x), std::size_t(r.w));
        out.insert(out.end(), src.begin(), src.end());
    }
    return GrayImage(r.w, r.h, std::move(out));
}

GrayImage resize_bilinear(const GrayImage& img, int width, int height) {
    require_dimensions(width, height);
    if (width == img.width() && height == img.height()) return img;

    // Fixed-point weights out of kOne per axis keep the arithmetic exact, so
    // adding a constant to the source adds it to every output pixel.
    constexpr std::int64_t kOne = 1 << 11;
    struct Tap {
        int lo;
        int hi;
        std::int64_t wHi;
    };
    auto taps = [](int src, int dst) {
        std::vector<Tap> t(static_cast<std::size_t>(dst));
        const double scale = double(src) / dst;
        for (int d = 0; d < dst; ++d) {
            double s = (d + 0.5) * scale - 0.5;
            s = std::clamp(s, 0.0, double(src - 1));
            const int lo = int(std::floor(s));
            t[std::size_t(d)] = {lo, std::min(lo + 1, src - 1), std::llround((s - lo) * kOne)};
        }
        return t;
    };
    const auto xs = taps(img.width(), width);
    const auto ys = taps(img.height(), height);

    GrayImage out(width, height);
    constexpr std::int64_t kHalf = kOne * kOne / 2;
    for (int y = 0; y < height; ++y) {
        const Tap& ty = ys[std::size_t(y)];
        for (int x = 0; x < width; ++x) {
            const Tap& tx = xs[std::size_t(x)];
            const std::int64_t top = img.at(tx.lo, ty.lo) * (kOne - tx.wHi) + img.at(tx.hi, ty.lo) * tx.wHi;
            const std::int64_t bot = img.at(tx.lo, ty.hi) * (kOne - tx.wHi) + img.at(tx.hi, ty.hi) * tx.wHi;
            const std::int64_t v = top * (kOne - ty.wHi) + bot * ty.wHi;
            out.at(x, y) = std::uint8_t(std::clamp<std::int64_t>((v + kHalf) / (kOne * kOne), 0, 255));
        }
    }
    return out;
}

std::uint8_t rgb_to_gray(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    return std::uint8_t(std::clamp<long>(std::lround(y), 0, 255));
}

}  // namespace facerec
