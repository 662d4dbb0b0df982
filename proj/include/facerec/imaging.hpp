#pragma once

// Grayscale raster primitives shared by detection, recognition and storage.

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace facerec {

/// Axis-aligned rectangle in pixel coordinates. Bounds are checked where the
/// rectangle is applied to an image.
struct Rect {
    int x = 0;
    int y = 0;
    int w = 1;
    int h = 1;

    std::int64_t area() const { return std::int64_t(w) * h; }
    int right() const { return x + w; }
    int bottom() const { return y + h; }

    friend bool operator==(const Rect&, const Rect&) = default;
};

struct Size {
    int w = 0;
    int h = 0;
    friend bool operator==(const Size&, const Size&) = default;
};

class ImageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 8-bit single channel raster, row-major.
class GrayImage {
public:
    GrayImage(int width, int height, std::uint8_t fill = 0);
    GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

    int width() const { return width_; }
    int height() const { return height_; }
    Size size() const { return {width_, height_}; }

    std::uint8_t at(int x, int y) const { return pixels_[std::size_t(y) * width_ + x]; }
    std::uint8_t& at(int x, int y) { return pixels_[std::size_t(y) * width_ + x]; }

    std::span<const std::uint8_t> row(int y) const {
        return {pixels_.data() + std::size_t(y) * width_, std::size_t(width_)};
    }
    std::span<const std::uint8_t> pixels() const { return pixels_; }
    std::span<std::uint8_t> pixels() { return pixels_; }

    bool contains(const Rect& r) const;

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> pixels_;
};

/// Summed-area tables over a GrayImage, zero padded to (w+1) x (h+1).
class IntegralImage {
public:
    explicit IntegralImage(const GrayImage& img);

    /// Table dimensions (image size + 1).
    int width() const { return stride_; }
    int height() const { return rows_; }
    int image_width() const { return stride_ - 1; }
    int image_height() const { return rows_ - 1; }

    std::int64_t sum_at(int x, int y) const { return sums_[std::size_t(y) * stride_ + x]; }
    std::int64_t squared_sum_at(int x, int y) const { return squared_[std::size_t(y) * stride_ + x]; }

    bool contains(const Rect& r) const;

    /// Row-major tables with stride width().
    const std::int64_t* sums_data() const { return sums_.data(); }
    const std::int64_t* squared_data() const { return squared_.data(); }

    // Unchecked box sums; callers guarantee bounds.
    std::int64_t box_sum(int x, int y, int w, int h) const {
        const std::int64_t* top = sums_.data() + std::size_t(y) * stride_;
        const std::int64_t* bot = top + std::size_t(h) * stride_;
        return bot[x + w] - top[x + w] - bot[x] + top[x];
    }
    std::int64_t box_squared_sum(int x, int y, int w, int h) const {
        const std::int64_t* top = squared_.data() + std::size_t(y) * stride_;
        const std::int64_t* bot = top + std::size_t(h) * stride_;
        return bot[x + w] - top[x + w] - bot[x] + top[x];
    }

private:
    int stride_;
    int rows_;
    std::vector<std::int64_t> sums_;
    std::vector<std::int64_t> squared_;
};

IntegralImage integral(const GrayImage& img);

/// Sum of pixels inside r. Throws ImageError when r leaves the image.
std::int64_t rect_sum(const IntegralImage& ii, const Rect& r);
std::int64_t rect_squared_sum(const IntegralImage& ii, const Rect& r);

GrayImage crop(const GrayImage& img, const Rect& r);

/// Bilinear resampling with pixel-centre alignment, rounded to nearest.
GrayImage resize_bilinear(const GrayImage& img, int width, int height);

/// Rec.601 luma, rounded and clamped.
std::uint8_t rgb_to_gray(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// ---------------------------------------------------------------------------
// Binary PGM (P5)

enum class PgmErrorKind {
    BadMagic,
    BadHeader,
    BadMaxval,
    BadDimensions,
    Truncated,
};

class PgmError : public std::runtime_error {
public:
    PgmError(PgmErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    PgmErrorKind kind() const { return kind_; }

private:
    PgmErrorKind kind_;
};

/// Largest accepted PGM side; keeps integral tables well inside int64 range.
inline constexpr int kMaxImageSide = 16384;

GrayImage load_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> save_pgm(const GrayImage& img);

GrayImage read_pgm_file(const std::filesystem::path& path);
void write_pgm_file(const std::filesystem::path& path, const GrayImage& img);

}  // namespace facerec
