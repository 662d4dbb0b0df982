#include "facerec/imaging.hpp"

#include <string>

namespace facerec {

IntegralImage::IntegralImage(const GrayImage& img)
    : stride_(img.width() + 1), rows_(img.height() + 1) {
    const std::size_t n = std::size_t(stride_) * rows_;
    sums_.assign(n, 0);
    squared_.assign(n, 0);
    for (int y = 0; y < img.height(); ++y) {
        std::int64_t row_sum = 0;
        std::int64_t row_sq = 0;
        const auto src = img.row(y);
        const std::size_t above = std::size_t(y) * stride_;
        const std::size_t here = above + stride_;
        for (int x = 0; x < img.width(); ++x) {
            const std::int64_t v = src[std::size_t(x)];
            row_sum += v;
            row_sq += v * v;
            sums_[here + x + 1] = sums_[above + x + 1] + row_sum;
            squared_[here + x + 1] = squared_[above + x + 1] + row_sq;
        }
    }
}

bool IntegralImage::contains(const Rect& r) const {
    return r.x >= 0 && r.y >= 0 && r.w >= 1 && r.h >= 1 && r.x <= image_width() - r.w &&
           r.y <= image_height() - r.h;
}

IntegralImage integral(const GrayImage& img) { return IntegralImage(img); }

namespace {
void require_inside(const IntegralImage& ii, const Rect& r) {
    if (!ii.contains(r))
        throw ImageError("rect (" + std::to_string(r.x) + "," + std::to_string(r.y) + "," +
                         std::to_string(r.w) + "," + std::to_string(r.h) + ") outside integral image");
}
}  // namespace

std::int64_t rect_sum(const IntegralImage& ii, const Rect& r) {
    require_inside(ii, r);
    return ii.box_sum(r.x, r.y, r.w, r.h);
}

std::int64_t rect_squared_sum(const IntegralImage& ii, const Rect& r) {
    require_inside(ii, r);
    return ii.box_squared_sum(r.x, r.y, r.w, r.h);
}

}  // namespace facerec
