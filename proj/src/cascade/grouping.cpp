#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <tuple>

#include "facerec/cascade.hpp"

namespace facerec {

bool rects_similar(const Rect& a, const Rect& b, double eps) {
    const double delta = eps * 0.5 * (a.w + b.w);
    return std::abs(a.x - b.x) <= delta && std::abs(a.y - b.y) <= delta &&
           std::abs(a.right() - b.right()) <= delta && std::abs(a.bottom() - b.bottom()) <= delta;
}

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t i) {
        while (parent_[i] != i) {
            parent_[i] = parent_[parent_[i]];
            i = parent_[i];
        }
        return i;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<Rect> group_rectangles(std::span<const Rect> rects, int minNeighbors, double eps) {
    const std::size_t n = rects.size();
    DisjointSets sets(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rects_similar(rects[i], rects[j], eps)) sets.unite(i, j);

    struct Accum {
        std::int64_t x = 0, y = 0, w = 0, h = 0, count = 0;
    };
    std::vector<Accum> acc(n);
    for (std::size_t i = 0; i < n; ++i) {
        Accum& a = acc[sets.find(i)];
        a.x += rects[i].x;
        a.y += rects[i].y;
        a.w += rects[i].w;
        a.h += rects[i].h;
        ++a.count;
    }

    const std::int64_t keep = std::max(1, minNeighbors);
    std::vector<Rect> out;
    for (const Accum& a : acc) {
        if (a.count == 0 || a.count < keep) continue;
        const double c = double(a.count);
        out.push_back({int(std::lround(a.x / c)), int(std::lround(a.y / c)), int(std::lround(a.w / c)),
                       int(std::lround(a.h / c))});
    }
    std::sort(out.begin(), out.end(), [](const Rect& a, const Rect& b) {
        if (a.area() != b.area()) return a.area() > b.area();
        return std::tie(a.y, a.x, a.w, a.h) < std::tie(b.y, b.x, b.w, b.h);
    });
    return out;
}

}  // namespace facerec
