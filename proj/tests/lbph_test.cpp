#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "facerec/lbph.hpp"
#include "fixtures.hpp"

using namespace facerec;
using facerec::testing::Rng;

namespace {

// Eight explicit comparisons, most significant first.
int oracle_code(const GrayImage& img, int x, int y) {
    const int c = img.at(x, y);
    const int n[8] = {img.at(x - 1, y - 1), img.at(x, y - 1), img.at(x + 1, y - 1), img.at(x + 1, y),
                      img.at(x + 1, y + 1), img.at(x, y + 1), img.at(x - 1, y + 1), img.at(x - 1, y)};
    int code = 0;
    for (int v : n) code = code * 2 + (c >= v ? 1 : 0);
    return code;
}

std::vector<double> oracle_histogram(const GrayImage& codes, int gx, int gy) {
    std::vector<double> out;
    for (int ry = 0; ry < gy; ++ry)
        for (int rx = 0; rx < gx; ++rx) {
            const int x0 = rx * codes.width() / gx, x1 = (rx + 1) * codes.width() / gx;
            const int y0 = ry * codes.height() / gy, y1 = (ry + 1) * codes.height() / gy;
            std::vector<double> h(256, 0.0);
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) h[codes.at(x, y)] += 1.0;
            const double n = double(x1 - x0) * (y1 - y0);
            for (double& v : h) out.push_back(v / n);
        }
    return out;
}

LbpParams small_params(LbpConvention conv = LbpConvention::CenterAtLeastNeighbor) {
    LbpParams p;
    p.gridX = 4;
    p.gridY = 4;
    p.faceW = 40;
    p.faceH = 40;
    p.convention = conv;
    return p;
}

FaceTemplate random_template(Rng& rng, int gx, int gy) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> bins(std::size_t(gx * gy * kLbpBins));
    for (int r = 0; r < gx * gy; ++r) {
        double s = 0;
        for (int b = 0; b < kLbpBins; ++b) {
            const double v = u(rng) < 0.7 ? 0.0 : u(rng);
            bins[std::size_t(r * kLbpBins + b)] = v;
            s += v;
        }
        if (s == 0) {
            bins[std::size_t(r * kLbpBins)] = 1;
            s = 1;
        }
        for (int b = 0; b < kLbpBins; ++b) bins[std::size_t(r * kLbpBins + b)] /= s;
    }
    return FaceTemplate(gx, gy, std::move(bins));
}

}  // namespace

TEST_CASE("lbp_code examples") {
    CHECK(lbp_code(GrayImage(3, 3, 90), 1, 1) == 255);

    GrayImage pit(3, 3, 255);
    pit.at(1, 1) = 0;
    CHECK(lbp_code(pit, 1, 1) == 0);

    const GrayImage patch(3, 3, std::vector<std::uint8_t>{10, 20, 30, 40, 50, 60, 70, 80, 90});
    CHECK(lbp_code(patch, 1, 1) == 225);
    CHECK(lbp_code(patch, 1, 1, LbpConvention::Complemented) == 30);

    CHECK_THROWS_AS(lbp_code(patch, 0, 1), LbphError);
    CHECK_THROWS_AS(lbp_code(patch, 1, 2), LbphError);
}

TEST_CASE("lbp_image") {
    CHECK(lbp_image(GrayImage(3, 3, 1)).size() == Size{1, 1});
    const GrayImage flat = lbp_image(GrayImage(9, 7, 33));
    for (auto v : flat.pixels()) CHECK(v == 255);
    CHECK_THROWS_AS(lbp_image(GrayImage(2, 5, 0)), LbphError);

    Rng rng(1);
    for (int i = 0; i < 60; ++i) {
        const GrayImage img = testing::random_image(rng, 3 + int(rng() % 40), 3 + int(rng() % 40));
        const GrayImage codes = lbp_image(img);
        REQUIRE(codes.width() == img.width() - 2);
        REQUIRE(codes.height() == img.height() - 2);
        const GrayImage comp = lbp_image(img, LbpConvention::Complemented);
        for (int y = 0; y < codes.height(); ++y)
            for (int x = 0; x < codes.width(); ++x) {
                REQUIRE(codes.at(x, y) == oracle_code(img, x + 1, y + 1));
                REQUIRE(comp.at(x, y) == 255 - oracle_code(img, x + 1, y + 1));
            }
    }
}

TEST_CASE("spatial_histogram") {
    SUBCASE("constant codes give one-hot regions") {
        LbpParams p;
        p.gridX = 3;
        p.gridY = 2;
        const FaceTemplate t = spatial_histogram(GrayImage(10, 7, 42), p);
        CHECK(t.bins().size() == 6 * 256);
        for (int ry = 0; ry < 2; ++ry)
            for (int rx = 0; rx < 3; ++rx) {
                const auto r = t.region(rx, ry);
                for (int b = 0; b < 256; ++b) CHECK(r[std::size_t(b)] == (b == 42 ? 1.0 : 0.0));
            }
    }
    SUBCASE("1x1 grid is the plain normalized histogram") {
        LbpParams p;
        p.gridX = p.gridY = 1;
        const GrayImage codes(2, 2, std::vector<std::uint8_t>{1, 1, 1, 200});
        const FaceTemplate t = spatial_histogram(codes, p);
        CHECK(t.bins()[1] == 0.75);
        CHECK(t.bins()[200] == 0.25);
    }
    SUBCASE("too small") {
        LbpParams p;
        CHECK_THROWS_AS(spatial_histogram(GrayImage(7, 20, 0), p), LbphError);
    }
    SUBCASE("matches the region/count oracle, regions sum to one") {
        Rng rng(2);
        for (int i = 0; i < 60; ++i) {
            LbpParams p;
            p.gridX = 1 + int(rng() % 9);
            p.gridY = 1 + int(rng() % 9);
            const GrayImage codes = testing::random_image(rng, p.gridX + int(rng() % 50), p.gridY + int(rng() % 50));
            const FaceTemplate t = spatial_histogram(codes, p);
            const auto want = oracle_histogram(codes, p.gridX, p.gridY);
            REQUIRE(std::vector<double>(t.bins().begin(), t.bins().end()) == want);
            for (int ry = 0; ry < p.gridY; ++ry)
                for (int rx = 0; rx < p.gridX; ++rx) {
                    const auto r = t.region(rx, ry);
                    REQUIRE(std::accumulate(r.begin(), r.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
                }
        }
    }
}

TEST_CASE("chi_square_distance") {
    LbpParams p;
    p.gridX = p.gridY = 1;
    const FaceTemplate a = spatial_histogram(GrayImage(3, 3, 4), p);
    const FaceTemplate b = spatial_histogram(GrayImage(3, 3, 9), p);
    CHECK(chi_square_distance(a, a) == 0.0);
    CHECK(chi_square_distance(a, b) == 2.0);

    LbpParams q;
    q.gridX = 2;
    q.gridY = 1;
    CHECK_THROWS_AS(chi_square_distance(a, spatial_histogram(GrayImage(3, 3, 4), q)), LbphError);

    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const FaceTemplate x = random_template(rng, 2, 2), y = random_template(rng, 2, 2);
        const double d = chi_square_distance(x, y);
        REQUIRE(d >= 0.0);
        REQUIRE(d == chi_square_distance(y, x));
        REQUIRE(chi_square_distance(x, x) == 0.0);
        REQUIRE(d > 1e-12);
    }
}

TEST_CASE("extract_template") {
    LbpParams p;
    const FaceTemplate t = extract_template(GrayImage(37, 51, 120), p);
    CHECK(t.bins().size() == 16384);
    for (int ry = 0; ry < p.gridY; ++ry)
        for (int rx = 0; rx < p.gridX; ++rx) CHECK(t.region(rx, ry)[255] == 1.0);

    const GrayImage face = testing::synthetic_face(2);
    CHECK(extract_template(face, p) == extract_template(face, p));

    SUBCASE("invariant to an unclamped brightness offset") {
        Rng rng(4);
        std::uniform_int_distribution<int> px(20, 200);
        for (int i = 0; i < 20; ++i) {
            GrayImage img(30 + int(rng() % 40), 30 + int(rng() % 40));
            for (auto& v : img.pixels()) v = std::uint8_t(px(rng));
            GrayImage shifted = img;
            const int c = int(rng() % 50);
            for (auto& v : shifted.pixels()) v = std::uint8_t(v + c);
            REQUIRE(extract_template(img, small_params()) == extract_template(shifted, small_params()));
        }
    }
    CHECK_THROWS_AS(validate_params(LbpParams{.gridX = 0}), LbphError);
    LbpParams tiny;
    tiny.faceW = 9;
    CHECK_THROWS_AS(validate_params(tiny), LbphError);
}

TEST_CASE("train") {
    const LbpParams p = small_params();
    CHECK_THROWS_AS(train({}, p), LbphError);

    const GrayImage face = testing::synthetic_face(0);
    const std::vector<LabeledFace> one{{face, "a"}};
    const RecognizerModel m1 = train(one, p);
    REQUIRE(m1.entries.size() == 1);
    CHECK(m1.entries[0].label == "a");

    const std::vector<LabeledFace> copies{{face, "x"}, {face, "y"}, {face, "z"}};
    const RecognizerModel m3 = train(copies, p);
    REQUIRE(m3.entries.size() == 3);
    CHECK(m3.entries[0].face == m3.entries[2].face);
    CHECK(m3.entries[1].label == "y");

    Rng rng(5);
    std::vector<LabeledFace> mixed;
    for (int i = 0; i < 12; ++i) mixed.push_back({testing::random_image(rng, 20, 20), "p" + std::to_string(rng() % 100)});
    const RecognizerModel m = train(mixed, p);
    for (std::size_t i = 0; i < mixed.size(); ++i) {
        REQUIRE(m.entries[i].label == mixed[i].label);
        REQUIRE(m.entries[i].face == extract_template(mixed[i].image, p));
    }
}

TEST_CASE("predict") {
    const LbpParams p = small_params();
    CHECK_THROWS_AS(predict(RecognizerModel{p, {}}, testing::synthetic_face(0)), LbphError);

    std::vector<LabeledFace> faces;
    for (int i = 0; i < 4; ++i) faces.push_back({testing::synthetic_face(i), "person-" + std::to_string(i)});
    const RecognizerModel model = train(faces, p);

    SUBCASE("self match") {
        for (const auto& f : faces) {
            const PredictionResult r = predict(model, f.image);
            CHECK(r.label == f.label);
            CHECK(r.distance == 0.0);
            CHECK(r.isKnown);
        }
    }
    SUBCASE("ties go to the lowest index") {
        std::vector<LabeledFace> dup{{faces[1].image, "first"}, {faces[1].image, "second"}};
        const PredictionResult r = predict(train(dup, p), faces[1].image);
        CHECK(r.label == "first");
        CHECK(r.entryIndex == 0);
    }
    SUBCASE("isKnown follows the threshold") {
        LbpParams strict = p;
        strict.unknownThreshold = 0.0;
        const RecognizerModel m = train(faces, strict);
        const PredictionResult r = predict(m, testing::synthetic_face(0, 3));
        CHECK(r.distance > 0.0);
        CHECK_FALSE(r.isKnown);
    }
    SUBCASE("nearest neighbour equals exhaustive search") {
        Rng rng(6);
        for (int i = 0; i < 60; ++i) {
            const GrayImage q = testing::synthetic_face(int(rng() % 4), 1 + int(rng() % 9));
            const FaceTemplate t = extract_template(q, p);
            std::size_t best = 0;
            double bestD = chi_square_distance(t, model.entries[0].face);
            for (std::size_t k = 1; k < model.entries.size(); ++k) {
                const double d = chi_square_distance(t, model.entries[k].face);
                if (d < bestD) {
                    bestD = d;
                    best = k;
                }
            }
            const PredictionResult r = predict(model, q);
            REQUIRE(r.entryIndex == best);
            REQUIRE(r.label == model.entries[best].label);
            REQUIRE(r.distance == bestD);
            REQUIRE(r.isKnown == (bestD <= p.unknownThreshold));
        }
    }
}

TEST_CASE("bit convention and bin permutation do not change decisions") {
    std::vector<LabeledFace> faces;
    for (int i = 0; i < 4; ++i) faces.push_back({testing::synthetic_face(i), std::to_string(i)});
    const RecognizerModel a = train(faces, small_params());
    const RecognizerModel b = train(faces, small_params(LbpConvention::Complemented));

    // A fixed random permutation of the 256 bins, applied to every region.
    Rng rng(7);
    std::vector<int> perm(256);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto permute = [&](const FaceTemplate& t) {
        std::vector<double> bins(t.bins().size());
        for (std::size_t i = 0; i < bins.size(); ++i) bins[i / 256 * 256 + std::size_t(perm[i % 256])] = t.bins()[i];
        return FaceTemplate(t.grid_x(), t.grid_y(), std::move(bins));
    };
    RecognizerModel c = a;
    for (auto& e : c.entries) e.face = permute(e.face);

    for (int i = 0; i < 20; ++i) {
        const GrayImage q = testing::synthetic_face(int(rng() % 4), 1 + int(rng() % 20));
        const PredictionResult ra = predict(a, q);
        const PredictionResult rb = predict(b, q);
        const PredictionResult rc = predict_template(c, permute(extract_template(q, small_params())));
        REQUIRE(ra.label == rb.label);
        REQUIRE(std::abs(ra.distance - rb.distance) <= 1e-12);
        REQUIRE(ra.label == rc.label);
        REQUIRE(std::abs(ra.distance - rc.distance) <= 1e-12);
    }
}

TEST_CASE("model JSON round trip") {
    std::vector<LabeledFace> faces;
    for (int i = 0; i < 3; ++i) faces.push_back({testing::synthetic_face(i), "id-" + std::to_string(i)});
    const RecognizerModel m = train(faces, small_params());
    const RecognizerModel back = load_model_json(save_model_json(m));
    CHECK(back.params.gridX == 4);
    CHECK(back.params.faceW == 40);
    CHECK(back.params.unknownThreshold == m.params.unknownThreshold);
    REQUIRE(back.entries.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.entries[i].label == m.entries[i].label);
        CHECK(back.entries[i].face == m.entries[i].face);
    }
    CHECK_THROWS_AS(load_model_json("[]"), LbphError);
}
