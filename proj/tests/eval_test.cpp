#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <set>

#include "facerec/eval.hpp"
#include "fixtures.hpp"

using namespace facerec;
using facerec::testing::Rng;
using facerec::testing::ScopedDir;
using facerec::testing::ScopedEnv;

namespace {

constexpr const char* kKeyEnv = "FACEREC_TEST_EVAL_KEY";

double iou_oracle(const Rect& a, const Rect& b) {
    // Pixel counting.
    int inter = 0;
    for (int y = std::min(a.y, b.y); y < std::max(a.bottom(), b.bottom()); ++y)
        for (int x = std::min(a.x, b.x); x < std::max(a.right(), b.right()); ++x) {
            const bool inA = x >= a.x && x < a.right() && y >= a.y && y < a.bottom();
            const bool inB = x >= b.x && x < b.right() && y >= b.y && y < b.bottom();
            inter += inA && inB;
        }
    return double(inter) / double(a.area() + b.area() - inter);
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary | std::ios::trunc) << text;
}

}  // namespace

TEST_CASE("accuracy arithmetic") {
    const int correct[] = {15, 14, 14, 15, 17, 17, 10, 7};
    const int incorrect[] = {2, 2, 1, 3, 7, 2, 0, 1};
    const char* expected[] = {"88.24", "87.50", "93.33", "83.33", "70.83", "89.47", "100.00", "87.50"};
    for (int i = 0; i < 8; ++i) {
        DetectionReport r{"v", 0, correct[i] + incorrect[i], correct[i], incorrect[i]};
        CHECK(format_accuracy(r.accuracy()) == expected[i]);
    }
    const int persons[] = {32, 26, 29, 35};
    const char* personExpected[] = {"64.00", "52.00", "58.00", "70.00"};
    for (int i = 0; i < 4; ++i)
        CHECK(format_accuracy(RecognitionReport{"p", 50, persons[i], 50 - persons[i]}.accuracy()) == personExpected[i]);

    CHECK_FALSE(DetectionReport{}.accuracy());
    CHECK(format_accuracy(std::nullopt) == "n/a");
}

TEST_CASE("rendering") {
    const std::vector<DetectionReport> rows{{"1", 130, 17, 15, 2}, {"long-id", 5, 0, 0, 0}};
    const std::string table = render_table(rows);
    CHECK(table == render_table(rows));
    CHECK(table.find("88.24") != std::string::npos);
    CHECK(table.find("n/a") != std::string::npos);
    CHECK(table.find("Frames with Faces") != std::string::npos);
    CHECK(table.find("1      ") < table.find("long-id"));

    CHECK(render_csv(rows) ==
          "id,framesWithFaces,detections,correct,incorrect,accuracy\n1,130,17,15,2,88.24\nlong-id,5,0,0,0,n/a\n");
    const std::vector<RecognitionReport> people{{"Person 1", 50, 32, 18}};
    CHECK(render_csv(people) == "id,experiments,correct,incorrect,accuracy\nPerson 1,50,32,18,64.00\n");

    const std::string empty = render_table(std::span<const DetectionReport>{});
    CHECK(std::count(empty.begin(), empty.end(), '\n') == 2);
    CHECK(render_csv(std::span<const RecognitionReport>{}) == "id,experiments,correct,incorrect,accuracy\n");
}

TEST_CASE("annotations") {
    const auto a = parse_annotations(R"([{"frame": "f1.pgm", "boxes": [{"x":1,"y":2,"w":3,"h":4}], "label": "p"},
                                         {"frame": "f2.pgm", "boxes": []}])");
    REQUIRE(a.size() == 2);
    CHECK(a[0].boxes[0] == Rect{1, 2, 3, 4});
    CHECK(a[0].label == "p");
    CHECK_FALSE(a[1].label);
    CHECK_THROWS_AS(parse_annotations("{}"), EvalError);
    CHECK_THROWS_AS(parse_annotations(R"([{"boxes": []}])"), EvalError);
    CHECK_THROWS_AS(parse_annotations(R"([{"frame": "f", "boxes": [{"x":0,"y":0,"w":0,"h":1}]}])"), EvalError);
}

TEST_CASE("iou and greedy matching") {
    CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
    CHECK(iou({0, 0, 10, 10}, {20, 20, 5, 5}) == 0.0);
    CHECK(iou({0, 0, 10, 10}, {5, 0, 10, 10}) == doctest::Approx(50.0 / 150.0));

    Rng rng(8);
    std::uniform_int_distribution<int> n(0, 8), coord(0, 40), side(4, 20);
    for (int i = 0; i < 400; ++i) {
        std::vector<Rect> det(std::size_t(n(rng))), truth(std::size_t(n(rng)));
        for (auto& r : det) r = {coord(rng), coord(rng), side(rng), side(rng)};
        for (auto& r : truth) r = {coord(rng), coord(rng), side(rng), side(rng)};
        const auto matches = greedy_match(det, truth, 0.3);

        std::set<std::size_t> usedD, usedT;
        for (const Match& m : matches) {
            REQUIRE(usedD.insert(m.detection).second);
            REQUIRE(usedT.insert(m.truth).second);
            REQUIRE(m.iou == doctest::Approx(iou_oracle(det[m.detection], truth[m.truth])));
            REQUIRE(m.iou >= 0.3);
        }
        // Maximal: no unmatched pair left over the threshold.
        for (std::size_t d = 0; d < det.size(); ++d)
            for (std::size_t t = 0; t < truth.size(); ++t)
                if (!usedD.count(d) && !usedT.count(t)) REQUIRE(iou_oracle(det[d], truth[t]) < 0.3);
        // Greedy: matches appear in non-increasing IoU order.
        for (std::size_t k = 1; k < matches.size(); ++k) REQUIRE(matches[k - 1].iou >= matches[k].iou);
    }
}

TEST_CASE("eval_detection on a planted corpus") {
    ScopedDir dir;
    const CascadeModel model = testing::banded_cascade();
    std::vector<Annotation> ann;
    Rng rng(9);
    for (int i = 0; i < 6; ++i) {
        GrayImage frame(128, 96, 120);
        Annotation a{"f" + std::to_string(i) + ".pgm", {}, std::nullopt};
        if (i % 3 != 2) {
            const int s = 30 + int(rng() % 30);
            const Rect box{int(rng() % (128 - s)), int(rng() % (96 - s)), s, s};
            testing::plant_banded_pattern(frame, box);
            a.boxes.push_back(box);
        }
        write_pgm_file(dir.path() / a.frame, frame);
        ann.push_back(a);
    }
    const DetectionEvaluation ev = eval_detection(dir.path(), ann, model, DetectParams{}, 0.5, "synthetic");
    CHECK(ev.report.id == "synthetic");
    CHECK(ev.report.framesWithFaces == 4);
    CHECK(ev.report.detections == ev.report.correct + ev.report.incorrect);
    CHECK(ev.report.correct == 4);
    CHECK(ev.report.incorrect == 0);
    REQUIRE(ev.timings.size() == 6);
    for (const auto& t : ev.timings) CHECK(t.overBudget == (t.millis > kFrameBudgetMs));

    ann.push_back({"missing.pgm", {}, std::nullopt});
    CHECK_THROWS_WITH_AS(eval_detection(dir.path(), ann, model, DetectParams{}), doctest::Contains("missing.pgm"),
                         EvalError);
}

TEST_CASE("eval_recognition") {
    ScopedEnv key(kKeyEnv, "eval");
    ScopedDir dir;
    FaceStore store(StoreConfig{dir.path() / "store", 10, kKeyEnv});
    LbpParams params;
    params.gridX = params.gridY = 4;
    params.faceW = params.faceH = 32;
    std::vector<std::string> ids;
    for (int i = 0; i < 3; ++i)
        ids.push_back(store.enroll("Person " + std::to_string(i), "", testing::synthetic_face(i, 0, 40), 1 + i).id);

    const auto corpus = dir.path() / "crops";
    std::filesystem::create_directories(corpus);
    std::vector<Annotation> ann;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 2; ++k) {
            // Frame holds the enrolled face at an offset; the box crops it back out.
            GrayImage frame(60, 60, 0);
            const GrayImage f = testing::synthetic_face(i, 0, 40);
            for (int y = 0; y < 40; ++y)
                for (int x = 0; x < 40; ++x) frame.at(x + 5 * k, y + 7) = f.at(x, y);
            const std::string name = "p" + std::to_string(i) + "-" + std::to_string(k) + ".pgm";
            write_pgm_file(corpus / name, frame);
            // Label by display name for one sample, by id for the other.
            ann.push_back({name, {{5 * k, 7, 40, 40}}, k == 0 ? "Person " + std::to_string(i) : ids[std::size_t(i)]});
        }
    const auto reports = eval_recognition(corpus, ann, store, params);
    REQUIRE(reports.size() == 3);
    for (const auto& r : reports) {
        CHECK(r.experiments == 2);
        CHECK(r.correct == 2);
        CHECK(format_accuracy(r.accuracy()) == "100.00");
    }

    ann.push_back({"p0-0.pgm", {}, std::string("Nobody")});
    CHECK_THROWS_AS(eval_recognition(corpus, ann, store, params), EvalError);
    ann.back().label.reset();
    CHECK(eval_recognition(corpus, ann, store, params).size() == 3);  // unlabeled frames are skipped
}

TEST_CASE("annotation files") {
    ScopedDir dir;
    write_text(dir.path() / "a.json", R"([{"frame": "x.pgm", "boxes": []}])");
    CHECK(read_annotations(dir.path() / "a.json").size() == 1);
    CHECK_THROWS_AS(read_annotations(dir.path() / "nope.json"), EvalError);
    const auto a = read_annotations(dir.path() / "a.json");
    CHECK_THROWS_AS(require_frames(dir.path(), a), EvalError);
}
