#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <tuple>

namespace facerec::testing {

namespace fs = std::filesystem;

GrayImage random_image(Rng& rng, int width, int height) {
    std::uniform_int_distribution<int> px(0, 255);
    GrayImage img(width, height);
    for (auto& p : img.pixels()) p = std::uint8_t(px(rng));
    return img;
}

GrayImage random_image(Rng& rng, int maxSide) {
    std::uniform_int_distribution<int> side(1, maxSide);
    const int w = side(rng);
    const int h = side(rng);
    return random_image(rng, w, h);
}

Rect random_rect_inside(Rng& rng, int width, int height) {
    std::uniform_int_distribution<int> xs(0, width - 1), ys(0, height - 1);
    const int x = xs(rng);
    const int y = ys(rng);
    std::uniform_int_distribution<int> ws(1, width - x), hs(1, height - y);
    return {x, y, ws(rng), hs(rng)};
}

CascadeModel contrast_cascade(double stumpThreshold, double stageThreshold) {
    WeakStump stump{{{{{0, 0, 1, 2}, -1.0}, {{1, 0, 1, 2}, 1.0}}}, stumpThreshold, -1.0, 1.0};
    return CascadeModel{2, 2, {Stage{{stump}, stageThreshold}}};
}

CascadeModel banded_cascade() {
    auto band = [](int y, double leftWeight) {
        WeakStump stump{{{{{0, y, 12, 8}, leftWeight}, {{12, y, 12, 8}, -leftWeight}}}, 0.2, -1.0, 1.0};
        return Stage{{stump}, 0.0};
    };
    return CascadeModel{24, 24, {band(0, -1.0), band(8, 1.0), band(16, -1.0)}};
}

void plant_banded_pattern(GrayImage& img, const Rect& box) {
    for (int j = 0; j < box.h; ++j) {
        const int bandIndex = std::min(2, j * 3 / box.h);
        for (int i = 0; i < box.w; ++i) {
            const bool left = i * 2 < box.w;
            const bool darkLeft = bandIndex != 1;
            img.at(box.x + i, box.y + j) = (left == darkLeft) ? kDark : kBright;
        }
    }
}

GrayImage synthetic_face(int person, int variant, int side) {
    Rng rng(0x5eed0000ULL + std::uint64_t(person) * 7919);
    std::uniform_real_distribution<double> pos(0.15, 0.85), amp(-90.0, 90.0), radius(0.06, 0.22);
    struct Blob {
        double cx, cy, r, a;
    };
    std::vector<Blob> blobs;
    for (int i = 0; i < 12; ++i) blobs.push_back({pos(rng), pos(rng), radius(rng), amp(rng)});

    Rng noise(0xfaceULL * (std::uint64_t(person) + 1) + std::uint64_t(variant) * 104729);
    std::normal_distribution<double> jitter(0.0, variant > 0 ? 4.0 : 0.0);
    const double shift = variant > 0 ? double((variant * 37) % 21 - 10) : 0.0;

    GrayImage img(side, side);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const double u = (x + 0.5) / side;
            const double v = (y + 0.5) / side;
            const double oval = ((u - 0.5) * (u - 0.5)) / 0.16 + ((v - 0.5) * (v - 0.5)) / 0.22;
            double value = oval < 1.0 ? 150.0 : 60.0;
            for (const Blob& b : blobs) {
                const double d2 = (u - b.cx) * (u - b.cx) + (v - b.cy) * (v - b.cy);
                value += b.a * std::exp(-d2 / (2 * b.r * b.r));
            }
            value += shift + (variant > 0 ? jitter(noise) : 0.0);
            img.at(x, y) = std::uint8_t(std::clamp(std::lround(value), 0L, 255L));
        }
    }
    return img;
}

CascadeModel random_cascade(Rng& rng) {
    std::uniform_int_distribution<int> window(4, 30), count(1, 4), parts(2, 3);
    std::uniform_real_distribution<double> real(-3.0, 3.0);
    CascadeModel m;
    m.windowW = window(rng);
    m.windowH = window(rng);
    const int stages = count(rng);
    for (int s = 0; s < stages; ++s) {
        Stage stage;
        stage.stageThreshold = real(rng);
        const int stumps = count(rng);
        for (int t = 0; t < stumps; ++t) {
            WeakStump stump;
            stump.threshold = real(rng);
            stump.leftValue = real(rng);
            stump.rightValue = stump.leftValue + 0.5 + std::abs(real(rng));
            const int n = parts(rng);
            for (int p = 0; p < n; ++p)
                stump.feature.parts.push_back({random_rect_inside(rng, m.windowW, m.windowH), real(rng)});
            stage.stumps.push_back(std::move(stump));
        }
        m.stages.push_back(std::move(stage));
    }
    return m;
}

ScopedDir::ScopedDir(const std::string& tag) {
    static Rng rng{std::random_device{}()};
    for (;;) {
        path_ = fs::temp_directory_path() / (tag + "-" + std::to_string(rng() % 1000000000ULL));
        if (fs::create_directories(path_)) break;
    }
}

ScopedDir::~ScopedDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

ScopedEnv::ScopedEnv(std::string name, const std::string& value) : name_(std::move(name)) {
    ::setenv(name_.c_str(), value.c_str(), 1);
}

ScopedEnv::~ScopedEnv() { ::unsetenv(name_.c_str()); }

void RetentionOracle::enroll(const std::string& id, Millis now) {
    rows_.push_back({id, 0, now, now, true});
    std::vector<Row*> alive;
    for (Row& r : rows_)
        if (r.alive) alive.push_back(&r);
    if (alive.size() <= capacity_) return;
    // Rank every live record except the newcomer; drop the lowest.
    alive.pop_back();
    std::sort(alive.begin(), alive.end(), [](const Row* a, const Row* b) {
        return std::tie(a->usage, a->lastUsed, a->created, a->id) < std::tie(b->usage, b->lastUsed, b->created, b->id);
    });
    alive.front()->alive = false;
}

void RetentionOracle::use(const std::string& id, Millis now) {
    for (Row& r : rows_)
        if (r.alive && r.id == id) {
            ++r.usage;
            r.lastUsed = std::max(now, r.created);
        }
}

void RetentionOracle::remove(const std::string& id) {
    for (Row& r : rows_)
        if (r.id == id) r.alive = false;
}

std::vector<std::string> RetentionOracle::ids() const {
    std::vector<std::string> out;
    for (const Row& r : rows_)
        if (r.alive) out.push_back(r.id);
    std::sort(out.begin(), out.end());
    return out;
}

std::int64_t RetentionOracle::usage(const std::string& id) const {
    for (const Row& r : rows_)
        if (r.alive && r.id == id) return r.usage;
    return -1;
}

ReplayOutcome replay_store_sequence(std::uint64_t seed, std::size_t capacity, int operations,
                                    const fs::path& root, const std::string& keyEnv) {
    Rng rng(seed);
    const StoreConfig config{root, capacity, keyEnv};
    FaceStore store(config);
    RetentionOracle oracle(capacity);
    std::vector<std::string> secrets;
    ReplayOutcome out;
    Millis now = 1'700'000'000'000 + Millis(seed % 1000);

    auto fail = [&](const std::string& why) {
        out.ok = false;
        out.failure = "seed " + std::to_string(seed) + " step " + std::to_string(out.mutations) + ": " + why;
        return out;
    };

    for (int step = 0; step < operations; ++step) {
        now += Millis(rng() % 3);  // repeated timestamps exercise the later tie-breaks
        const auto live = oracle.ids();
        const unsigned roll = unsigned(rng() % 10);
        if (live.empty() || roll < 4) {
            const std::string name = "Plain Name " + std::to_string(seed) + "-" + std::to_string(step);
            const std::string notes = "plain notes " + std::to_string(rng());
            secrets.push_back(name);
            secrets.push_back(notes);
            const PersonRecord r = store.enroll(name, notes, random_image(rng, 6 + int(rng() % 10), 6 + int(rng() % 10)), now);
            oracle.enroll(r.id, now);
        } else if (roll < 9) {
            const std::string& id = live[rng() % live.size()];
            store.record_usage(id, now);
            oracle.use(id, now);
        } else {
            const std::string& id = live[rng() % live.size()];
            store.delete_person(id);
            oracle.remove(id);
        }
        ++out.mutations;

        const auto records = store.records();
        std::vector<std::string> ids;
        std::size_t images = 0;
        for (const PersonRecord& r : records) {
            ids.push_back(r.id);
            images += r.faceImages.size();
            if (r.usageCount != oracle.usage(r.id)) return fail("usage count mismatch for " + r.id);
            if (r.lastUsedAt < r.createdAt) return fail("lastUsedAt before createdAt");
        }
        if (ids != oracle.ids()) return fail("surviving set differs from the oracle");
        if (records.size() > capacity) return fail("over capacity");
        if (count_files(store.faces_directory()) != images) return fail("stray or missing face files");

        const std::string manifest = read_text(store.manifest_path());
        if (manifest != store.manifest_text()) return fail("manifest on disk differs from memory");
        for (const std::string& s : secrets)
            if (manifest.find(s) != std::string::npos) return fail("plaintext in manifest: " + s);

        FaceStore reloaded(config);
        if (reloaded.records() != records) return fail("reload changed the records");
        if (reloaded.manifest_text() != manifest) return fail("reload changed the manifest bytes");
    }
    return out;
}

std::size_t count_files(const fs::path& dir) {
    if (!fs::exists(dir)) return 0;
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) ++n;
    return n;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace facerec::testing
