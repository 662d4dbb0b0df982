#pragma once

// Synthetic images, toy cascades and scoped filesystem/environment helpers
// shared by the unit and acceptance suites.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "facerec/cascade.hpp"
#include "facerec/facestore.hpp"
#include "facerec/imaging.hpp"

namespace facerec::testing {

using Rng = std::mt19937_64;

GrayImage random_image(Rng& rng, int width, int height);
GrayImage random_image(Rng& rng, int maxSide);  // random size in [1, maxSide]
Rect random_rect_inside(Rng& rng, int width, int height);

/// 2x2-window cascade, one stage with one stump over a left(-1)/right(+1)
/// two-rect feature; stump values -1 / +1.
CascadeModel contrast_cascade(double stumpThreshold, double stageThreshold);

/// 24x24-window cascade of three single-stump stages, one per horizontal
/// band, requiring dark|bright, bright|dark, dark|bright contrast.
CascadeModel banded_cascade();

inline constexpr std::uint8_t kDark = 20;
inline constexpr std::uint8_t kBright = 230;

/// Paints the pattern banded_cascade() accepts into `box`.
void plant_banded_pattern(GrayImage& img, const Rect& box);

/// Deterministic face-like image for person `person`; `variant` > 0 adds
/// mild noise and a brightness shift.
GrayImage synthetic_face(int person, int variant = 0, int side = 64);

/// Random valid cascade model for serialization round trips.
CascadeModel random_cascade(Rng& rng);

/// Fresh empty directory removed on destruction.
class ScopedDir {
public:
    explicit ScopedDir(const std::string& tag = "facerec-test");
    ~ScopedDir();
    ScopedDir(const ScopedDir&) = delete;
    ScopedDir& operator=(const ScopedDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Sets an environment variable for the scope's lifetime.
class ScopedEnv {
public:
    ScopedEnv(std::string name, const std::string& value);
    ~ScopedEnv();
    ScopedEnv(const ScopedEnv&) = delete;
    ScopedEnv& operator=(const ScopedEnv&) = delete;
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

/// Brute-force model of store retention: every record ever enrolled and
/// not deleted, with survivors chosen by a full sort at each enrolment.
class RetentionOracle {
public:
    explicit RetentionOracle(std::size_t capacity) : capacity_(capacity) {}

    void enroll(const std::string& id, Millis now);
    void use(const std::string& id, Millis now);
    void remove(const std::string& id);
    /// Surviving ids in ascending order.
    std::vector<std::string> ids() const;
    std::int64_t usage(const std::string& id) const;

private:
    struct Row {
        std::string id;
        std::int64_t usage;
        Millis created;
        Millis lastUsed;
        bool alive;
    };
    std::size_t capacity_;
    std::vector<Row> rows_;
};

struct ReplayOutcome {
    bool ok = true;
    std::string failure;  // first divergence, empty when ok
    int mutations = 0;
};

/// Random enrol/use/delete sequence against a fresh store under `root`,
/// compared with RetentionOracle after every step. Each step also reloads
/// the store from disk and requires identical records and manifest bytes,
/// and scans the manifest for plaintext names and notes.
ReplayOutcome replay_store_sequence(std::uint64_t seed, std::size_t capacity, int operations,
                                    const std::filesystem::path& root, const std::string& keyEnv);

std::size_t count_files(const std::filesystem::path& dir);
std::string read_text(const std::filesystem::path& path);

}  // namespace facerec::testing
