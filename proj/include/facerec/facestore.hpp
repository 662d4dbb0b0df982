#pragma once

// Capacity-capped enrolment database persisted as a directory:
//
//   <root>/manifest.json    person records, names and notes sealed
//   <root>/faces/*.pgm      enrolled face images
//
// Records over capacity are evicted least-frequently-used first.

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "facerec/imaging.hpp"
#include "facerec/lbph.hpp"

namespace facerec {

/// Milliseconds since the Unix epoch, UTC.
using Millis = std::int64_t;

Millis now_millis();

enum class StoreErrorKind {
    EmptyName,
    UnknownId,
    MissingKey,
    Authentication,
    ManifestMismatch,
    Corrupt,
    Io,
    Empty,
};

class StoreError : public std::runtime_error {
public:
    StoreError(StoreErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    StoreErrorKind kind() const { return kind_; }

private:
    StoreErrorKind kind_;
};

struct StoreConfig {
    std::filesystem::path rootDirectory;
    std::size_t capacity = 10;
    std::string encryptionKeySource = "FACESTORE_KEY";  // environment variable name
};

/// Authenticated ciphertext as stored in the manifest.
struct SealedField {
    std::string cipher;
    std::string nonce;  // base64
    std::string data;   // base64

    friend bool operator==(const SealedField&, const SealedField&) = default;
};

struct PersonRecord {
    std::string id;
    std::string displayName;
    std::string notes;
    std::vector<std::string> faceImages;
    std::int64_t usageCount = 0;
    Millis createdAt = 0;
    Millis lastUsedAt = 0;

    friend bool operator==(const PersonRecord&, const PersonRecord&) = default;
};

/// True when a is evicted before b: lower usage, then older lastUsedAt, then
/// older createdAt, then smaller id.
bool evicts_before(const PersonRecord& a, const PersonRecord& b);

class FaceStore {
public:
    /// Opens (or creates) the store under config.rootDirectory.
    explicit FaceStore(StoreConfig config);

    FaceStore(const FaceStore&) = delete;
    FaceStore& operator=(const FaceStore&) = delete;

    PersonRecord enroll(std::string_view displayName, std::string_view notes, const GrayImage& face, Millis now);
    PersonRecord record_usage(std::string_view id, Millis now);
    void delete_person(std::string_view id);

    /// Snapshot in ascending id order.
    std::vector<PersonRecord> records() const;
    /// Snapshot, most-retained first (reverse eviction order).
    std::vector<PersonRecord> retention_order() const;
    std::optional<PersonRecord> find(std::string_view id) const;

    GrayImage load_face(const std::string& imageName) const;

    std::size_t size() const;
    bool empty() const { return size() == 0; }
    std::size_t capacity() const { return config_.capacity; }
    const StoreConfig& config() const { return config_; }
    std::filesystem::path faces_directory() const { return config_.rootDirectory / "faces"; }
    std::filesystem::path manifest_path() const { return config_.rootDirectory / "manifest.json"; }

    /// Bumped whenever the enrolled face set changes (enrol, evict, delete);
    /// usage updates leave it alone. Lets callers cache recognizers.
    std::uint64_t generation() const;

    /// Manifest bytes for the current state, identical to what is on disk.
    std::string manifest_text() const;

private:
    struct Entry {
        PersonRecord record;
        SealedField name;
        SealedField notes;
    };

    using EntryMap = std::map<std::string, Entry, std::less<>>;

    void load();
    void persist_locked() const;
    std::string manifest_text_locked() const;
    std::string new_id_locked() const;
    EntryMap::iterator require_locked(std::string_view id);

    StoreConfig config_;
    std::optional<std::vector<std::uint8_t>> key_;
    mutable std::mutex mutex_;
    EntryMap entries_;
    std::uint64_t generation_ = 0;
};

/// Recognizer over every stored face, labelled by person id, records in
/// ascending id order.
RecognizerModel build_recognizer(const FaceStore& store, const LbpParams& params);

}  // namespace facerec
