#include "facerec/facestore.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "facerec/encoding.hpp"
#include "sealed_field.hpp"

namespace facerec {

namespace fs = std::filesystem;
using nlohmann::json;

Millis now_millis() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

bool evicts_before(const PersonRecord& a, const PersonRecord& b) {
    return std::tie(a.usageCount, a.lastUsedAt, a.createdAt, a.id) <
           std::tie(b.usageCount, b.lastUsedAt, b.createdAt, b.id);
}

namespace {

constexpr int kManifestVersion = 1;

std::string context_for(const std::string& id, const char* field) { return id + "/" + field; }

json sealed_to_json(const SealedField& f) { return {{"cipher", f.cipher}, {"nonce", f.nonce}, {"data", f.data}}; }

SealedField sealed_from_json(const json& j) {
    return {j.at("cipher").get<std::string>(), j.at("nonce").get<std::string>(), j.at("data").get<std::string>()};
}

void write_atomically(const fs::path& target, std::string_view bytes) {
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StoreError(StoreErrorKind::Io, "cannot write " + tmp.string());
        out.write(bytes.data(), std::streamsize(bytes.size()));
        out.flush();
        if (!out) throw StoreError(StoreErrorKind::Io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw StoreError(StoreErrorKind::Io, "cannot replace " + target.string() + ": " + ec.message());
}

void remove_quietly(const fs::path& p) {
    std::error_code ec;
    fs::remove(p, ec);
}

}  // namespace

FaceStore::FaceStore(StoreConfig config) : config_(std::move(config)) {
    if (config_.capacity < 1) throw StoreError(StoreErrorKind::Corrupt, "store capacity must be at least 1");
    load();
}

void FaceStore::load() {
    std::error_code ec;
    fs::create_directories(faces_directory(), ec);
    if (ec)
        throw StoreError(StoreErrorKind::Io, "cannot create " + faces_directory().string() + ": " + ec.message());

    if (const char* secret = std::getenv(config_.encryptionKeySource.c_str()); secret && *secret)
        key_ = detail::derive_key(secret);

    if (!fs::exists(manifest_path())) return;

    std::ifstream in(manifest_path(), std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    const json doc = json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw StoreError(StoreErrorKind::Corrupt, "manifest.json is not valid JSON");

    EntryMap loaded;
    try {
        if (doc.at("version").get<int>() != kManifestVersion)
            throw StoreError(StoreErrorKind::Corrupt, "unsupported manifest version");
        const auto& persons = doc.at("persons");
        if (!persons.empty() && !key_)
            throw StoreError(StoreErrorKind::MissingKey,
                             "environment variable " + config_.encryptionKeySource + " holds no key");
        for (const json& p : persons) {
            Entry e;
            PersonRecord& r = e.record;
            r.id = p.at("id").get<std::string>();
            e.name = sealed_from_json(p.at("displayName"));
            e.notes = sealed_from_json(p.at("notes"));
            r.displayName = detail::unseal(*key_, e.name, context_for(r.id, "displayName"));
            r.notes = detail::unseal(*key_, e.notes, context_for(r.id, "notes"));
            r.faceImages = p.at("faceImages").get<std::vector<std::string>>();
            r.usageCount = p.at("usageCount").get<std::int64_t>();
            r.createdAt = p.at("createdAt").get<Millis>();
            r.lastUsedAt = p.at("lastUsedAt").get<Millis>();
            if (r.faceImages.empty() || r.usageCount < 0 || r.lastUsedAt < r.createdAt)
                throw StoreError(StoreErrorKind::Corrupt, "record " + r.id + " violates record invariants");
            for (const auto& name : r.faceImages) {
                const fs::path file = faces_directory() / name;
                if (name.find('/') != std::string::npos || !fs::is_regular_file(file))
                    throw StoreError(StoreErrorKind::ManifestMismatch,
                                     "manifest references missing face image " + name);
                try {
                    read_pgm_file(file);
                } catch (const std::exception& ex) {
                    throw StoreError(StoreErrorKind::ManifestMismatch,
                                     "face image " + name + " is unreadable: " + ex.what());
                }
            }
            if (!loaded.emplace(r.id, std::move(e)).second)
                throw StoreError(StoreErrorKind::Corrupt, "duplicate record id " + r.id);
        }
    } catch (const json::exception& ex) {
        throw StoreError(StoreErrorKind::Corrupt, std::string("manifest.json: ") + ex.what());
    }
    entries_ = std::move(loaded);

    // A capacity lowered since the last run is enforced on open.
    if (entries_.size() > config_.capacity) {
        std::vector<fs::path> orphaned;
        while (entries_.size() > config_.capacity) {
            auto victim = std::min_element(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
                return evicts_before(a.second.record, b.second.record);
            });
            for (const auto& name : victim->second.record.faceImages) orphaned.push_back(faces_directory() / name);
            entries_.erase(victim);
        }
        persist_locked();
        for (const auto& p : orphaned) remove_quietly(p);
    }
}

std::string FaceStore::manifest_text_locked() const {
    json persons = json::array();
    for (const auto& [id, e] : entries_) {
        const PersonRecord& r = e.record;
        persons.push_back({{"id", r.id},
                           {"displayName", sealed_to_json(e.name)},
                           {"notes", sealed_to_json(e.notes)},
                           {"faceImages", r.faceImages},
                           {"usageCount", r.usageCount},
                           {"createdAt", r.createdAt},
                           {"lastUsedAt", r.lastUsedAt}});
    }
    json doc = {{"version", kManifestVersion}, {"capacity", config_.capacity}, {"persons", persons}};
    return doc.dump(2) + "\n";
}

std::string FaceStore::manifest_text() const {
    std::lock_guard lock(mutex_);
    return manifest_text_locked();
}

void FaceStore::persist_locked() const { write_atomically(manifest_path(), manifest_text_locked()); }

std::string FaceStore::new_id_locked() const {
    for (;;) {
        std::string id = random_hex(8);
        if (!entries_.contains(id)) return id;
    }
}

FaceStore::EntryMap::iterator FaceStore::require_locked(std::string_view id) {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw StoreError(StoreErrorKind::UnknownId, "unknown person id '" + std::string(id) + "'");
    return it;
}

PersonRecord FaceStore::enroll(std::string_view displayName, std::string_view notes, const GrayImage& face,
                               Millis now) {
    if (displayName.empty()) throw StoreError(StoreErrorKind::EmptyName, "display name must not be empty");
    std::lock_guard lock(mutex_);
    if (!key_)
        throw StoreError(StoreErrorKind::MissingKey,
                         "environment variable " + config_.encryptionKeySource + " holds no key");

    Entry e;
    PersonRecord& r = e.record;
    r.id = new_id_locked();
    r.displayName = displayName;
    r.notes = notes;
    r.faceImages = {r.id + "-0.pgm"};
    r.createdAt = now;
    r.lastUsedAt = now;
    e.name = detail::seal(*key_, r.displayName, context_for(r.id, "displayName"));
    e.notes = detail::seal(*key_, r.notes, context_for(r.id, "notes"));

    const fs::path image = faces_directory() / r.faceImages.front();
    const auto pgm = save_pgm(face);
    write_atomically(image, std::string_view(reinterpret_cast<const char*>(pgm.data()), pgm.size()));

    std::optional<Entry> evicted;
    if (entries_.size() >= config_.capacity) {
        auto victim = std::min_element(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
            return evicts_before(a.second.record, b.second.record);
        });
        evicted = std::move(victim->second);
        entries_.erase(victim);
    }
    const PersonRecord result = r;
    entries_.emplace(r.id, std::move(e));
    try {
        persist_locked();
    } catch (...) {
        entries_.erase(result.id);
        if (evicted) entries_.emplace(evicted->record.id, std::move(*evicted));
        remove_quietly(image);
        throw;
    }
    if (evicted)
        for (const auto& name : evicted->record.faceImages) remove_quietly(faces_directory() / name);
    ++generation_;
    return result;
}

PersonRecord FaceStore::record_usage(std::string_view id, Millis now) {
    std::lock_guard lock(mutex_);
    auto it = require_locked(id);
    const PersonRecord before = it->second.record;
    PersonRecord& r = it->second.record;
    ++r.usageCount;
    r.lastUsedAt = std::max(now, r.createdAt);
    try {
        persist_locked();
    } catch (...) {
        r = before;
        throw;
    }
    return r;
}

void FaceStore::delete_person(std::string_view id) {
    std::lock_guard lock(mutex_);
    auto it = require_locked(id);
    Entry removed = std::move(it->second);
    entries_.erase(it);
    try {
        persist_locked();
    } catch (...) {
        entries_.emplace(removed.record.id, std::move(removed));
        throw;
    }
    for (const auto& name : removed.record.faceImages) remove_quietly(faces_directory() / name);
    ++generation_;
}

std::vector<PersonRecord> FaceStore::records() const {
    std::lock_guard lock(mutex_);
    std::vector<PersonRecord> out;
    out.reserve(entries_.size());
    for (const auto& [id, e] : entries_) out.push_back(e.record);
    return out;
}

std::vector<PersonRecord> FaceStore::retention_order() const {
    auto out = records();
    std::sort(out.begin(), out.end(), [](const PersonRecord& a, const PersonRecord& b) { return evicts_before(b, a); });
    return out;
}

std::optional<PersonRecord> FaceStore::find(std::string_view id) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) return std::nullopt;
    return it->second.record;
}

GrayImage FaceStore::load_face(const std::string& imageName) const {
    return read_pgm_file(faces_directory() / imageName);
}

std::size_t FaceStore::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::uint64_t FaceStore::generation() const {
    std::lock_guard lock(mutex_);
    return generation_;
}

RecognizerModel build_recognizer(const FaceStore& store, const LbpParams& params) {
    const auto records = store.records();
    if (records.empty()) throw StoreError(StoreErrorKind::Empty, "cannot build a recognizer from an empty store");
    std::vector<LabeledFace> faces;
    for (const PersonRecord& r : records)
        for (const auto& name : r.faceImages) faces.push_back({store.load_face(name), r.id});
    return train(faces, params);
}

}  // namespace facerec
