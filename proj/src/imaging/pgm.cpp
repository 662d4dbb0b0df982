#include "facerec/imaging.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

namespace facerec {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    // Skips whitespace and '#' comments between tokens.
    void skip_separators() {
        while (pos_ < bytes_.size()) {
            const auto c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                return;
            }
        }
    }

    long read_number(const char* field) {
        skip_separators();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
            throw PgmError(PgmErrorKind::BadHeader, std::string("PGM: expected ") + field);
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000'000)
                throw PgmError(PgmErrorKind::BadHeader, std::string("PGM: ") + field + " out of range");
            ++pos_;
        }
        return value;
    }

    std::size_t pos_ = 0;
    std::span<const std::uint8_t> bytes_;
};

}  // namespace

GrayImage load_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        std::string magic;
        for (std::size_t i = 0; i < std::min<std::size_t>(2, bytes.size()); ++i) magic += char(bytes[i]);
        throw PgmError(PgmErrorKind::BadMagic, "PGM: unsupported magic '" + magic + "'");
    }
    HeaderReader in(bytes);
    in.pos_ = 2;
    if (in.pos_ >= bytes.size() || !(std::isspace(bytes[in.pos_]) || bytes[in.pos_] == '#'))
        throw PgmError(PgmErrorKind::BadMagic, "PGM: unsupported magic");

    const long width = in.read_number("width");
    const long height = in.read_number("height");
    const long maxval = in.read_number("maxval");
    if (width < 1 || height < 1 || width > kMaxImageSide || height > kMaxImageSide)
        throw PgmError(PgmErrorKind::BadDimensions,
                       "PGM: unsupported dimensions " + std::to_string(width) + "x" + std::to_string(height));
    if (maxval < 1 || maxval > 255)
        throw PgmError(PgmErrorKind::BadMaxval, "PGM: maxval " + std::to_string(maxval) + " not in [1, 255]");
    if (in.pos_ >= bytes.size() || !std::isspace(bytes[in.pos_]))
        throw PgmError(PgmErrorKind::BadHeader, "PGM: missing separator after maxval");
    ++in.pos_;

    const std::size_t count = std::size_t(width) * std::size_t(height);
    if (bytes.size() - in.pos_ < count)
        throw PgmError(PgmErrorKind::Truncated, "PGM: expected " + std::to_string(count) + " pixel bytes, got " +
                                                    std::to_string(bytes.size() - in.pos_));
    auto first = bytes.begin() + std::ptrdiff_t(in.pos_);
    return GrayImage(int(width), int(height), std::vector<std::uint8_t>(first, first + std::ptrdiff_t(count)));
}

std::vector<std::uint8_t> save_pgm(const GrayImage& img) {
    const std::string header =
        "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out;
    out.reserve(header.size() + img.pixels().size());
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), img.pixels().begin(), img.pixels().end());
    return out;
}

GrayImage read_pgm_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_pgm(bytes);
}

void write_pgm_file(const std::filesystem::path& path, const GrayImage& img) {
    const auto bytes = save_pgm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ImageError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw ImageError("write failed for " + path.string());
}

}  // namespace facerec
