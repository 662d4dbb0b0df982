#include "facerec/encoding.hpp"

#include <stdexcept>

#include <sodium.h>

#include "sodium_init.hpp"

namespace facerec {

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    detail::ensure_sodium();
    const std::size_t len = sodium_base64_encoded_len(bytes.size(), sodium_base64_VARIANT_ORIGINAL);
    std::string out(len, '\0');
    sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(), sodium_base64_VARIANT_ORIGINAL);
    out.resize(len - 1);  // drop terminator
    return out;
}

std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text) {
    detail::ensure_sodium();
    std::vector<std::uint8_t> out(text.size() / 4 * 3 + 3);
    std::size_t written = 0;
    const char* end = nullptr;
    if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &written, &end,
                          sodium_base64_VARIANT_ORIGINAL) != 0 ||
        end != text.data() + text.size())
        return std::nullopt;
    out.resize(written);
    return out;
}

std::string random_hex(std::size_t bytes) {
    detail::ensure_sodium();
    std::vector<std::uint8_t> raw(bytes);
    randombytes_buf(raw.data(), raw.size());
    std::string hex(bytes * 2 + 1, '\0');
    sodium_bin2hex(hex.data(), hex.size(), raw.data(), raw.size());
    hex.pop_back();
    return hex;
}

}  // namespace facerec
