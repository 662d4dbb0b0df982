#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace facerec {

/// Standard base64 with padding.
std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Strict decode; nullopt on any character outside the alphabet or bad padding.
std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text);

/// Lowercase hex of `bytes` random bytes from the system CSPRNG.
std::string random_hex(std::size_t bytes);

}  // namespace facerec
