#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "facerec/facestore.hpp"

namespace facerec::detail {

inline constexpr const char* kCipherName = "xchacha20poly1305-ietf";

/// 32-byte key derived from the secret held in the environment.
std::vector<std::uint8_t> derive_key(std::string_view secret);

/// `context` is bound as associated data (record id and field name).
SealedField seal(const std::vector<std::uint8_t>& key, std::string_view plaintext, std::string_view context);

/// Throws StoreError(Authentication) when the tag does not verify.
std::string unseal(const std::vector<std::uint8_t>& key, const SealedField& field, std::string_view context);

}  // namespace facerec::detail
