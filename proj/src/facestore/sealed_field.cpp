#include "sealed_field.hpp"

#include <sodium.h>

#include "facerec/encoding.hpp"
#include "sodium_init.hpp"

namespace facerec::detail {

namespace {
const unsigned char* bytes_of(std::string_view s) { return reinterpret_cast<const unsigned char*>(s.data()); }
}  // namespace

std::vector<std::uint8_t> derive_key(std::string_view secret) {
    ensure_sodium();
    static_assert(crypto_aead_xchacha20poly1305_ietf_KEYBYTES == crypto_generichash_BYTES);
    std::vector<std::uint8_t> key(crypto_aead_xchacha20poly1305_ietf_KEYBYTES);
    crypto_generichash(key.data(), key.size(), bytes_of(secret), secret.size(), nullptr, 0);
    return key;
}

SealedField seal(const std::vector<std::uint8_t>& key, std::string_view plaintext, std::string_view context) {
    ensure_sodium();
    std::vector<std::uint8_t> nonce(crypto_aead_xchacha20poly1305_ietf_NPUBBYTES);
    randombytes_buf(nonce.data(), nonce.size());
    std::vector<std::uint8_t> out(plaintext.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
    unsigned long long written = 0;
    crypto_aead_xchacha20poly1305_ietf_encrypt(out.data(), &written, bytes_of(plaintext), plaintext.size(),
                                               bytes_of(context), context.size(), nullptr, nonce.data(),
                                               key.data());
    out.resize(written);
    return {kCipherName, base64_encode(nonce), base64_encode(out)};
}

std::string unseal(const std::vector<std::uint8_t>& key, const SealedField& field, std::string_view context) {
    ensure_sodium();
    if (field.cipher != kCipherName)
        throw StoreError(StoreErrorKind::Corrupt, "unsupported cipher '" + field.cipher + "'");
    const auto nonce = base64_decode(field.nonce);
    const auto data = base64_decode(field.data);
    if (!nonce || !data || nonce->size() != crypto_aead_xchacha20poly1305_ietf_NPUBBYTES ||
        data->size() < crypto_aead_xchacha20poly1305_ietf_ABYTES)
        throw StoreError(StoreErrorKind::Corrupt, "malformed sealed field");
    std::string plain(data->size() - crypto_aead_xchacha20poly1305_ietf_ABYTES, '\0');
    unsigned long long written = 0;
    if (crypto_aead_xchacha20poly1305_ietf_decrypt(reinterpret_cast<unsigned char*>(plain.data()), &written,
                                                   nullptr, data->data(), data->size(), bytes_of(context),
                                                   context.size(), nonce->data(), key.data()) != 0)
        throw StoreError(StoreErrorKind::Authentication, "sealed field failed authentication (wrong key?)");
    plain.resize(written);
    return plain;
}

}  // namespace facerec::detail
