#pragma once

#include <stdexcept>

#include <sodium.h>

namespace facerec::detail {

inline void ensure_sodium() {
    static const bool ready = sodium_init() >= 0;
    if (!ready) throw std::runtime_error("libsodium failed to initialize");
}

}  // namespace facerec::detail
