#pragma once

#include <sodium.h>

#include "bcac/error.hpp"

namespace bcac {

inline void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) fail(ErrorKind::Config, "libsodium failed to initialize");
}

}  // namespace bcac
