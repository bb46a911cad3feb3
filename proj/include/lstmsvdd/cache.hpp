#pragma once

#include "lstmsvdd/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lstmsvdd {

// FNV-1a, 64-bit. Used to key caches and to stamp models with the encoder
// they were trained against.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::string& path);

// Everything that determines the content of an encoded-window set. A cache
// file is only served back when all of it matches.
struct WindowCacheKey {
  std::uint64_t file_hash = 0;
  std::uint64_t encoder_hash = 0;
  std::uint64_t lookback = 0;
  std::uint64_t stride = 0;
  WindowLabelRule rule = WindowLabelRule::LastRecord;
};

void save_window_cache(const std::string& path, const WindowCacheKey& key,
                       const std::vector<SequenceWindow>& windows);

// Returns the cached windows when the file exists, carries the current
// format version, and was written for exactly this key; otherwise nullopt.
// A stale or truncated cache is a miss, never an error.
std::optional<std::vector<SequenceWindow>> load_window_cache(
    const std::string& path, const WindowCacheKey& key);

}  // namespace lstmsvdd
