#include "lstmsvdd/cache.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "window cache assumes a little-endian host");

namespace lstmsvdd {

namespace {

constexpr char kMagic[8] = {'L', 'S', 'W', 'C', 'A', 'C', 'H', 'E'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool get(std::ifstream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return in.good();
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("fnv1a64_file: cannot open " + path);
  std::uint64_t h = 14695981039346656037ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!in) break;
  }
  return h;
}

void save_window_cache(const std::string& path, const WindowCacheKey& key,
                       const std::vector<SequenceWindow>& windows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("save_window_cache: cannot write " + path);

  out.write(kMagic, sizeof(kMagic));
  put(out, kCacheVersion);
  put(out, key.file_hash);
  put(out, key.encoder_hash);
  put(out, key.lookback);
  put(out, key.stride);
  put(out, static_cast<std::uint8_t>(key.rule));
  put(out, static_cast<std::uint64_t>(windows.size()));

  for (const SequenceWindow& w : windows) {
    put(out, w.id);
    put(out, static_cast<std::uint8_t>(w.label));
    put(out, static_cast<std::uint8_t>(w.all_normal ? 1 : 0));
    put(out, static_cast<std::uint64_t>(w.length()));
    put(out, static_cast<std::uint64_t>(w.feature_dim()));
    for (const Vector& step : w.steps)
      out.write(reinterpret_cast<const char*>(step.data()),
                static_cast<std::streamsize>(step.size() * sizeof(double)));
  }
  if (!out)
    throw std::runtime_error("save_window_cache: write failed for " + path);
}

std::optional<std::vector<SequenceWindow>> load_window_cache(
    const std::string& path, const WindowCacheKey& key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::string_view(magic, 8) != std::string_view(kMagic, 8))
    return std::nullopt;

  std::uint32_t version = 0;
  std::uint64_t file_hash = 0, encoder_hash = 0, lookback = 0, stride = 0;
  std::uint8_t rule = 0;
  std::uint64_t count = 0;
  if (!get(in, version) || version != kCacheVersion) return std::nullopt;
  if (!get(in, file_hash) || !get(in, encoder_hash) || !get(in, lookback) ||
      !get(in, stride) || !get(in, rule) || !get(in, count))
    return std::nullopt;
  if (file_hash != key.file_hash || encoder_hash != key.encoder_hash ||
      lookback != key.lookback || stride != key.stride ||
      rule != static_cast<std::uint8_t>(key.rule))
    return std::nullopt;

  std::vector<SequenceWindow> windows;
  windows.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    SequenceWindow w;
    std::uint8_t label = 0, all_normal = 0;
    std::uint64_t length = 0, dim = 0;
    if (!get(in, w.id) || !get(in, label) || !get(in, all_normal) ||
        !get(in, length) || !get(in, dim))
      return std::nullopt;
    if (label > static_cast<std::uint8_t>(ClassLabel::Unknown) || length == 0)
      return std::nullopt;
    w.label = static_cast<ClassLabel>(label);
    w.all_normal = all_normal != 0;
    w.steps.assign(length, Vector(dim));
    for (Vector& step : w.steps) {
      in.read(reinterpret_cast<char*>(step.data()),
              static_cast<std::streamsize>(dim * sizeof(double)));
      if (!in) return std::nullopt;
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

}  // namespace lstmsvdd
