#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace evosql {

// FNV-1a over bytes. Stable across platforms; used for seed derivation only,
// never for subset identity (fingerprints stay collision-free by construction).
uint64_t hash64(std::string_view data);

// Derives a per-call seed from a base seed plus a call path. The same
// (base, tag, parts) always yields the same seed on every platform.
uint64_t mix_seed(uint64_t base, std::string_view tag,
                  std::initializer_list<uint64_t> parts = {});

// Thin wrapper over mt19937_64 that avoids std::uniform_* distributions;
// their output is implementation-defined and would break cross-run replay.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Uniform in [0, n). n must be > 0.
  uint64_t below(uint64_t n) { return engine_() % n; }

  // Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // In-place Fisher-Yates; deterministic for a given seed.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// --- small string helpers -------------------------------------------------

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::string rtrim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::vector<std::string> split_lines(std::string_view text);

// Replaces every "{name}" placeholder with its value; unknown placeholders
// are left verbatim.
std::string fill_template(
    std::string_view tmpl,
    const std::vector<std::pair<std::string, std::string>>& values);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace evosql
