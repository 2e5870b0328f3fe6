#include "dpwilcox/cache.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dpwilcox/errors.hpp"
#include "dpwilcox/rng.hpp"
#include "dpwilcox/version.hpp"

namespace dpwilcox {

namespace {

constexpr char kMagic[8] = {'D', 'P', 'W', 'R', 'E', 'F', '\0', '\0'};

struct Header {
  char magic[8];
  std::uint32_t format_version;
  std::uint32_t reserved;
  std::int64_t n;
  std::uint64_t epsilon_bits;
  std::int64_t c;
  std::uint64_t seed;
};
static_assert(sizeof(Header) == 48);

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string reference_cache_filename(Eigen::Index n, double epsilon, std::int64_t c,
                                     std::uint64_t seed) {
  std::ostringstream name;
  name << "ref-n" << n << "-e" << hex16(std::bit_cast<std::uint64_t>(epsilon)) << "-c" << c
       << "-s" << hex16(seed) << "-v" << kCacheFormatVersion << ".dpwref";
  return name.str();
}

void cache_reference(const ReferenceDistribution& ref, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path target =
      fs::path(dir) / reference_cache_filename(ref.n, ref.epsilon, ref.c, ref.seed);
  const fs::path tmp = target.string() + ".tmp-" + hex16(mix64(ref.seed ^ ref.c));

  Header header{};
  std::memcpy(header.magic, kMagic, sizeof kMagic);
  header.format_version = kCacheFormatVersion;
  header.n = static_cast<std::int64_t>(ref.n);
  header.epsilon_bits = std::bit_cast<std::uint64_t>(ref.epsilon);
  header.c = ref.c;
  header.seed = ref.seed;

  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write reference cache file: " + tmp.string());
    out.write(reinterpret_cast<const char*>(&header), sizeof header);
    out.write(reinterpret_cast<const char*>(ref.draws.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(ref.c)));
    const std::uint64_t footer = static_cast<std::uint64_t>(ref.c);
    out.write(reinterpret_cast<const char*>(&footer), sizeof footer);
    if (!out) throw InputError("short write to reference cache file: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::optional<ReferenceDistribution> load_reference(Eigen::Index n, double epsilon,
                                                    std::int64_t c, std::uint64_t seed,
                                                    const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path path = fs::path(dir) / reference_cache_filename(n, epsilon, c, seed);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;

  const auto corrupt = [&](const char* what) -> std::optional<ReferenceDistribution> {
    std::cerr << "warning: ignoring corrupt reference cache file " << path.string() << " ("
              << what << "); regenerating\n";
    return std::nullopt;
  };

  Header header{};
  in.read(reinterpret_cast<char*>(&header), sizeof header);
  if (!in) return corrupt("truncated header");
  if (std::memcmp(header.magic, kMagic, sizeof kMagic) != 0) return corrupt("bad magic");
  if (header.format_version != kCacheFormatVersion) return std::nullopt;
  if (header.n != static_cast<std::int64_t>(n) ||
      header.epsilon_bits != std::bit_cast<std::uint64_t>(epsilon) || header.c != c ||
      header.seed != seed) {
    return corrupt("key fields do not match file name");
  }

  ReferenceDistribution ref{n, epsilon, c, seed, Eigen::ArrayXd(c)};
  in.read(reinterpret_cast<char*>(ref.draws.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(c)));
  if (!in) return corrupt("truncated draws");
  std::uint64_t footer = 0;
  in.read(reinterpret_cast<char*>(&footer), sizeof footer);
  if (!in || footer != static_cast<std::uint64_t>(c)) return corrupt("bad footer");
  if (!std::is_sorted(ref.draws.data(), ref.draws.data() + c)) {
    return corrupt("draws not sorted");
  }
  return ref;
}

ReferenceDistribution load_or_simulate(Eigen::Index n, double epsilon, std::int64_t c,
                                       std::uint64_t seed,
                                       const std::optional<std::string>& cache_dir,
                                       int threads) {
  if (cache_dir) {
    if (auto hit = load_reference(n, epsilon, c, seed, *cache_dir)) {
      return std::move(*hit);
    }
  }
  ReferenceDistribution ref = simulate_reference(n, epsilon, c, seed, threads);
  if (cache_dir) cache_reference(ref, *cache_dir);
  return ref;
}

}  // namespace dpwilcox
