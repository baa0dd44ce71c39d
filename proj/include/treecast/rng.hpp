#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace treecast {

// All randomness in a run flows from one master seed. Consumers draw from
// named substreams derived from (seed, tag, index), so adding or reordering
// one consumer never shifts another consumer's sequence. mt19937_64 output
// is fully pinned by the standard, which keeps runs byte-reproducible
// across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    static Rng stream(std::uint64_t master_seed, std::string_view tag, std::uint64_t index = 0);

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Exact Poisson sampling. Knuth's product method below mean 30; larger
    // means are split in half and summed (Poisson additivity), which keeps
    // the running product away from underflow.
    long poisson(double mean);

private:
    std::mt19937_64 eng_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace treecast
