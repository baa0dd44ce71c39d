#include "treecast/rng.hpp"

#include <cmath>

namespace treecast {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Rng Rng::stream(std::uint64_t master_seed, std::string_view tag, std::uint64_t index) {
    std::uint64_t s = splitmix64(master_seed ^ fnv1a64(tag));
    return Rng(splitmix64(s + 0x632be59bd9b4e019ULL * (index + 1)));
}

long Rng::poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    if (mean > 30.0) {
        double half = mean / 2.0;
        return poisson(half) + poisson(mean - half);
    }
    const double limit = std::exp(-mean);
    double prod = uniform();
    long count = 0;
    while (prod > limit) {
        ++count;
        prod *= uniform();
    }
    return count;
}

}  // namespace treecast
