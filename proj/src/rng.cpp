#include "interlace/rng.h"

namespace interlace::rng {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t path_index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(path_index + 0x632be59bd9b4e019ULL));
}

PathRng::PathRng(std::uint64_t stream) : engine_(stream) {}

PathRng PathRng::zero() {
    PathRng r;
    r.zero_ = true;
    return r;
}

double PathRng::normal() { return zero_ ? 0.0 : normal_(engine_); }

double PathRng::uniform() {
    if (zero_) return 1.0;
    // 53 random bits mapped to (0, 1].
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double PathRng::gamma(double shape) {
    if (zero_) return shape;
    std::gamma_distribution<double> g(shape, 1.0);
    return g(engine_);
}

} // namespace interlace::rng
