#pragma once

#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <random>

namespace interlace::rng {

std::uint64_t splitmix64(std::uint64_t x);

// Seed of the stream owned by one path; depends only on (seed, path_index),
// so results do not depend on how paths are scheduled across workers.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t path_index);

class PathRng {
public:
    explicit PathRng(std::uint64_t stream);
    static PathRng for_path(std::uint64_t seed, std::uint64_t path_index) {
        return PathRng(stream_seed(seed, path_index));
    }
    // Stub stream for tests: normals are 0, uniforms are 1.
    static PathRng zero();

    double normal();
    // Uniform on (0, 1].
    double uniform();
    double gamma(double shape);

private:
    PathRng() = default;
    std::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;
    bool zero_ = false;
};

} // namespace interlace::rng
