#ifndef GMWMX_RNG_HPP
#define GMWMX_RNG_HPP

#include <cstdint>
#include <random>

namespace gmwmx {

/// Derives a well-mixed child seed from (master, index). Used to give every
/// replicate / worker task its own independent stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    // splitmix64 over the combined state
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double gaussian(double sd = 1.0) { return sd * normal_(engine_); }
    double uniform() { return unif_(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

} // namespace gmwmx

#endif
