#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qrvol {

// splitmix64 finalizer; maps (base, stream) to well-separated seeds.
uint64_t derive_seed(uint64_t base, uint64_t stream);

class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    // Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }
    double exponential(double rate) { return -std::log(uniform()) / rate; }
    double normal() { return normal_(eng_); }
    uint64_t next() { return eng_(); }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace qrvol
