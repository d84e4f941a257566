#pragma once

#include <cstdint>
#include <random>

namespace trinity {

/// Pinned pseudorandom stream ("trinity-rng v1").
///
///   engine   std::mt19937_64 seeded with the single-integer constructor
///            (output sequence fixed by the C++ standard)
///   uniform  (next() >> 11) * 2^-53, in [0, 1)
///   normal   Box-Muller on (1 - uniform, uniform); the sine variate is kept for
///            the following call
///
/// Standard-library distributions are avoided because their algorithms are
/// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace trinity
