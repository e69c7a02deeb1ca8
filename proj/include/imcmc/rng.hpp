#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "imcmc/errors.hpp"

namespace imcmc {

// Counter-based generator: output i of a stream is fmix64(key + i*golden),
// i.e. the splitmix64 sequence seeded at `key`. Streams are derived by
// hashing substream ids into the key, so (seed, level, replicate) splits
// never collide by construction and draws are reproducible across
// platforms and thread counts.
class Rng {
public:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

    static constexpr std::uint64_t fmix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    explicit Rng(std::uint64_t seed) : key_(fmix64(seed + kGolden)) {}

    // Derived independent substream; does not disturb this stream.
    [[nodiscard]] Rng stream(std::uint64_t sub) const {
        Rng r(0);
        r.key_ = fmix64(key_ ^ fmix64(sub + 0x632BE59BD9B4E019ull));
        r.ctr_ = 0;
        return r;
    }

    [[nodiscard]] Rng stream(std::string_view tag, std::uint64_t sub) const {
        std::uint64_t h = 0xCBF29CE484222325ull;
        for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001B3ull;
        return stream(h).stream(sub);
    }

    std::uint64_t next_u64() { return fmix64(key_ + (++ctr_) * kGolden); }

    // Uniform in [0, 1), 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform over {0, ..., n-1}, unbiased (Lemire with rejection).
    std::size_t next_index(std::size_t n) {
        if (n == 0) throw InvalidParameterError("next_index: empty range");
        std::uint64_t range = n;
        while (true) {
            std::uint64_t x = next_u64();
            __uint128_t m = static_cast<__uint128_t>(x) * range;
            auto lo = static_cast<std::uint64_t>(m);
            if (lo >= range || lo >= (-range) % range) return static_cast<std::size_t>(m >> 64);
        }
    }

    // Index drawn with probability weights[i] / total. Caller guarantees
    // total = sum(weights) > 0; a cumulated walk keeps this exact.
    std::size_t next_categorical(std::span<const double> weights, double total) {
        if (!(total > 0.0)) throw DegeneratePotentialError("categorical draw over zero-mass weights");
        double u = next_double() * total;
        double acc = 0.0;
        std::size_t last_positive = weights.size();
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] > 0.0) last_positive = i;
            acc += weights[i];
            if (u < acc) return i;
        }
        // Rounding pushed u past the last step; return the last positive atom.
        if (last_positive == weights.size()) throw DegeneratePotentialError("categorical draw over zero-mass weights");
        return last_positive;
    }

    // Standard normal via Box-Muller (deterministic two-draw form).
    double next_normal();

    // Laplace with scale 1/c centered at zero.
    double next_laplace(double c);

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

}  // namespace imcmc
