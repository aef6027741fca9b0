#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace difflab {

// splitmix64 finalizer; used to turn (root seed, label, counter) triples into
// well-separated engine seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_label(std::string_view label) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Deterministic random stream. Streams are derived from one root seed by
// labeled splitting, so adding a consumer never perturbs another's draws and
// parallel work can use per-item streams (counter-based) independent of the
// execution schedule.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : eng_(mix64(seed)) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0,1)
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // standard normal, Marsaglia polar method (kept in-house so sequences are
    // identical across standard library implementations)
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    void normal_fill(double* out, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) out[i] = normal();
    }

    std::vector<double> normal_vec(std::size_t n) {
        std::vector<double> v(n);
        normal_fill(v.data(), n);
        return v;
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index = 0) {
    return mix64(mix64(root ^ hash_label(label)) ^ index);
}

inline RngStream derive_stream(std::uint64_t root, std::string_view label, std::uint64_t index = 0) {
    return RngStream(derive_seed(root, label, index));
}

} // namespace difflab
