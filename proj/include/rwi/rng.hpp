#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace rwi {

// Counter-based splittable generator (splitmix64 core).  A stream is a pure
// function of (seed, stream, counter), so identical call sequences reproduce
// bit-identical output and child streams are independent of the parent's
// position.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(derive_key(seed, stream)), counter_(0), seed_(seed), stream_(stream) {}

    std::uint64_t next_u64() {
        std::uint64_t z = key_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform double in [0, 1), 53 random bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // unbiased integer in [0, n)
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // Exact Poisson draw by multiplicative inversion, chunked so the product
    // never underflows for large means.
    long poisson(double mean) {
        if (mean < 0.0) throw std::invalid_argument("poisson: mean must be nonnegative");
        long total = 0;
        while (mean > 16.0) {
            total += poisson_knuth(16.0);
            mean -= 16.0;
        }
        return total + poisson_knuth(mean);
    }

    // index draw from cumulative weights (last entry = total mass)
    std::size_t discrete_from_cumulative(std::span<const double> cumulative) {
        if (cumulative.empty() || !(cumulative.back() > 0.0))
            throw std::invalid_argument("discrete draw from empty or zero-mass support");
        double u = uniform() * cumulative.back();
        std::size_t lo = 0, hi = cumulative.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (cumulative[mid] > u)
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    }

    // Independent child stream; depends only on (seed, stream, index), not on
    // how far this stream has advanced.
    RngStream substream(std::uint64_t index) const {
        std::uint64_t z = key_ ^ (0xD1B54A32D192ED03ULL + index * 0x8CB92BA72F3D8DD7ULL);
        z = (z ^ (z >> 29)) * 0xFF51AFD7ED558CCDULL;
        return RngStream(z, index + 1);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

  private:
    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
        z = (z ^ (z >> 33)) * 0xC2B2AE3D27D4EB4FULL;
        z = (z ^ (z >> 29)) * 0x165667B19E3779F9ULL;
        return z ^ (z >> 32);
    }

    long poisson_knuth(double mean) {
        if (mean <= 0.0) return 0;
        double threshold = std::exp(-mean);
        long k = 0;
        double prod = uniform();
        while (prod > threshold) {
            ++k;
            prod *= uniform();
        }
        return k;
    }

    std::uint64_t key_;
    std::uint64_t counter_;
    std::uint64_t seed_;
    std::uint64_t stream_;
};

}  // namespace rwi
