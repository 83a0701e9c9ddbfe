#pragma once

#include <cmath>
#include <cstdint>

namespace jumpctl {

// Philox4x32-10 counter-based stream. Each (seed, stream_id) pair is an
// independent stream whose draws depend only on its own counter, so a bundle
// of paths is reproducible under any scheduling or worker count.
class RngStream {
   public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          id_lo_(static_cast<std::uint32_t>(stream_id)),
          id_hi_(static_cast<std::uint32_t>(stream_id >> 32)) {}

    std::uint64_t next_u64() {
        if (buf_pos_ >= 2) refill();
        return buf_[buf_pos_++];
    }

    // Uniform in the open interval (0,1).
    double next_u01() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53; }

    // Standard normal via Box-Muller; the twin value is cached so each pair of
    // uniforms yields two normals in a fixed order.
    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = next_u01();
        const double u2 = next_u01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    double next_exponential(double rate) { return -std::log(next_u01()) / rate; }

   private:
    void refill() {
        std::uint32_t c0 = static_cast<std::uint32_t>(block_);
        std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
        std::uint32_t c2 = id_lo_;
        std::uint32_t c3 = id_hi_;
        std::uint32_t k0 = key0_;
        std::uint32_t k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = 0xD2511F53ULL * c0;
            const std::uint64_t p1 = 0xCD9E8D57ULL * c2;
            const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
            const std::uint32_t n1 = static_cast<std::uint32_t>(p1);
            const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
            const std::uint32_t n3 = static_cast<std::uint32_t>(p0);
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        buf_[0] = (static_cast<std::uint64_t>(c1) << 32) | c0;
        buf_[1] = (static_cast<std::uint64_t>(c3) << 32) | c2;
        ++block_;
        buf_pos_ = 0;
    }

    std::uint32_t key0_, key1_, id_lo_, id_hi_;
    std::uint64_t block_ = 0;
    std::uint64_t buf_[2] = {0, 0};
    int buf_pos_ = 2;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace jumpctl
