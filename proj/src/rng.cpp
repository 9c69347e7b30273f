#include "sconcave/rng.hpp"

#include <cmath>

namespace sconcave {
namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::uint64_t h, const unsigned char* data, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
        h ^= data[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace

RngStream RngStream::root(std::uint64_t seed) {
    // Two finalizer rounds decorrelate small consecutive seeds.
    return RngStream(mix64(mix64(seed + kGamma)));
}

RngStream RngStream::child(std::string_view label) const {
    std::uint64_t h = fnv1a(0xCBF29CE484222325ULL ^ key_,
                            reinterpret_cast<const unsigned char*>(label.data()),
                            label.size());
    return RngStream(mix64(mix64(h)));
}

RngStream RngStream::child(std::uint64_t index) const {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(index >> (8 * i));
    std::uint64_t h = fnv1a(0x84222325CBF29CE4ULL ^ key_, bytes, 8);
    return RngStream(mix64(mix64(h)));
}

std::uint64_t RngStream::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
}

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
    if (have_cached_gaussian_) {
        have_cached_gaussian_ = false;
        return cached_gaussian_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    cached_gaussian_ = r * std::sin(theta);
    have_cached_gaussian_ = true;
    return r * std::cos(theta);
}

}  // namespace sconcave
