#pragma once

#include <cstdint>
#include <string_view>

namespace sconcave {

// Counter-based pseudo-random stream.  A stream is a pure function of
// (key, counter): draw i of a stream with key k is mix(k + (i+1)*GAMMA),
// the splitmix64 output function.  Child streams derive a new key by
// hashing a path label into the parent key, so distinct paths give
// statistically independent streams and the whole tree is reproducible
// from the root seed alone.
class RngStream {
  public:
    static RngStream root(std::uint64_t seed);

    // Derive an independent child stream; labels are path components
    // like "round"/"eval"/"seed".
    RngStream child(std::string_view label) const;
    RngStream child(std::uint64_t index) const;

    std::uint64_t next_u64();
    // Uniform in [0, 1), 53 random bits.
    double next_double();
    // Standard normal, Box-Muller on the stream.
    double next_gaussian();

    std::uint64_t key() const { return key_; }

  private:
    explicit RngStream(std::uint64_t key) : key_(key) {}

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    bool have_cached_gaussian_ = false;
    double cached_gaussian_ = 0.0;
};

}  // namespace sconcave
