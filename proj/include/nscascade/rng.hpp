#pragma once

#include <array>
#include <cstdint>

namespace nscascade {

/// Counter-based random stream (Philox4x64-10).
///
/// A stream is keyed by (seed, stream_id); the 256-bit counter carries a
/// block index and a substream word.  Substreams let every node of a cascade
/// tree own its draws: a node's randomness depends only on
/// (seed, stream_id, node), never on the order in which nodes are visited.
/// That makes results independent of thread count and traversal order.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t substream = 0) noexcept;

    std::uint64_t seed() const noexcept { return key_[0]; }
    std::uint64_t stream_id() const noexcept { return key_[1]; }
    std::uint64_t substream_id() const noexcept { return substream_; }

    /// Fresh stream with the same key and a different substream word.
    RngStream substream(std::uint64_t id) const noexcept { return {key_[0], key_[1], id}; }

    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() noexcept;

    /// Unit-mean exponential.
    double exponential() noexcept;

    using Block = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    /// The raw bijection, exposed for known-answer tests.
    static Block philox(Block counter, Key key) noexcept;

private:
    Key key_;
    std::uint64_t substream_;
    std::uint64_t block_ = 0;
    Block buffer_{};
    unsigned used_ = 4;
};

/// SplitMix64 finalizer; used to derive independent seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

} // namespace nscascade
