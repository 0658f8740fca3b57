#pragma once

// Splittable bzip2 reading.
//
// A bzip2 stream is a 4-byte header ("BZh" + level) followed by compressed
// blocks, each introduced by the 48-bit magic 0x314159265359, and closed by
// the 48-bit end-of-stream magic 0x177245385090 plus a combined CRC. The
// markers are bit-aligned, not byte-aligned. Blocks are independent, so once
// their boundaries are known they can be decoded concurrently.
//
// The magics are not escaped inside compressed payload, so every candidate
// boundary is validated by decoding: a block is accepted only if it decodes
// with a matching CRC and ends exactly at the next accepted boundary.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wikimpact::bzip2 {

inline constexpr std::uint64_t kBlockMagic = 0x314159265359ULL;
inline constexpr std::uint64_t kEndOfStreamMagic = 0x177245385090ULL;

/// Upper bound on the compressed size of a single block. A 900k block of
/// worst-case symbols at the 20-bit code length limit stays below this.
inline constexpr std::uint64_t kMaxCompressedBlockBits = 4ULL * 1024 * 1024 * 8;

enum class MarkerKind { Block, EndOfStream };

struct Marker {
  std::uint64_t bit = 0;
  MarkerKind kind = MarkerKind::Block;

  bool operator==(const Marker&) const = default;
};

/// Bit offsets where validated compressed blocks begin, in stream order.
struct BlockIndex {
  std::vector<std::uint64_t> offsets;
};

struct DecodedBlock {
  std::uint64_t begin_bit = 0;
  std::uint64_t end_bit = 0;
  std::string data;
};

/// Every bit position where either marker pattern occurs. Unvalidated: may
/// contain false positives from inside compressed payload.
std::vector<Marker> find_markers(std::span<const std::uint8_t> data);

/// Decodes the bits [begin_bit, end_bit) as a single block. Returns nullopt
/// if the range is not exactly one well-formed block with a matching CRC.
std::optional<std::string> decode_block(std::span<const std::uint8_t> data,
                                        std::uint64_t begin_bit, std::uint64_t end_bit);

/// True if `data` begins with a bzip2 stream header.
bool has_stream_header(std::span<const std::uint8_t> data) noexcept;

/// Incremental, order-preserving block decoder over an in-memory (typically
/// memory-mapped) compressed buffer. Handles concatenated streams.
///
/// Each call to next_batch() speculatively decodes up to 2 * parallelism
/// candidate blocks concurrently, then validates them in order. The buffer
/// must outlive the decoder.
class BlockDecoder {
 public:
  /// Throws MalformedHeader if `data` does not start with a stream header.
  BlockDecoder(std::span<const std::uint8_t> data, std::size_t parallelism);

  /// Next run of decoded blocks in stream order; empty once exhausted.
  /// Throws CorruptBlock naming the ordinal of the first undecodable block.
  std::vector<DecodedBlock> next_batch();

  std::size_t blocks_emitted() const noexcept { return blocks_emitted_; }

 private:
  bool settle_cursor();
  bool enter_stream_at_byte(std::uint64_t byte);
  DecodedBlock decode_at_cursor(std::size_t first_end_candidate,
                                std::optional<std::string> speculative);

  std::span<const std::uint8_t> data_;
  std::size_t parallelism_;
  std::vector<Marker> markers_;
  std::size_t cursor_ = 0;
  bool done_ = false;
  std::size_t blocks_emitted_ = 0;
};

/// Validated block start offsets. Requires decoding every block.
/// Throws MalformedHeader or CorruptBlock.
BlockIndex scan_bzip2_blocks(std::span<const std::uint8_t> data, std::size_t parallelism = 1);

/// Whole-buffer convenience wrapper around BlockDecoder.
std::string decompress(std::span<const std::uint8_t> data, std::size_t parallelism = 1);

}  // namespace wikimpact::bzip2
