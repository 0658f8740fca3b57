#include "wikimpact/bzip2_blocks.hpp"

#include <algorithm>
#include <array>

#include <bzlib.h>
#include <spdlog/spdlog.h>

#include "wikimpact/error.hpp"
#include "wikimpact/parallel.hpp"

namespace wikimpact::bzip2 {
namespace {

constexpr std::uint64_t kMask48 = (1ULL << 48) - 1;
constexpr std::array<std::uint64_t, 2> kMagics = {kBlockMagic, kEndOfStreamMagic};

// For every value of the second byte of an 8-byte window, the set of
// (magic, bit shift) combinations that could start in the first byte.
// Bit (m * 8 + s) is set when magic m at shift s puts `value` there.
constexpr std::array<std::uint16_t, 256> make_prefilter() {
  std::array<std::uint16_t, 256> table{};
  for (std::size_t m = 0; m < kMagics.size(); ++m) {
    for (unsigned s = 0; s < 8; ++s) {
      const auto value = static_cast<std::uint8_t>((kMagics[m] >> (32 + s)) & 0xFF);
      table[value] = static_cast<std::uint16_t>(table[value] | (1U << (m * 8 + s)));
    }
  }
  return table;
}

constexpr auto kPrefilter = make_prefilter();

std::uint8_t byte_at_bit(std::span<const std::uint8_t> data, std::uint64_t bit) noexcept {
  const std::uint64_t index = bit >> 3;
  const unsigned shift = bit & 7;
  const unsigned hi = index < data.size() ? data[index] : 0;
  if (shift == 0) return static_cast<std::uint8_t>(hi);
  const unsigned lo = index + 1 < data.size() ? data[index + 1] : 0;
  return static_cast<std::uint8_t>(((hi << shift) | (lo >> (8 - shift))) & 0xFF);
}

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(std::uint64_t value, unsigned bits) {
    while (bits > 0) {
      const unsigned take = std::min(bits, 8U - used_);
      const auto chunk = static_cast<unsigned>((value >> (bits - take)) & ((1U << take) - 1));
      if (used_ == 0) out_.push_back(0);
      out_.back() = static_cast<std::uint8_t>(out_.back() | (chunk << (8 - used_ - take)));
      used_ = (used_ + take) & 7;
      bits -= take;
    }
  }

  /// Appends `bits` bits of `src` starting at bit offset `from`.
  void copy(std::span<const std::uint8_t> src, std::uint64_t from, std::uint64_t bits) {
    if (used_ == 0) {
      const std::uint64_t whole = bits / 8;
      out_.reserve(out_.size() + whole + 16);
      for (std::uint64_t i = 0; i < whole; ++i) out_.push_back(byte_at_bit(src, from + i * 8));
      from += whole * 8;
      bits -= whole * 8;
    }
    while (bits >= 8) {
      put(byte_at_bit(src, from), 8);
      from += 8;
      bits -= 8;
    }
    if (bits > 0) put(byte_at_bit(src, from) >> (8 - bits), static_cast<unsigned>(bits));
  }

 private:
  std::vector<std::uint8_t>& out_;
  unsigned used_ = 0;
};

std::uint32_t read_u32(std::span<const std::uint8_t> data, std::uint64_t bit) noexcept {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | byte_at_bit(data, bit + 8 * i);
  return v;
}

struct DecompressStream {
  bz_stream strm{};
  bool live = false;

  DecompressStream() { live = BZ2_bzDecompressInit(&strm, 0, 0) == BZ_OK; }
  ~DecompressStream() {
    if (live) BZ2_bzDecompressEnd(&strm);
  }
  DecompressStream(const DecompressStream&) = delete;
  DecompressStream& operator=(const DecompressStream&) = delete;
};

}  // namespace

bool has_stream_header(std::span<const std::uint8_t> data) noexcept {
  return data.size() >= 4 && data[0] == 'B' && data[1] == 'Z' && data[2] == 'h' &&
         data[3] >= '1' && data[3] <= '9';
}

std::vector<Marker> find_markers(std::span<const std::uint8_t> data) {
  std::vector<Marker> markers;
  const std::uint64_t total_bits = static_cast<std::uint64_t>(data.size()) * 8;
  for (std::size_t i = 0; i + 1 < data.size(); ++i) {
    const std::uint16_t candidates = kPrefilter[data[i + 1]];
    if (candidates == 0) continue;
    std::uint64_t window = 0;
    for (std::size_t k = 0; k < 8; ++k) {
      window = (window << 8) | (i + k < data.size() ? data[i + k] : 0);
    }
    for (unsigned s = 0; s < 8; ++s) {
      const std::uint64_t bit = static_cast<std::uint64_t>(i) * 8 + s;
      if (bit + 48 > total_bits) break;
      const std::uint64_t value = (window >> (16 - s)) & kMask48;
      if ((candidates & (1U << s)) && value == kBlockMagic) {
        markers.push_back({bit, MarkerKind::Block});
      } else if ((candidates & (1U << (8 + s))) && value == kEndOfStreamMagic) {
        markers.push_back({bit, MarkerKind::EndOfStream});
      }
    }
  }
  return markers;
}

std::optional<std::string> decode_block(std::span<const std::uint8_t> data,
                                        std::uint64_t begin_bit, std::uint64_t end_bit) {
  // A block needs at least its magic and CRC.
  if (end_bit <= begin_bit + 80 || end_bit > static_cast<std::uint64_t>(data.size()) * 8) {
    return std::nullopt;
  }

  // Rewrap the block as a one-block stream. With a single block the combined
  // stream CRC equals the block CRC. Level 9 bounds every smaller level.
  std::vector<std::uint8_t> stream = {'B', 'Z', 'h', '9'};
  BitWriter writer(stream);
  writer.copy(data, begin_bit, end_bit - begin_bit);
  writer.put(kEndOfStreamMagic, 48);
  writer.put(read_u32(data, begin_bit + 48), 32);

  DecompressStream ds;
  if (!ds.live) return std::nullopt;
  ds.strm.next_in = reinterpret_cast<char*>(stream.data());
  ds.strm.avail_in = static_cast<unsigned>(stream.size());

  std::string out;
  std::size_t produced = 0;
  out.resize(std::max<std::size_t>(stream.size() * 4, 1 << 20));
  for (;;) {
    if (produced == out.size()) out.resize(out.size() * 2);
    ds.strm.next_out = out.data() + produced;
    const auto room = static_cast<unsigned>(std::min<std::size_t>(out.size() - produced, 1U << 30));
    ds.strm.avail_out = room;
    const int rc = BZ2_bzDecompress(&ds.strm);
    produced += room - ds.strm.avail_out;
    if (rc == BZ_STREAM_END) break;
    if (rc != BZ_OK) return std::nullopt;
    if (ds.strm.avail_in == 0 && ds.strm.avail_out != 0) return std::nullopt;  // truncated
  }
  // Trailing input means the range held more than one block.
  if (ds.strm.avail_in != 0) return std::nullopt;
  out.resize(produced);
  return out;
}

BlockDecoder::BlockDecoder(std::span<const std::uint8_t> data, std::size_t parallelism)
    : data_(data), parallelism_(std::max<std::size_t>(parallelism, 1)) {
  if (!has_stream_header(data_)) throw MalformedHeader("input is not a bzip2 stream");
  markers_ = find_markers(data_);
  done_ = !enter_stream_at_byte(0);
}

bool BlockDecoder::enter_stream_at_byte(std::uint64_t byte) {
  if (byte >= data_.size()) return false;
  if (!has_stream_header(data_.subspan(byte))) {
    spdlog::warn("ignoring {} bytes of trailing garbage after bzip2 data", data_.size() - byte);
    return false;
  }
  const std::uint64_t first = byte * 8 + 32;
  auto it = std::lower_bound(markers_.begin(), markers_.end(), first,
                             [](const Marker& m, std::uint64_t bit) { return m.bit < bit; });
  if (it == markers_.end() || it->bit != first) {
    throw CorruptBlock(blocks_emitted_, "stream header is not followed by a block marker");
  }
  cursor_ = static_cast<std::size_t>(it - markers_.begin());
  return true;
}

bool BlockDecoder::settle_cursor() {
  while (!done_ && markers_[cursor_].kind == MarkerKind::EndOfStream) {
    // End magic, 32-bit combined CRC, then padding to a byte boundary.
    const std::uint64_t next_byte = (markers_[cursor_].bit + 48 + 32 + 7) / 8;
    if (!enter_stream_at_byte(next_byte)) done_ = true;
  }
  return !done_;
}

DecodedBlock BlockDecoder::decode_at_cursor(std::size_t first_end_candidate,
                                            std::optional<std::string> speculative) {
  const std::uint64_t begin = markers_[cursor_].bit;
  auto accept = [&](std::size_t end_index, std::string bytes) {
    DecodedBlock block{begin, markers_[end_index].bit, std::move(bytes)};
    cursor_ = end_index;
    ++blocks_emitted_;
    return block;
  };

  if (speculative) return accept(first_end_candidate, std::move(*speculative));

  // The speculative range (if any) failed: the next marker was a false
  // positive inside this block, so widen the range one candidate at a time.
  for (std::size_t e = first_end_candidate; e < markers_.size(); ++e) {
    if (markers_[e].bit - begin > kMaxCompressedBlockBits) break;
    if (auto bytes = decode_block(data_, begin, markers_[e].bit)) return accept(e, std::move(*bytes));
  }
  throw CorruptBlock(blocks_emitted_, "no valid block boundary found (CRC mismatch or truncation)");
}

std::vector<DecodedBlock> BlockDecoder::next_batch() {
  std::vector<DecodedBlock> out;
  if (done_ || !settle_cursor()) return out;

  std::vector<std::size_t> starts;
  const std::size_t window = 2 * parallelism_;
  for (std::size_t k = cursor_; k + 1 < markers_.size() && starts.size() < window; ++k) {
    if (markers_[k].kind == MarkerKind::Block) starts.push_back(k);
  }
  std::vector<std::optional<std::string>> speculative(starts.size());
  parallel_for(parallelism_, starts.size(), [&](std::size_t i) {
    speculative[i] = decode_block(data_, markers_[starts[i]].bit, markers_[starts[i] + 1].bit);
  });

  if (starts.empty()) {
    out.push_back(decode_at_cursor(cursor_ + 1, std::nullopt));
    return out;
  }
  while (settle_cursor()) {
    auto it = std::find(starts.begin(), starts.end(), cursor_);
    if (it == starts.end()) break;
    auto& guess = speculative[static_cast<std::size_t>(it - starts.begin())];
    // A failed guess already ruled out the adjacent marker.
    const std::size_t first_end = guess ? cursor_ + 1 : cursor_ + 2;
    out.push_back(decode_at_cursor(first_end, std::move(guess)));
  }
  return out;
}

BlockIndex scan_bzip2_blocks(std::span<const std::uint8_t> data, std::size_t parallelism) {
  BlockIndex index;
  BlockDecoder decoder(data, parallelism);
  for (auto batch = decoder.next_batch(); !batch.empty(); batch = decoder.next_batch()) {
    for (const auto& block : batch) index.offsets.push_back(block.begin_bit);
  }
  return index;
}

std::string decompress(std::span<const std::uint8_t> data, std::size_t parallelism) {
  std::string out;
  BlockDecoder decoder(data, parallelism);
  for (auto batch = decoder.next_batch(); !batch.empty(); batch = decoder.next_batch()) {
    for (auto& block : batch) out += block.data;
  }
  return out;
}

}  // namespace wikimpact::bzip2
