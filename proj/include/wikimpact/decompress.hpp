#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>

namespace wikimpact {

enum class Codec { None, Gzip, Bzip2 };

/// ".bz2" selects bzip2, ".gz" gzip, anything else is read as-is.
Codec codec_for_path(const std::filesystem::path& path);

/// Read-only memory mapping of a whole file.
class MappedFile {
 public:
  explicit MappedFile(const std::filesystem::path& path);
  ~MappedFile();
  MappedFile(const MappedFile&) = delete;
  MappedFile& operator=(const MappedFile&) = delete;
  MappedFile(MappedFile&& other) noexcept;
  MappedFile& operator=(MappedFile&& other) noexcept;

  std::span<const std::uint8_t> bytes() const noexcept { return {data_, size_}; }

 private:
  const std::uint8_t* data_ = nullptr;
  std::size_t size_ = 0;
};

/// Pull-based stream of decompressed bytes, delivered in order.
class ChunkSource {
 public:
  virtual ~ChunkSource() = default;
  /// Next chunk; nullopt once the input is exhausted. Chunks are never empty.
  virtual std::optional<std::string> next() = 0;
};

/// `requested` clamped to [1, hardware threads].
std::size_t effective_parallelism(std::size_t requested);

/// Opens `path` with the codec chosen by its suffix. Bzip2 blocks are decoded
/// on effective_parallelism(parallelism) threads and reassembled in order; gzip and plain inputs
/// are read sequentially. Throws IoError, MalformedHeader, CorruptBlock.
std::unique_ptr<ChunkSource> open_decompressed(const std::filesystem::path& path,
                                               std::size_t parallelism = 1);

/// Entire decompressed content. The bytes do not depend on `parallelism`.
std::string read_decompressed(const std::filesystem::path& path, std::size_t parallelism = 1);

}  // namespace wikimpact
