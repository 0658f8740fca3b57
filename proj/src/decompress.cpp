#include "wikimpact/decompress.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <thread>
#include <utility>

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include "wikimpact/bzip2_blocks.hpp"
#include "wikimpact/error.hpp"

namespace wikimpact {
namespace {

constexpr std::size_t kChunkSize = 1 << 20;

std::string errno_text() { return std::strerror(errno); }

class PlainSource final : public ChunkSource {
 public:
  explicit PlainSource(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open " + path.string());
  }

  std::optional<std::string> next() override {
    std::string chunk(kChunkSize, '\0');
    in_.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    chunk.resize(static_cast<std::size_t>(in_.gcount()));
    if (chunk.empty()) {
      if (in_.bad()) throw IoError("read error");
      return std::nullopt;
    }
    return chunk;
  }

 private:
  std::ifstream in_;
};

class GzipSource final : public ChunkSource {
 public:
  explicit GzipSource(const std::filesystem::path& path) : path_(path.string()) {
    file_ = gzopen(path_.c_str(), "rb");
    if (file_ == nullptr) throw IoError("cannot open " + path_);
    gzbuffer(file_, 256 * 1024);
  }
  ~GzipSource() override {
    if (file_ != nullptr) gzclose(file_);
  }
  GzipSource(const GzipSource&) = delete;
  GzipSource& operator=(const GzipSource&) = delete;

  std::optional<std::string> next() override {
    std::string chunk(kChunkSize, '\0');
    const int n = gzread(file_, chunk.data(), static_cast<unsigned>(chunk.size()));
    if (n < 0) {
      int code = 0;
      const char* msg = gzerror(file_, &code);
      throw IoError(path_ + ": gzip error: " + (msg ? msg : "unknown"));
    }
    if (n == 0) return std::nullopt;
    chunk.resize(static_cast<std::size_t>(n));
    return chunk;
  }

 private:
  std::string path_;
  gzFile file_ = nullptr;
};

class Bzip2Source final : public ChunkSource {
 public:
  Bzip2Source(MappedFile file, std::size_t parallelism)
      : file_(std::move(file)), decoder_(file_.bytes(), parallelism) {}

  std::optional<std::string> next() override {
    for (;;) {
      auto batch = decoder_.next_batch();
      if (batch.empty()) return std::nullopt;
      std::string chunk;
      std::size_t total = 0;
      for (const auto& b : batch) total += b.data.size();
      chunk.reserve(total);
      for (const auto& b : batch) chunk += b.data;
      if (!chunk.empty()) return chunk;
    }
  }

 private:
  MappedFile file_;
  bzip2::BlockDecoder decoder_;
};

}  // namespace

Codec codec_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".bz2") return Codec::Bzip2;
  if (ext == ".gz") return Codec::Gzip;
  return Codec::None;
}

MappedFile::MappedFile(const std::filesystem::path& path) {
  const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) throw IoError("cannot open " + path.string() + ": " + errno_text());
  struct stat st {};
  if (::fstat(fd, &st) != 0) {
    const auto msg = errno_text();
    ::close(fd);
    throw IoError("cannot stat " + path.string() + ": " + msg);
  }
  size_ = static_cast<std::size_t>(st.st_size);
  if (size_ > 0) {
    void* p = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd, 0);
    if (p == MAP_FAILED) {
      const auto msg = errno_text();
      ::close(fd);
      throw IoError("cannot map " + path.string() + ": " + msg);
    }
    ::madvise(p, size_, MADV_SEQUENTIAL);
    data_ = static_cast<const std::uint8_t*>(p);
  }
  ::close(fd);
}

MappedFile::~MappedFile() {
  if (data_ != nullptr) ::munmap(const_cast<std::uint8_t*>(data_), size_);
}

MappedFile::MappedFile(MappedFile&& other) noexcept
    : data_(std::exchange(other.data_, nullptr)), size_(std::exchange(other.size_, 0)) {}

MappedFile& MappedFile::operator=(MappedFile&& other) noexcept {
  if (this != &other) {
    if (data_ != nullptr) ::munmap(const_cast<std::uint8_t*>(data_), size_);
    data_ = std::exchange(other.data_, nullptr);
    size_ = std::exchange(other.size_, 0);
  }
  return *this;
}

std::size_t effective_parallelism(std::size_t requested) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  return std::clamp<std::size_t>(requested, 1, hw);
}

std::unique_ptr<ChunkSource> open_decompressed(const std::filesystem::path& path,
                                               std::size_t parallelism) {
  switch (codec_for_path(path)) {
    case Codec::Bzip2:
      return std::make_unique<Bzip2Source>(MappedFile(path), effective_parallelism(parallelism));
    case Codec::Gzip:
      return std::make_unique<GzipSource>(path);
    case Codec::None:
      break;
  }
  return std::make_unique<PlainSource>(path);
}

std::string read_decompressed(const std::filesystem::path& path, std::size_t parallelism) {
  auto source = open_decompressed(path, parallelism);
  std::string out;
  while (auto chunk = source->next()) out += *chunk;
  return out;
}

}  // namespace wikimpact
