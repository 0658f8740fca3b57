#include "wikimpact/file_merger.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <bzlib.h>
#include <zlib.h>

#include "wikimpact/error.hpp"

namespace wikimpact {
namespace {

namespace fs = std::filesystem;

class Sink {
 public:
  virtual ~Sink() = default;
  virtual void write(std::string_view bytes) = 0;
  virtual void close() = 0;
};

class PlainSink final : public Sink {
 public:
  explicit PlainSink(const fs::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot create " + path.string());
  }
  void write(std::string_view bytes) override {
    out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out_) throw IoError("write failed");
  }
  void close() override {
    out_.close();
    if (out_.fail()) throw IoError("close failed");
  }

 private:
  std::ofstream out_;
};

class GzipSink final : public Sink {
 public:
  explicit GzipSink(const fs::path& path) {
    file_ = gzopen(path.c_str(), "wb6");
    if (file_ == nullptr) throw IoError("cannot create " + path.string());
  }
  ~GzipSink() override {
    if (file_ != nullptr) gzclose(file_);
  }
  GzipSink(const GzipSink&) = delete;
  GzipSink& operator=(const GzipSink&) = delete;

  void write(std::string_view bytes) override {
    while (!bytes.empty()) {
      const auto n = static_cast<unsigned>(std::min<std::size_t>(bytes.size(), 1U << 30));
      if (gzwrite(file_, bytes.data(), n) != static_cast<int>(n)) throw IoError("gzip write failed");
      bytes.remove_prefix(n);
    }
  }
  void close() override {
    const int rc = gzclose(file_);
    file_ = nullptr;
    if (rc != Z_OK) throw IoError("gzip close failed");
  }

 private:
  gzFile file_ = nullptr;
};

class Bzip2Sink final : public Sink {
 public:
  explicit Bzip2Sink(const fs::path& path) {
    fp_ = std::fopen(path.c_str(), "wb");
    if (fp_ == nullptr) throw IoError("cannot create " + path.string());
    int err = BZ_OK;
    bz_ = BZ2_bzWriteOpen(&err, fp_, 9, 0, 0);
    if (err != BZ_OK) {
      std::fclose(fp_);
      throw IoError("bzip2 writer init failed");
    }
  }
  ~Bzip2Sink() override {
    if (bz_ != nullptr) {
      int err = BZ_OK;
      BZ2_bzWriteClose(&err, bz_, 1, nullptr, nullptr);
    }
    if (fp_ != nullptr) std::fclose(fp_);
  }
  Bzip2Sink(const Bzip2Sink&) = delete;
  Bzip2Sink& operator=(const Bzip2Sink&) = delete;

  void write(std::string_view bytes) override {
    while (!bytes.empty()) {
      const auto n = static_cast<int>(std::min<std::size_t>(bytes.size(), 1U << 30));
      int err = BZ_OK;
      BZ2_bzWrite(&err, bz_, const_cast<char*>(bytes.data()), n);
      if (err != BZ_OK) throw IoError("bzip2 write failed");
      bytes.remove_prefix(static_cast<std::size_t>(n));
    }
  }
  void close() override {
    int err = BZ_OK;
    BZ2_bzWriteClose(&err, bz_, 0, nullptr, nullptr);
    bz_ = nullptr;
    const int rc = std::fclose(fp_);
    fp_ = nullptr;
    if (err != BZ_OK || rc != 0) throw IoError("bzip2 close failed");
  }

 private:
  FILE* fp_ = nullptr;
  BZFILE* bz_ = nullptr;
};

std::unique_ptr<Sink> open_sink(const fs::path& path, Codec codec) {
  switch (codec) {
    case Codec::Gzip:
      return std::make_unique<GzipSink>(path);
    case Codec::Bzip2:
      return std::make_unique<Bzip2Sink>(path);
    case Codec::None:
      break;
  }
  return std::make_unique<PlainSink>(path);
}

}  // namespace

MergeReport merge_files(const fs::path& input_dir, const fs::path& output, Codec codec) {
  std::error_code ec;
  if (!fs::is_directory(input_dir, ec)) throw IoError(input_dir.string() + " is not a directory");

  std::vector<fs::path> inputs;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    if (entry.is_regular_file() && !fs::equivalent(entry.path(), output, ec)) {
      inputs.push_back(entry.path());
    }
  }
  if (inputs.empty()) throw EmptyDirectory(input_dir.string() + " contains no input files");
  std::sort(inputs.begin(), inputs.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  MergeReport report;
  auto sink = open_sink(output, codec);
  for (const auto& path : inputs) {
    report.bytes_in += fs::file_size(path);
    auto source = open_decompressed(path);
    char last = '\n';
    while (auto chunk = source->next()) {
      report.lines_written += static_cast<std::uint64_t>(std::count(chunk->begin(), chunk->end(), '\n'));
      last = chunk->back();
      sink->write(*chunk);
    }
    if (last != '\n') {
      sink->write("\n");
      ++report.lines_written;
    }
    ++report.files_read;
  }
  sink->close();
  report.bytes_out = fs::file_size(output);
  return report;
}

}  // namespace wikimpact
