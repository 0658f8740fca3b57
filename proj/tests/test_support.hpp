#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wikimpact::testing {

inline std::filesystem::path data_dir() { return WIKIMPACT_TEST_DATA; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("wikimpact-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Runs a shell command and returns its stdout. Throws on nonzero exit.
inline std::string run_command(const std::string& command) {
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed: " + command);
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  if (status != 0) throw std::runtime_error("command failed: " + command);
  return out;
}

/// Compresses `path` into `path`.bz2 with the system bzip2 tool, keeping the
/// input. `level` 1..9 sets the block size in units of 100 kB.
inline std::filesystem::path bzip2_file(const std::filesystem::path& path, int level = 9) {
  run_command("bzip2 -k -f -" + std::to_string(level) + " '" + path.string() + "'");
  return path.string() + ".bz2";
}

/// Number of blocks the reference bzip2 decoder reports for `path`.
inline std::size_t reference_block_count(const std::filesystem::path& path) {
  const auto log = run_command("bzip2 -tvvv '" + path.string() + "' 2>&1");
  std::size_t count = 0;
  for (std::size_t pos = log.find(": huff+mtf"); pos != std::string::npos;
       pos = log.find(": huff+mtf", pos + 1)) {
    ++count;
  }
  return count;
}

/// Pseudo-random wiki-like text with a small vocabulary, so it compresses
/// the way natural text does.
/// Random alphanumeric lines; bzip2 reduces them to roughly 75 % of their size.
inline std::string random_text(std::size_t bytes, std::uint32_t seed) {
  static constexpr std::string_view kAlphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
  std::mt19937 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, kAlphabet.size() - 1);
  std::string out(bytes, '\n');
  for (std::size_t i = 0; i < bytes; ++i) {
    if (i % 80 != 79) out[i] = kAlphabet[pick(rng)];
  }
  return out;
}

inline std::string synthetic_text(std::size_t bytes, std::uint32_t seed) {
  static constexpr std::array<const char*, 24> kWords = {
      "the",    "page",  "revision", "author", "edit",    "text",    "wiki",  "article",
      "history", "link", "category", "source", "content", "word",    "ref",   "title",
      "[[link]]", "{{cite}}", "==Section==", "of", "and", "in", "to", "ä€𝄞"};
  std::mt19937 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, kWords.size() - 1);
  std::uniform_int_distribution<int> number(0, 99999);
  std::string out;
  out.reserve(bytes + 32);
  std::size_t column = 0;
  while (out.size() < bytes) {
    if (rng() % 11 == 0) {
      out += std::to_string(number(rng));
    } else {
      out += kWords[pick(rng)];
    }
    if (++column % 14 == 0) {
      out += '\n';
    } else {
      out += ' ';
    }
  }
  out.resize(bytes);
  return out;
}

}  // namespace wikimpact::testing
