#pragma once

#include <cstdint>
#include <filesystem>

#include "wikimpact/decompress.hpp"

namespace wikimpact {

struct MergeReport {
  std::uint64_t files_read = 0;
  std::uint64_t lines_written = 0;
  /// On-disk size of all inputs.
  std::uint64_t bytes_in = 0;
  /// On-disk size of the output.
  std::uint64_t bytes_out = 0;

  bool operator==(const MergeReport&) const = default;
};

/// Concatenates the lines of every regular file in `input_dir` (in
/// lexicographic filename order, decompressing ".gz"/".bz2" inputs) into a
/// single output encoded with `codec`. A missing final newline is added so
/// lines of consecutive files never fuse.
///
/// Throws EmptyDirectory when the directory holds no regular files and
/// IoError on read or write failures.
MergeReport merge_files(const std::filesystem::path& input_dir,
                        const std::filesystem::path& output, Codec codec);

}  // namespace wikimpact
