#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace wikimpact {

struct BenchSample {
  std::string label;
  double decompressed_mb = 0.0;
  double compressed_mb = 0.0;
  double elapsed_ms = 0.0;
  /// 1 for uncompressed inputs.
  double compression_factor = 1.0;
};

/// S_d / S_c. Throws InvalidSample unless both sizes are positive.
double compression_factor(const BenchSample& s);

/// (S_c * 1000 / t_ms) * c_d in MB/s, i.e. decompressed megabytes per second.
/// Throws InvalidSample for non-positive size, time or factor.
double throughput(const BenchSample& s);

/// (t_reference / t_candidate - 1) * 100. Throws InvalidSample unless both
/// times are positive.
double speedup_percent(double t_reference_s, double t_candidate_s);

/// Seconds from "h:mm:ss", "m:ss.cc", "ss.cc" or "ss" (fields after the
/// first must be < 60). Throws InvalidSample on anything else.
double parse_duration(std::string_view text);

/// Decompresses `path` on `parallelism` workers, discarding the output, and
/// records sizes (in MB of 10^6 bytes) and wall time.
BenchSample measure_decompression(const std::filesystem::path& path, std::size_t parallelism);

/// Aligned table: label, S_d, S_c, F_c, t, T_d.
void write_bench_table(std::ostream& out, const std::vector<BenchSample>& samples);
void write_bench_csv(std::ostream& out, const std::vector<BenchSample>& samples);

}  // namespace wikimpact
