#include "wikimpact/bench.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "wikimpact/decompress.hpp"
#include "wikimpact/error.hpp"

namespace wikimpact {
namespace {

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

double parse_number(std::string_view field, std::string_view whole) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || end != field.data() + field.size() || !(v >= 0.0) ||
      field.front() == '-' || field.front() == '+') {
    throw InvalidSample("not a duration: '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

double compression_factor(const BenchSample& s) {
  if (!positive(s.decompressed_mb) || !positive(s.compressed_mb)) {
    throw InvalidSample("sample '" + s.label + "' needs positive sizes");
  }
  return s.decompressed_mb / s.compressed_mb;
}

double throughput(const BenchSample& s) {
  if (!positive(s.compressed_mb) || !positive(s.elapsed_ms) || !positive(s.compression_factor)) {
    throw InvalidSample("sample '" + s.label + "' needs positive size, time and factor");
  }
  return s.compressed_mb * 1000.0 / s.elapsed_ms * s.compression_factor;
}

double speedup_percent(double t_reference_s, double t_candidate_s) {
  if (!positive(t_reference_s) || !positive(t_candidate_s)) {
    throw InvalidSample("speed-up needs positive times");
  }
  return (t_reference_s / t_candidate_s - 1.0) * 100.0;
}

double parse_duration(std::string_view text) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (auto colon = text.find(':'); colon != std::string_view::npos; colon = text.find(':', start)) {
    fields.push_back(text.substr(start, colon - start));
    start = colon + 1;
  }
  fields.push_back(text.substr(start));
  if (fields.size() > 3) throw InvalidSample("not a duration: '" + std::string(text) + "'");
  double total = 0.0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const double v = parse_number(fields[i], text);
    const bool last = i + 1 == fields.size();
    // Only the last field may carry a fraction; later fields are base 60.
    if (!last && v != std::floor(v)) throw InvalidSample("not a duration: '" + std::string(text) + "'");
    if (i > 0 && v >= 60.0) throw InvalidSample("not a duration: '" + std::string(text) + "'");
    total = total * 60.0 + v;
  }
  return total;
}

BenchSample measure_decompression(const std::filesystem::path& path, std::size_t parallelism) {
  BenchSample s;
  s.label = path.filename().string();
  const auto on_disk = std::filesystem::file_size(path);
  const auto t0 = std::chrono::steady_clock::now();
  std::uintmax_t produced = 0;
  auto source = open_decompressed(path, parallelism);
  while (auto chunk = source->next()) produced += chunk->size();
  const auto t1 = std::chrono::steady_clock::now();
  s.compressed_mb = static_cast<double>(on_disk) / 1e6;
  s.decompressed_mb = static_cast<double>(produced) / 1e6;
  s.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  s.compression_factor = codec_for_path(path) == Codec::None || on_disk == 0 ? 1.0 : compression_factor(s);
  return s;
}

void write_bench_table(std::ostream& out, const std::vector<BenchSample>& samples) {
  std::size_t width = 5;
  for (const auto& s : samples) width = std::max(width, s.label.size());
  out << fmt::format("{:<{}}  {:>12}  {:>12}  {:>8}  {:>12}  {:>12}\n", "input", width, "S_d [MB]", "S_c [MB]",
                     "F_c", "t [ms]", "T_d [MB/s]");
  for (const auto& s : samples) {
    out << fmt::format("{:<{}}  {:>12.2f}  {:>12.2f}  {:>8.2f}  {:>12.1f}  {:>12.2f}\n", s.label, width,
                       s.decompressed_mb, s.compressed_mb, s.compression_factor, s.elapsed_ms, throughput(s));
  }
}

void write_bench_csv(std::ostream& out, const std::vector<BenchSample>& samples) {
  out << "input,decompressed_mb,compressed_mb,compression_factor,elapsed_ms,throughput_mb_s\n";
  for (const auto& s : samples) {
    out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.3f},{:.6f}\n", s.label, s.decompressed_mb, s.compressed_mb,
                       s.compression_factor, s.elapsed_ms, throughput(s));
  }
}

}  // namespace wikimpact
