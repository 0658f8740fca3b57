#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "test_support.hpp"
#include "wikimpact/bzip2_blocks.hpp"
#include "wikimpact/decompress.hpp"
#include "wikimpact/error.hpp"
#include "wikimpact/file_merger.hpp"
#include "wikimpact/page_splitter.hpp"

namespace wikimpact {
namespace {

using testing::TempDir;
using testing::read_file;
using testing::write_file;

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

TEST(Bzip2Blocks, ReferenceSamplesDecodeIdentically) {
  for (const char* name : {"sample1", "sample2", "sample3"}) {
    const auto expected = read_file(testing::data_dir() / (std::string(name) + ".ref"));
    for (std::size_t p : {1, 3, 8}) {
      EXPECT_EQ(read_decompressed(testing::data_dir() / (std::string(name) + ".bz2"), p), expected)
          << name << " at parallelism " << p;
    }
  }
}

TEST(Bzip2Blocks, SingleBlockHello) {
  TempDir dir;
  write_file(dir / "hello.txt", "hello\n");
  const auto compressed = bytes_of(read_file(testing::bzip2_file(dir / "hello.txt")));
  const auto index = bzip2::scan_bzip2_blocks(compressed);
  ASSERT_EQ(index.offsets.size(), 1U);
  EXPECT_EQ(index.offsets[0], 32U);
  EXPECT_EQ(bzip2::decompress(compressed), "hello\n");
}

TEST(Bzip2Blocks, BlockCountMatchesReferenceDecoder) {
  TempDir dir;
  write_file(dir / "text.txt", testing::synthetic_text(1'500'000, 7));
  const auto path = testing::bzip2_file(dir / "text.txt", 1);
  const auto compressed = bytes_of(read_file(path));
  const auto index = bzip2::scan_bzip2_blocks(compressed, 4);
  EXPECT_GT(index.offsets.size(), 2U);
  EXPECT_EQ(index.offsets.size(), testing::reference_block_count(path));
  for (std::size_t i = 1; i < index.offsets.size(); ++i) {
    EXPECT_LT(index.offsets[i - 1], index.offsets[i]);
  }
}

TEST(Bzip2Blocks, OffsetsAreBitGranular) {
  TempDir dir;
  write_file(dir / "text.txt", testing::synthetic_text(900'000, 11));
  const auto compressed = bytes_of(read_file(testing::bzip2_file(dir / "text.txt", 1)));
  const auto index = bzip2::scan_bzip2_blocks(compressed);
  bool unaligned = false;
  for (auto bit : index.offsets) unaligned = unaligned || bit % 8 != 0;
  EXPECT_TRUE(unaligned) << "expected at least one block to start off a byte boundary";
}

TEST(Bzip2Blocks, ConcatenatedStreams) {
  TempDir dir;
  write_file(dir / "a.txt", testing::synthetic_text(250'000, 1));
  write_file(dir / "b.txt", "second stream\n");
  const auto a = read_file(testing::bzip2_file(dir / "a.txt", 1));
  const auto b = read_file(testing::bzip2_file(dir / "b.txt"));
  const auto joined = bytes_of(a + b);
  const auto index = bzip2::scan_bzip2_blocks(joined);
  EXPECT_GE(index.offsets.size(), 2U);
  EXPECT_EQ(bzip2::decompress(joined, 2), read_file(dir / "a.txt") + "second stream\n");
}

TEST(Bzip2Blocks, ParallelismDoesNotChangeOutput) {
  TempDir dir;
  const auto text = testing::synthetic_text(2'000'000, 3);
  write_file(dir / "t.txt", text);
  const auto path = testing::bzip2_file(dir / "t.txt", 2);
  for (std::size_t p : {1, 2, 5, 8}) EXPECT_EQ(read_decompressed(path, p), text);
}

TEST(Bzip2Blocks, RejectsNonBzip2Input) {
  const auto junk = bytes_of("PK\x03\x04 not bzip2");
  EXPECT_THROW(bzip2::scan_bzip2_blocks(junk), MalformedHeader);
}

TEST(Bzip2Blocks, CorruptPayloadNamesBlockOrdinal) {
  TempDir dir;
  write_file(dir / "t.txt", testing::synthetic_text(350'000, 5));
  auto compressed = bytes_of(read_file(testing::bzip2_file(dir / "t.txt", 1)));
  const auto index = bzip2::scan_bzip2_blocks(compressed);
  ASSERT_GE(index.offsets.size(), 3U);
  // Flip a byte well inside the second block.
  const auto target = (index.offsets[1] + index.offsets[2]) / 16;
  compressed[target] ^= 0x5A;
  try {
    bzip2::decompress(compressed);
    FAIL() << "corruption went unnoticed";
  } catch (const CorruptBlock& e) {
    EXPECT_EQ(e.ordinal(), 1U);
  }
}

TEST(Bzip2Blocks, TruncatedStreamIsCorrupt) {
  TempDir dir;
  write_file(dir / "t.txt", testing::synthetic_text(200'000, 9));
  auto compressed = bytes_of(read_file(testing::bzip2_file(dir / "t.txt", 1)));
  compressed.resize(compressed.size() / 2);
  EXPECT_THROW(bzip2::decompress(compressed), CorruptBlock);
}

TEST(Decompress, GzipAndPlainPassthrough) {
  TempDir dir;
  const auto text = testing::synthetic_text(300'000, 2);
  write_file(dir / "t.txt", text);
  testing::run_command("gzip -k '" + (dir / "t.txt").string() + "'");
  EXPECT_EQ(read_decompressed(dir / "t.txt.gz"), text);
  EXPECT_EQ(read_decompressed(dir / "t.txt"), text);
  write_file(dir / "empty.txt", "");
  EXPECT_EQ(read_decompressed(dir / "empty.txt"), "");
}

TEST(Decompress, CodecFromSuffix) {
  EXPECT_EQ(codec_for_path("x.xml.bz2"), Codec::Bzip2);
  EXPECT_EQ(codec_for_path("pagecounts-20170501-000000.gz"), Codec::Gzip);
  EXPECT_EQ(codec_for_path("dump.xml"), Codec::None);
}

TEST(Decompress, MissingFileIsIoError) {
  EXPECT_THROW(read_decompressed("/nonexistent/dump.xml"), IoError);
  EXPECT_THROW(read_decompressed("/nonexistent/dump.xml.bz2"), IoError);
}

TEST(PageSplitter, SplitsPagesAndDropsWrapper) {
  const auto records = split_pages("<mediawiki><page>A</page><page>B</page></mediawiki>");
  ASSERT_EQ(records.size(), 2U);
  EXPECT_EQ(records[0].xml, "<page>A</page>");
  EXPECT_EQ(records[1].xml, "<page>B</page>");
}

TEST(PageSplitter, NoPages) {
  EXPECT_TRUE(split_pages("<mediawiki><siteinfo>x</siteinfo></mediawiki>").empty());
  EXPECT_TRUE(split_pages("").empty());
}

TEST(PageSplitter, IgnoresLookalikeTags) {
  const auto records = split_pages("<pageview>1</pageview><page id=\"3\">x</page>");
  ASSERT_EQ(records.size(), 1U);
  EXPECT_EQ(records[0].xml, "<page id=\"3\">x</page>");
}

TEST(PageSplitter, ChunkBoundariesAnywhere) {
  std::string dump = "<mediawiki>\n<siteinfo>s</siteinfo>\n";
  for (int i = 0; i < 20; ++i) {
    dump += "  <page>\n    <title>T" + std::to_string(i) + "</title>\n  </page>\n";
  }
  dump += "</mediawiki>\n";
  const auto expected = split_pages(dump);
  ASSERT_EQ(expected.size(), 20U);
  for (std::size_t step : {1, 2, 3, 5, 7, 13, 64}) {
    PageSplitter splitter;
    std::vector<RawPageRecord> got;
    for (std::size_t i = 0; i < dump.size(); i += step) {
      splitter.feed(std::string_view(dump).substr(i, step));
      while (auto r = splitter.next()) got.push_back(std::move(*r));
    }
    splitter.finish();
    EXPECT_EQ(got, expected) << "step " << step;
  }
}

TEST(PageSplitter, UnterminatedPage) {
  EXPECT_THROW(split_pages("<mediawiki><page><title>Cut</title>"), UnterminatedPage);
}

TEST(PageSplitter, OversizedRecordNamesTitle) {
  PageSplitter splitter(64);
  splitter.feed("<page><title>Huge</title><text>" + std::string(200, 'x'));
  try {
    while (splitter.next()) {
    }
    FAIL() << "expected UnsplittableRecord";
  } catch (const UnsplittableRecord& e) {
    EXPECT_NE(std::string(e.what()).find("Huge"), std::string::npos);
  }
}

TEST(Dedup, KeepsFirstOccurrenceInOrder) {
  const std::vector<RawPageRecord> in = {{"<page>1</page>"}, {"<page>2</page>"}, {"<page>1</page>"}};
  const std::vector<RawPageRecord> want = {{"<page>1</page>"}, {"<page>2</page>"}};
  EXPECT_EQ(dedup_records(in), want);
  EXPECT_EQ(dedup_records(want), want);
}

TEST(Dedup, SplitThenDedupIsIdempotent) {
  const auto records = dedup_records(split_pages("<page>a</page><page>b</page><page>a</page>"));
  EXPECT_EQ(dedup_records(records), records);
}

class MergeFilesTest : public ::testing::Test {
 protected:
  void SetUp() override {
    write_file(in_ / "pagecounts-20170501-020000", "aa C 3 30\n");
    write_file(in_ / "pagecounts-20170501-000000", "aa A 1 10\n");
    write_file(in_ / "pagecounts-20170501-010000", "aa B 2 20");  // no final newline
  }

  TempDir in_;
  TempDir out_;
};

TEST_F(MergeFilesTest, ConcatenatesInFilenameOrder) {
  const auto report = merge_files(in_.path(), out_ / "merged", Codec::None);
  EXPECT_EQ(report.files_read, 3U);
  EXPECT_EQ(report.lines_written, 3U);
  EXPECT_EQ(read_file(out_ / "merged"), "aa A 1 10\naa B 2 20\naa C 3 30\n");
  EXPECT_EQ(report.bytes_in, 29U);
  EXPECT_EQ(report.bytes_out, 30U);
}

TEST_F(MergeFilesTest, CompressedRoundTrips) {
  const std::string expected = "aa A 1 10\naa B 2 20\naa C 3 30\n";
  const auto gz = merge_files(in_.path(), out_ / "merged.gz", Codec::Gzip);
  EXPECT_EQ(read_decompressed(out_ / "merged.gz"), expected);
  EXPECT_EQ(gz.bytes_out, std::filesystem::file_size(out_ / "merged.gz"));
  merge_files(in_.path(), out_ / "merged.bz2", Codec::Bzip2);
  EXPECT_EQ(read_decompressed(out_ / "merged.bz2"), expected);
}

TEST_F(MergeFilesTest, DecodesCompressedInputs) {
  testing::run_command("gzip '" + (in_ / "pagecounts-20170501-010000").string() + "'");
  merge_files(in_.path(), out_ / "merged", Codec::None);
  EXPECT_EQ(read_file(out_ / "merged"), "aa A 1 10\naa B 2 20\naa C 3 30\n");
}

TEST(MergeFiles, EmptyDirectory) {
  TempDir in;
  TempDir out;
  EXPECT_THROW(merge_files(in.path(), out / "x", Codec::None), EmptyDirectory);
  EXPECT_THROW(merge_files(in / "missing", out / "x", Codec::None), IoError);
}

}  // namespace
}  // namespace wikimpact
