#pragma once

// Signature carver for freed metadata-store pages in flat byte streams
// (raw images, exported unallocated space). Every sector boundary is
// probed; hits are validated and routed through the record codec.

#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sv2/digest.hpp"
#include "sv2/format.hpp"
#include "sv2/records.hpp"

namespace sv2 {

enum class Confidence { Confirmed, Candidate, Rejected };

std::string_view to_string(Confidence c);

struct CarveOptions {
    std::uint32_t sector_size = 512;
    std::uint32_t page_size = kPageSize;
    bool byte_granular = false;
    std::size_t chunk_size = std::size_t{8} << 20;
    unsigned workers = 1;
    bool keep_page_bytes = true;
    bool digest_input = true;
};

struct CarvedPage {
    std::uint64_t source_offset = 0;
    PageKind kind = PageKind::NotAPage;
    std::uint32_t subtype = 0;
    DataPageHeader header;  // data pages only
    Confidence confidence = Confidence::Rejected;
    std::size_t record_count = 0;
    std::string note;  // reason for Candidate/Rejected
    Bytes bytes;       // page image (may be shorter than page_size at end of input)
};

// Pulls bytes sequentially. A read error marks `n` bytes unreadable.
class ByteSource {
public:
    struct Chunk {
        std::size_t n = 0;
        bool error = false;
    };
    virtual ~ByteSource() = default;
    virtual Chunk read(std::span<std::uint8_t> out) = 0;
};

class MemorySource : public ByteSource {
public:
    explicit MemorySource(ByteView bytes) : bytes_(bytes) {}
    Chunk read(std::span<std::uint8_t> out) override;

private:
    ByteView bytes_;
    std::size_t pos_ = 0;
};

// Reads a file (or standard input when `path` is "-") read-only.
class FileSource : public ByteSource {
public:
    explicit FileSource(const std::string& path);
    ~FileSource() override;
    FileSource(const FileSource&) = delete;
    FileSource& operator=(const FileSource&) = delete;
    Chunk read(std::span<std::uint8_t> out) override;

private:
    int fd_ = -1;
    bool owned_ = false;
    bool seekable_ = false;
    std::uint64_t pos_ = 0;
};

struct IoRegion {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
};

struct ScanResult {
    std::vector<CarvedPage> pages;            // ordered by source_offset
    std::vector<std::uint64_t> suppressed;    // signature hits inside an accepted page
    std::vector<IoRegion> io_errors;
    std::uint64_t bytes_scanned = 0;
    std::optional<Md5> input_md5;
};

// Classifies and validates a window starting at a candidate offset.
// `candidate` holds up to page_size bytes.
Confidence validate_page(ByteView candidate, std::uint32_t page_size = kPageSize);
CarvedPage evaluate_candidate(ByteView window, std::uint64_t offset, std::uint32_t page_size);

// Streaming scan; memory bounded by chunk_size + page_size. Output is a pure
// function of the input bytes and the sector/page/granularity options.
ScanResult scan_image(ByteSource& source, const CarveOptions& options = {});
ScanResult scan_image(ByteView bytes, const CarveOptions& options = {});

// Records of a carved subtype-9 page (empty for anything else).
PageRecords carved_records(const CarvedPage& page);

struct CarveReport {
    std::size_t pages_recovered = 0;    // Confirmed data pages
    std::size_t records_recovered = 0;  // records on Confirmed subtype-9 pages
    std::size_t header_pages = 0;
    std::size_t map_pages = 0;
    std::map<std::uint32_t, std::size_t> by_subtype;     // data pages, any confidence but Rejected
    std::map<std::string, std::size_t> by_confidence;    // every signature hit
};

CarveReport carve_report(const std::vector<CarvedPage>& pages);

}  // namespace sv2
