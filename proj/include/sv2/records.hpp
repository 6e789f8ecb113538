#pragma once

// Record codec: subtype-9 payload inflation, the size-marker record walk,
// string / identifier extraction, and the attribute-name (subtype 17) and
// UTI (subtype 33) tables.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sv2/digest.hpp"
#include "sv2/format.hpp"
#include "sv2/parser.hpp"

namespace sv2 {

// Size markers above this are treated as corruption.
inline constexpr std::uint32_t kMaxRecordSize = 1u << 24;
inline constexpr std::size_t kMinStringRun = 3;

struct RawRecord {
    std::uint32_t declared_size = 0;
    Bytes body;
    std::uint32_t page_index = 0;
    std::uint32_t slot_index = 0;
    std::uint64_t stream_offset = 0;  // offset of the size marker in the walked stream
    Md5 digest{};
    bool truncated = false;  // body shorter than declared_size

    std::size_t footprint() const { return 4 + body.size(); }
};

enum class Endian { Little, Big };

struct IdCandidate {
    std::size_t offset = 0;
    std::uint64_t value = 0;
    Endian endian = Endian::Little;
};

struct RecordFields {
    std::vector<std::string> strings;
    std::vector<IdCandidate> cnid_candidates;
    std::vector<IdCandidate> parent_cnid_candidates;
};

enum class PayloadLayout {
    RecordsAtStart,  // inflated stream starts with the first size marker
    HeaderEcho,      // inflated stream starts with a 20-byte page header copy
    Empty,           // inflated stream is entirely zero
};

struct InflatedPayload {
    Bytes stream;       // full inflated stream
    std::size_t walk_offset = 0;
    PayloadLayout layout = PayloadLayout::RecordsAtStart;

    ByteView records_region() const { return ByteView(stream).subspan(walk_offset); }
};

// zlib (RFC 1950) inflation of `bytes`. Throws DecompressError.
Bytes zlib_inflate(ByteView bytes);
Bytes zlib_deflate(ByteView bytes, int level = 6);

// Inflates a subtype-9 page and locates the start of the record walk.
// Throws WrongSubtype, DecompressError or NoPlausibleWalk.
InflatedPayload inflate_payload(const DataPage& page);

struct SplitResult {
    std::vector<RawRecord> records;
    bool truncated = false;
    std::size_t consumed = 0;     // bytes covered by markers and bodies
    std::size_t zero_fill = 0;    // trailing bytes after the walk that are all zero
    std::size_t trailing_junk = 0;  // trailing bytes after a 0 marker that are not zero
};

SplitResult split_records(ByteView stream, std::uint32_t page_index = 0);

RecordFields extract_fields(const RawRecord& record);
RecordFields extract_fields(ByteView body);

// Label for listings: the first all-ASCII string, else the first string.
std::string display_string(const RecordFields& fields);

struct AttributeEntry {
    std::uint32_t record_number = 0;
    Bytes flags;
    std::string name;
};

struct UtiEntry {
    std::uint32_t record_number = 0;
    std::string uti;
    std::optional<std::string> language_code;
};

// Both table parsers throw WrongSubtype for other pages and append
// MalformedEntry diagnostics (page-relative offsets) to `warnings`.
std::vector<AttributeEntry> parse_attribute_page(const DataPage& page, Diagnostics* warnings = nullptr);
std::vector<UtiEntry> parse_uti_page(const DataPage& page, Diagnostics* warnings = nullptr);

struct Hit {
    std::uint32_t page_index = 0;
    std::uint32_t slot_index = 0;
    std::string keyword;
    std::size_t byte_offset = 0;

    bool operator==(const Hit&) const = default;
};

// All (overlapping) occurrences of each keyword inside record bodies,
// ordered by (page, slot, offset, keyword position).
std::vector<Hit> search_records(const std::vector<RawRecord>& records, const std::vector<std::string>& keywords);

// Result of walking one subtype-9 page.
struct PageRecords {
    std::uint32_t page_index = 0;
    std::uint64_t file_offset = 0;
    std::vector<RawRecord> records;
    std::optional<Error> error;  // DecompressError / NoPlausibleWalk
    bool truncated = false;
};

PageRecords walk_page(const DataPage& page);

struct StoreRecords {
    std::vector<PageRecords> pages;  // one per subtype-9 page, in page order

    std::vector<RawRecord> all() const;
    std::size_t total() const;
    std::size_t error_count() const;
};

// Pages are walked concurrently; results are merged in page order.
StoreRecords collect_records(const ParsedStore& store);

}  // namespace sv2
