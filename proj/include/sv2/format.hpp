#pragma once

// Byte-level vocabulary of a Spotlight Store-V2 metadata store (store.db):
// page signatures, fixed field offsets and little-endian field rules shared
// by the parser, the carver and the synthetic generator.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sv2/error.hpp"

namespace sv2 {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

struct PageSignature {
    std::array<char, 4> tag{};

    constexpr bool operator==(const PageSignature&) const = default;
    std::string_view view() const { return {tag.data(), tag.size()}; }
};

inline constexpr PageSignature kHeaderMagic{{'8', 't', 's', 'd'}};
inline constexpr PageSignature kMapMagic{{'2', 'm', 'b', 'd'}};
inline constexpr PageSignature kDataMagic{{'2', 'p', 'b', 'd'}};

inline constexpr std::uint32_t kHeaderPageSize = 4096;
inline constexpr std::uint32_t kPageSize = 16384;
inline constexpr std::uint32_t kMapPageType = 12;
inline constexpr std::size_t kPageHeaderSize = 20;
inline constexpr std::size_t kPayloadOffset = 20;
inline constexpr std::size_t kTableEntriesOffset = 32;

// Header page field offsets.
inline constexpr std::size_t kHeaderSizeOffset = 36;
inline constexpr std::size_t kVolumePathOffset = 324;

// Map page field offsets.
inline constexpr std::size_t kMapPageSizeOffset = 4;
inline constexpr std::size_t kMapPageCountOffset = 8;
inline constexpr std::size_t kMapPageTypeOffset = 12;
inline constexpr std::size_t kMapEntriesOffset = 32;
inline constexpr std::size_t kMapEntrySize = 16;

enum class Subtype : std::uint32_t {
    MetadataRecords = 9,
    AttributeTable = 17,
    UtiTable = 33,
};

enum class PageKind { Header, Map, Data, NotAPage };

std::string_view to_string(PageKind kind);

struct PageClass {
    PageKind kind = PageKind::NotAPage;
    std::uint32_t subtype = 0;  // meaningful for Data only
    // Data page carrying the map magic ('2mbd' with page type != 12).
    bool alternate_magic = false;

    bool is_data(Subtype s) const {
        return kind == PageKind::Data && subtype == static_cast<std::uint32_t>(s);
    }
};

// Classifies a page from (at least) its first 20 bytes.
// Throws Error{InputTooShort} on fewer than 20 bytes.
PageClass classify_page(ByteView first_bytes);

std::uint32_t read_field_u32_le(ByteView bytes, std::size_t offset);
std::uint64_t read_field_u64_le(ByteView bytes, std::size_t offset);
std::uint64_t read_field_u64_be(ByteView bytes, std::size_t offset);
void write_field_u32_le(std::span<std::uint8_t> bytes, std::size_t offset, std::uint32_t value);
void append_u32_le(Bytes& out, std::uint32_t value);
void append_u64_le(Bytes& out, std::uint64_t value);

struct StoreHeader {
    PageSignature magic = kHeaderMagic;
    std::uint32_t header_page_size = kHeaderPageSize;
    std::string volume_path;  // non-printable bytes hex-escaped as \xHH
    Bytes raw_tail;           // everything after the path terminator, opaque
};

struct MapEntry {
    std::uint32_t data_page_size = kPageSize;
    std::array<std::uint8_t, 12> unknown12{};

    bool operator==(const MapEntry&) const = default;

    std::array<std::uint8_t, kMapEntrySize> encode() const;
    static MapEntry decode(ByteView sixteen_bytes);
};

struct PageMap {
    PageSignature magic = kMapMagic;
    std::uint32_t page_size = kPageSize;
    std::uint32_t page_count = 0;
    std::uint32_t page_type = kMapPageType;
    std::vector<MapEntry> entries;
};

struct DataPageHeader {
    PageSignature magic = kDataMagic;
    std::uint32_t physical_size = kPageSize;
    std::uint32_t allocated_size = 0;
    std::uint32_t subtype = 0;
    std::uint32_t size2 = 0;  // surfaced, never interpreted

    std::array<std::uint8_t, kPageHeaderSize> encode() const;
    static DataPageHeader decode(ByteView first_20);
};

// One data page as located in a store or carved from an image.
struct DataPage {
    std::uint64_t file_offset = 0;
    std::uint32_t index = 0;  // ordinal among all pages of the store
    DataPageHeader header;
    Bytes bytes;              // full page image including the 20-byte header

    ByteView payload() const;
    // Bytes of the page up to allocated_size when that is sane, else the page.
    ByteView allocated_region() const;
};

// Length of the printable character starting at `pos`: 1 for printable
// ASCII, 2..4 for a well-formed UTF-8 sequence, 0 otherwise.
std::size_t printable_char_length(ByteView bytes, std::size_t pos);

// Decodes `len` bytes as a terminator-delimited path, hex-escaping
// anything non-printable.
std::string decode_printable(ByteView bytes);

}  // namespace sv2
