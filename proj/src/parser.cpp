#include "sv2/parser.hpp"

#include <algorithm>

namespace sv2 {

namespace {

constexpr std::uint32_t kMaxScannedPageSize = 1u << 20;

void warn(Diagnostics* out, std::uint64_t offset, std::string code, std::string message) {
    if (out != nullptr) out->push_back({offset, std::move(code), std::move(message)});
}

DataPage make_page(ByteView bytes, std::uint64_t offset, std::uint64_t length, std::uint32_t index) {
    DataPage page;
    page.file_offset = offset;
    page.index = index;
    page.bytes.assign(bytes.begin() + offset, bytes.begin() + offset + length);
    page.header = DataPageHeader::decode(page.bytes);
    return page;
}

// Map-guided location; returns nullopt when the map disagrees with the bytes.
std::optional<std::vector<DataPage>> locate_by_map(ByteView bytes, const PageMap& map,
                                                   std::uint64_t start, std::uint32_t first_index) {
    if (map.entries.size() != map.page_count) return std::nullopt;
    std::vector<DataPage> pages;
    pages.reserve(map.entries.size());
    std::uint64_t cursor = start;
    for (const auto& entry : map.entries) {
        const std::uint64_t len = entry.data_page_size;
        if (len < kPageHeaderSize || cursor + len > bytes.size()) return std::nullopt;
        const auto cls = classify_page(bytes.subspan(cursor, kPageHeaderSize));
        if (cls.kind != PageKind::Data) return std::nullopt;
        if (read_field_u32_le(bytes, cursor + 4) != entry.data_page_size) return std::nullopt;
        pages.push_back(make_page(bytes, cursor, len,
                                  first_index + static_cast<std::uint32_t>(pages.size())));
        cursor += len;
    }
    if (cursor != bytes.size()) return std::nullopt;
    return pages;
}

std::vector<DataPage> locate_by_scan(ByteView bytes, std::uint64_t start, std::uint32_t first_index,
                                     std::vector<Slack>& slack, Diagnostics& warnings) {
    std::vector<DataPage> pages;
    std::uint64_t cursor = start;
    std::uint64_t probe = (start + 3) & ~std::uint64_t{3};
    while (probe + kPageHeaderSize <= bytes.size()) {
        const auto cls = classify_page(bytes.subspan(probe, kPageHeaderSize));
        if (cls.kind != PageKind::Data) {
            probe += 4;
            continue;
        }
        if (probe > cursor) slack.push_back({cursor, probe - cursor});
        std::uint64_t len = read_field_u32_le(bytes, probe + 4);
        if (len < kPageHeaderSize || len > kMaxScannedPageSize) len = kPageSize;
        if (probe + len > bytes.size()) {
            warnings.push_back({probe, "TruncatedStore",
                                "page declares " + std::to_string(len) + " bytes, " +
                                    std::to_string(bytes.size() - probe) + " available"});
            len = bytes.size() - probe;
        }
        pages.push_back(make_page(bytes, probe, len,
                                  first_index + static_cast<std::uint32_t>(pages.size())));
        cursor = probe + len;
        probe = (cursor + 3) & ~std::uint64_t{3};
    }
    if (cursor < bytes.size()) slack.push_back({cursor, bytes.size() - cursor});
    return pages;
}

}  // namespace

std::map<std::uint32_t, std::size_t> ParsedStore::subtype_histogram() const {
    std::map<std::uint32_t, std::size_t> out;
    for (const auto& p : pages) ++out[p.header.subtype];
    return out;
}

StoreHeader parse_header_page(ByteView bytes, Diagnostics* warnings) {
    if (bytes.size() < kPageHeaderSize || classify_page(bytes.first(kPageHeaderSize)).kind != PageKind::Header) {
        throw Error(ErrorCode::NotAHeader, "offset 0 does not carry the '8tsd' signature");
    }
    StoreHeader h;
    if (bytes.size() < kHeaderSizeOffset + 4) {
        warn(warnings, 0, "TruncatedHeader", "header page shorter than its size field");
        return h;
    }
    h.header_page_size = read_field_u32_le(bytes, kHeaderSizeOffset);
    if (h.header_page_size != kHeaderPageSize) {
        warn(warnings, kHeaderSizeOffset, "NonCanonicalHeaderSize",
             "header page size " + std::to_string(h.header_page_size) + " (expected 4096)");
    }
    const std::size_t end = std::min<std::size_t>(
        bytes.size(), h.header_page_size >= kVolumePathOffset ? h.header_page_size : kHeaderPageSize);
    if (end <= kVolumePathOffset) return h;

    const auto region = bytes.subspan(kVolumePathOffset, end - kVolumePathOffset);
    const auto nul = std::find(region.begin(), region.end(), std::uint8_t{0});
    const auto path_len = static_cast<std::size_t>(nul - region.begin());
    h.volume_path = decode_printable(region.first(path_len));
    if (nul != region.end()) {
        h.raw_tail.assign(nul + 1, region.end());
    } else {
        warn(warnings, kVolumePathOffset, "UnterminatedVolumePath", "volume path runs to end of header page");
    }
    if (!h.volume_path.empty() && !h.volume_path.ends_with("store.db")) {
        warn(warnings, kVolumePathOffset, "UnexpectedVolumePath", "volume path does not end with store.db");
    }
    return h;
}

PageMap parse_map_page(ByteView bytes, Diagnostics* warnings) {
    if (bytes.size() < kPageHeaderSize || classify_page(bytes.first(kPageHeaderSize)).kind != PageKind::Map) {
        throw Error(ErrorCode::NotAMap, "page does not carry the '2mbd' map signature");
    }
    PageMap m;
    m.page_size = read_field_u32_le(bytes, kMapPageSizeOffset);
    m.page_count = read_field_u32_le(bytes, kMapPageCountOffset);
    m.page_type = read_field_u32_le(bytes, kMapPageTypeOffset);
    if (m.page_size != kPageSize) {
        warn(warnings, kMapPageSizeOffset, "NonCanonicalPageSize",
             "map page size " + std::to_string(m.page_size) + " (expected 16384)");
    }
    const std::size_t limit = std::min<std::size_t>(bytes.size(), m.page_size);
    const std::size_t room = limit > kMapEntriesOffset ? (limit - kMapEntriesOffset) / kMapEntrySize : 0;
    const std::size_t n = std::min<std::size_t>(room, m.page_count);
    if (n < m.page_count) {
        warn(warnings, kMapEntriesOffset, "EntryRegionTruncated",
             "map declares " + std::to_string(m.page_count) + " entries, room for " + std::to_string(n));
    }
    m.entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.entries.push_back(MapEntry::decode(bytes.subspan(kMapEntriesOffset + i * kMapEntrySize)));
    }
    return m;
}

ParsedStore parse_store(ByteView bytes) {
    if (bytes.size() < kPageHeaderSize || classify_page(bytes.first(kPageHeaderSize)).kind != PageKind::Header) {
        throw Error(ErrorCode::NotAStore, "offset 0 does not carry the '8tsd' header signature");
    }
    ParsedStore store;
    store.input_length = bytes.size();
    store.header = parse_header_page(bytes, &store.warnings);

    std::uint64_t header_len = store.header.header_page_size;
    if (header_len < kVolumePathOffset || header_len > kMaxScannedPageSize) header_len = kHeaderPageSize;
    if (header_len > bytes.size()) {
        store.warnings.push_back({0, "TruncatedStore", "header page extends past end of input"});
        header_len = bytes.size();
    }
    store.header_length = header_len;

    std::uint64_t cursor = header_len;
    std::uint32_t index = 1;
    if (cursor + kPageHeaderSize <= bytes.size() &&
        classify_page(bytes.subspan(cursor, kPageHeaderSize)).kind == PageKind::Map) {
        std::uint64_t map_len = read_field_u32_le(bytes, cursor + kMapPageSizeOffset);
        if (map_len < kMapEntriesOffset || map_len > kMaxScannedPageSize) map_len = kPageSize;
        if (cursor + map_len > bytes.size()) {
            store.warnings.push_back({cursor, "TruncatedStore", "map page extends past end of input"});
            map_len = bytes.size() - cursor;
        }
        Diagnostics map_warnings;
        store.map = parse_map_page(bytes.subspan(cursor, map_len), &map_warnings);
        for (auto& w : map_warnings) {
            w.offset += cursor;
            store.warnings.push_back(std::move(w));
        }
        store.map_length = map_len;
        cursor += map_len;
        index = 2;
    } else {
        store.warnings.push_back({cursor, "MapMissing", "no map page after the header; scanning for pages"});
    }

    bool located = false;
    if (store.map) {
        if (auto pages = locate_by_map(bytes, *store.map, cursor, index)) {
            store.pages = std::move(*pages);
            store.location = PageLocation::Map;
            located = true;
        } else {
            store.warnings.push_back({cursor, "MapInconsistent",
                                      "page map does not match page layout; falling back to signature scan"});
        }
    }
    if (!located) {
        store.location = PageLocation::SignatureScan;
        store.pages = locate_by_scan(bytes, cursor, index, store.slack, store.warnings);
    }
    for (const auto& s : store.slack) {
        store.warnings.push_back({s.offset, "Slack", std::to_string(s.length) + " unattributed bytes"});
    }
    for (const auto& p : store.pages) {
        if (p.header.allocated_size > p.header.physical_size) {
            store.warnings.push_back({p.file_offset + 8, "AllocatedExceedsPhysical",
                                      "allocated size larger than physical size"});
        }
        if (classify_page(p.bytes).alternate_magic) {
            store.warnings.push_back({p.file_offset, "AlternateDataMagic",
                                      "data page carries the '2mbd' signature"});
        }
    }
    return store;
}

}  // namespace sv2
