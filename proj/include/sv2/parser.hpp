#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "sv2/format.hpp"

namespace sv2 {

// Byte range of the input not attributed to any page.
struct Slack {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
};

enum class PageLocation { Map, SignatureScan };

struct ParsedStore {
    StoreHeader header;
    std::uint64_t header_length = 0;
    std::optional<PageMap> map;
    std::uint64_t map_length = 0;
    std::vector<DataPage> pages;  // ordered by file offset
    std::vector<Slack> slack;
    PageLocation location = PageLocation::Map;
    Diagnostics warnings;

    std::uint64_t input_length = 0;

    std::size_t total_page_count() const { return 1 + (map ? 1 : 0) + pages.size(); }
    std::map<std::uint32_t, std::size_t> subtype_histogram() const;
};

// Throws Error{NotAStore} unless offset 0 carries the header magic. Every
// other anomaly is recorded in ParsedStore::warnings.
ParsedStore parse_store(ByteView bytes);

// `bytes` is the header page (or a prefix of the store). Warnings are
// appended to `warnings` when supplied.
StoreHeader parse_header_page(ByteView bytes, Diagnostics* warnings = nullptr);

PageMap parse_map_page(ByteView bytes, Diagnostics* warnings = nullptr);

}  // namespace sv2
