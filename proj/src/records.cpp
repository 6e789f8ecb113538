#include "sv2/records.hpp"

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstring>
#include <functional>
#include <thread>

namespace sv2 {

namespace {

constexpr std::size_t kMaxInflatedSize = std::size_t{16} << 20;
constexpr std::size_t kMaxFlagsWidth = 16;
constexpr std::uint32_t kResyncWindow = 4096;

bool all_zero(ByteView bytes) {
    return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
}

// Length in bytes of the printable run starting at `pos`. With
// `text_whitespace`, TAB/LF/CR may continue (not start) a run.
std::size_t printable_run(ByteView bytes, std::size_t pos, std::size_t end, bool text_whitespace = false) {
    std::size_t i = pos;
    while (i < end) {
        auto n = printable_char_length(bytes.first(end), i);
        if (n == 0 && text_whitespace && i > pos && (bytes[i] == '\t' || bytes[i] == '\n' || bytes[i] == '\r')) n = 1;
        if (n == 0) break;
        i += n;
    }
    return i - pos;
}

std::string as_string(ByteView bytes) { return {reinterpret_cast<const char*>(bytes.data()), bytes.size()}; }

bool plausible_walk_at(ByteView stream, std::size_t offset) {
    if (stream.size() < offset + 4) return false;
    const auto marker = read_field_u32_le(stream, offset);
    return marker > 0 && marker <= stream.size();
}

bool timestamp_like(double v) { return std::isfinite(v) && v >= 1e8 && v <= 2e9; }

bool plausible_id(std::uint64_t v) { return v >= 1 && v < (std::uint64_t{1} << 32); }

ByteView table_region(const DataPage& page) {
    ByteView all(page.bytes);
    const auto alloc = page.header.allocated_size;
    if (alloc >= kTableEntriesOffset && alloc <= all.size()) return all.first(alloc);
    return all;
}

void require_subtype(const DataPage& page, Subtype subtype) {
    if (page.header.subtype != static_cast<std::uint32_t>(subtype)) {
        throw Error(ErrorCode::WrongSubtype, "page " + std::to_string(page.index) + " has subtype " +
                                                 std::to_string(page.header.subtype) + ", expected " +
                                                 std::to_string(static_cast<std::uint32_t>(subtype)));
    }
}

void malformed(Diagnostics* warnings, std::size_t offset, std::string message) {
    if (warnings != nullptr) warnings->push_back({offset, "MalformedEntry", std::move(message)});
}

// Printable run at `pos`; `clean` when it ends on a NUL, `terminated` when
// a NUL exists anywhere after `pos`.
struct TerminatedString {
    std::size_t length = 0;
    bool terminated = false;
    bool clean = false;
};

TerminatedString read_terminated(ByteView region, std::size_t pos) {
    TerminatedString out;
    out.length = printable_run(region, pos, region.size());
    out.clean = pos + out.length < region.size() && region[pos + out.length] == 0;
    out.terminated =
        out.clean || std::find(region.begin() + static_cast<std::ptrdiff_t>(pos), region.end(), std::uint8_t{0}) !=
                         region.end();
    return out;
}

}  // namespace

Bytes zlib_inflate(ByteView bytes) {
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw Error(ErrorCode::DecompressError, "inflateInit failed");
    zs.next_in = const_cast<Bytef*>(bytes.data());
    zs.avail_in = static_cast<uInt>(bytes.size());
    Bytes out;
    std::array<std::uint8_t, 16384> buf{};
    int rc = Z_OK;
    while (rc == Z_OK) {
        zs.next_out = buf.data();
        zs.avail_out = static_cast<uInt>(buf.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        out.insert(out.end(), buf.data(), buf.data() + (buf.size() - zs.avail_out));
        if (out.size() > kMaxInflatedSize) rc = Z_MEM_ERROR;
        if (rc == Z_BUF_ERROR && zs.avail_in == 0) break;
    }
    const std::string msg = zs.msg != nullptr ? zs.msg : "";
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) {
        throw Error(ErrorCode::DecompressError,
                    "zlib stream did not complete (rc=" + std::to_string(rc) + (msg.empty() ? "" : ", " + msg) + ")");
    }
    return out;
}

Bytes zlib_deflate(ByteView bytes, int level) {
    uLongf len = compressBound(static_cast<uLong>(bytes.size()));
    Bytes out(len);
    if (compress2(out.data(), &len, bytes.data(), static_cast<uLong>(bytes.size()), level) != Z_OK) {
        throw Error(ErrorCode::DecompressError, "compress2 failed");
    }
    out.resize(len);
    return out;
}

InflatedPayload inflate_payload(const DataPage& page) {
    require_subtype(page, Subtype::MetadataRecords);
    const auto region = page.allocated_region();
    if (region.size() <= kPayloadOffset) throw Error(ErrorCode::DecompressError, "page has no payload");
    InflatedPayload out;
    out.stream = zlib_inflate(region.subspan(kPayloadOffset));
    const ByteView stream(out.stream);
    if (all_zero(stream)) {
        out.layout = PayloadLayout::Empty;
        out.walk_offset = stream.size();
    } else if (plausible_walk_at(stream, 0)) {
        out.layout = PayloadLayout::RecordsAtStart;
        out.walk_offset = 0;
    } else if (plausible_walk_at(stream, kPageHeaderSize)) {
        out.layout = PayloadLayout::HeaderEcho;
        out.walk_offset = kPageHeaderSize;
    } else {
        throw Error(ErrorCode::NoPlausibleWalk,
                    "inflated stream of " + std::to_string(stream.size()) + " bytes fits neither layout");
    }
    return out;
}

SplitResult split_records(ByteView stream, std::uint32_t page_index) {
    SplitResult out;
    std::size_t cursor = 0;
    while (cursor + 4 <= stream.size()) {
        const auto marker = read_field_u32_le(stream, cursor);
        if (marker == 0) break;
        RawRecord rec;
        rec.declared_size = marker;
        rec.page_index = page_index;
        rec.slot_index = static_cast<std::uint32_t>(out.records.size());
        rec.stream_offset = cursor;
        const std::size_t remaining = stream.size() - cursor - 4;
        const bool truncated = marker > kMaxRecordSize || marker > remaining;
        const std::size_t body_len = truncated ? remaining : marker;
        rec.body.assign(stream.begin() + cursor + 4, stream.begin() + cursor + 4 + body_len);
        rec.truncated = truncated;
        rec.digest = md5(rec.body);
        out.records.push_back(std::move(rec));
        cursor += 4 + body_len;
        if (truncated) {
            out.truncated = true;
            break;
        }
    }
    out.consumed = cursor;
    const auto rest = stream.subspan(cursor);
    if (all_zero(rest)) {
        out.zero_fill = rest.size();
    } else {
        out.trailing_junk = rest.size();
    }
    return out;
}

std::string display_string(const RecordFields& fields) {
    for (const auto& s : fields.strings) {
        if (std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; })) return s;
    }
    return fields.strings.empty() ? std::string{} : fields.strings.front();
}

RecordFields extract_fields(const RawRecord& record) { return extract_fields(ByteView(record.body)); }

RecordFields extract_fields(ByteView body) {
    RecordFields out;
    std::size_t i = 0;
    while (i < body.size()) {
        const auto run = printable_run(body, i, body.size(), true);
        if (run == 0) {
            ++i;
            continue;
        }
        const std::size_t end = i + run;
        const bool delimited = end == body.size() || body[end] == 0x00 || body[end] == 0x01;
        if (delimited && run >= kMinStringRun) out.strings.push_back(as_string(body.subspan(i, run)));
        i = end;
    }

    const std::size_t scan_limit = std::min<std::size_t>(body.size(), 256);
    for (std::size_t t = 0; t + 8 <= scan_limit; t += 4) {
        const auto bits = read_field_u64_le(body, t);
        double v = 0;
        std::memcpy(&v, &bits, sizeof v);
        if (!timestamp_like(v)) continue;
        std::vector<IdCandidate> found;
        for (std::size_t back = std::min<std::size_t>(t / 8, 4); back >= 1; --back) {
            const std::size_t slot = t - back * 8;
            const auto le = read_field_u64_le(body, slot);
            const auto be = read_field_u64_be(body, slot);
            if (plausible_id(le)) {
                found.push_back({slot, le, Endian::Little});
            } else if (plausible_id(be)) {
                found.push_back({slot, be, Endian::Big});
            }
        }
        if (!found.empty()) out.cnid_candidates.push_back(found[0]);
        if (found.size() > 1) out.parent_cnid_candidates.push_back(found[1]);
        break;
    }
    return out;
}

std::vector<AttributeEntry> parse_attribute_page(const DataPage& page, Diagnostics* warnings) {
    require_subtype(page, Subtype::AttributeTable);
    const auto region = table_region(page);
    std::vector<AttributeEntry> out;
    std::optional<std::size_t> width;
    std::uint32_t prev = 0;

    // A plausible entry at `pos` given the inferred flags width.
    auto plausible = [&](std::size_t pos) {
        if (!width || pos + 4 + *width >= region.size()) return false;
        const auto rn = read_field_u32_le(region, pos);
        if (rn <= prev || rn > prev + kResyncWindow) return false;
        const auto s = read_terminated(region, pos + 4 + *width);
        return s.clean && s.length > 0;
    };

    std::size_t cursor = kTableEntriesOffset;
    while (cursor + 4 <= region.size()) {
        if (all_zero(region.subspan(cursor))) break;
        const auto rn = read_field_u32_le(region, cursor);
        if (!width) {
            std::size_t p = cursor + 4;
            while (p < region.size() && p - cursor - 4 <= kMaxFlagsWidth && printable_char_length(region, p) == 0) ++p;
            if (p >= region.size() || p - cursor - 4 > kMaxFlagsWidth) {
                malformed(warnings, cursor, "no attribute name after record number");
                break;
            }
            width = p - cursor - 4;
        }
        const std::size_t name_pos = cursor + 4 + *width;
        const auto s = name_pos < region.size() ? read_terminated(region, name_pos) : TerminatedString{};
        if (name_pos < region.size() && !s.terminated) {
            malformed(warnings, cursor, "attribute name lacks a terminator before page end");
            break;
        }
        if (rn == 0 || rn <= prev || !s.clean || s.length == 0) {
            malformed(warnings, cursor, "malformed attribute entry (record " + std::to_string(rn) + ")");
            std::size_t p = cursor + 1;
            while (p + 4 <= region.size() && !plausible(p)) ++p;
            if (p + 4 > region.size()) break;
            cursor = p;
            continue;
        }
        AttributeEntry e;
        e.record_number = rn;
        e.flags.assign(region.begin() + cursor + 4, region.begin() + name_pos);
        e.name = as_string(region.subspan(name_pos, s.length));
        out.push_back(std::move(e));
        prev = rn;
        cursor = name_pos + s.length + 1;
    }
    return out;
}

std::vector<UtiEntry> parse_uti_page(const DataPage& page, Diagnostics* warnings) {
    require_subtype(page, Subtype::UtiTable);
    const auto region = table_region(page);
    std::vector<UtiEntry> out;

    auto plausible = [&](std::size_t pos) {
        if (pos + 5 > region.size() || read_field_u32_le(region, pos) == 0) return false;
        const auto s = read_terminated(region, pos + 4);
        return s.clean && s.length > 0;
    };

    std::size_t cursor = kTableEntriesOffset;
    while (cursor + 4 <= region.size()) {
        if (all_zero(region.subspan(cursor))) break;
        const auto rn = read_field_u32_le(region, cursor);
        const std::size_t uti_pos = cursor + 4;
        const auto s = uti_pos < region.size() ? read_terminated(region, uti_pos) : TerminatedString{};
        if (uti_pos < region.size() && !s.terminated) {
            malformed(warnings, cursor, "UTI lacks a terminator before page end");
            break;
        }
        if (rn == 0 || !s.clean || s.length == 0) {
            malformed(warnings, cursor, "malformed UTI entry (record " + std::to_string(rn) + ")");
            std::size_t p = cursor + 1;
            while (p + 4 <= region.size() && !plausible(p)) ++p;
            if (p + 4 > region.size()) break;
            cursor = p;
            continue;
        }
        UtiEntry e;
        e.record_number = rn;
        e.uti = as_string(region.subspan(uti_pos, s.length));
        cursor = uti_pos + s.length + 1;

        // Optional language/country code: a short identifier run that
        // cannot be the next record number.
        if (cursor < region.size() && printable_char_length(region, cursor) == 1) {
            std::size_t q = cursor;
            while (q < region.size() && q - cursor <= 16 &&
                   (std::isalnum(region[q]) || region[q] == '_' || region[q] == '-')) {
                ++q;
            }
            const std::size_t len = q - cursor;
            const bool next_record = cursor + 4 <= region.size() && read_field_u32_le(region, cursor) == rn + 1;
            if (q < region.size() && region[q] == 0 && len >= 2 && len <= 16 && !next_record) {
                e.language_code = as_string(region.subspan(cursor, len));
                cursor = q + 1;
            }
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<Hit> search_records(const std::vector<RawRecord>& records, const std::vector<std::string>& keywords) {
    struct Keyed {
        Hit hit;
        std::size_t keyword_pos;
    };
    std::vector<Keyed> found;
    for (const auto& rec : records) {
        for (std::size_t k = 0; k < keywords.size(); ++k) {
            const auto& kw = keywords[k];
            if (kw.empty()) continue;
            auto it = rec.body.begin();
            while (true) {
                it = std::search(it, rec.body.end(), kw.begin(), kw.end(),
                                 [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); });
                if (it == rec.body.end()) break;
                found.push_back({{rec.page_index, rec.slot_index, kw,
                                  static_cast<std::size_t>(it - rec.body.begin())},
                                 k});
                ++it;
            }
        }
    }
    std::stable_sort(found.begin(), found.end(), [](const Keyed& a, const Keyed& b) {
        return std::tie(a.hit.page_index, a.hit.slot_index, a.hit.byte_offset, a.keyword_pos) <
               std::tie(b.hit.page_index, b.hit.slot_index, b.hit.byte_offset, b.keyword_pos);
    });
    std::vector<Hit> out;
    out.reserve(found.size());
    for (auto& f : found) out.push_back(std::move(f.hit));
    return out;
}

PageRecords walk_page(const DataPage& page) {
    PageRecords out;
    out.page_index = page.index;
    out.file_offset = page.file_offset;
    try {
        const auto inflated = inflate_payload(page);
        auto split = split_records(inflated.records_region(), page.index);
        out.records = std::move(split.records);
        out.truncated = split.truncated;
    } catch (const Error& e) {
        out.error = e;
    }
    return out;
}

std::vector<RawRecord> StoreRecords::all() const {
    std::vector<RawRecord> out;
    for (const auto& p : pages) out.insert(out.end(), p.records.begin(), p.records.end());
    return out;
}

std::size_t StoreRecords::total() const {
    std::size_t n = 0;
    for (const auto& p : pages) n += p.records.size();
    return n;
}

std::size_t StoreRecords::error_count() const {
    return static_cast<std::size_t>(
        std::count_if(pages.begin(), pages.end(), [](const PageRecords& p) { return p.error.has_value(); }));
}

StoreRecords collect_records(const ParsedStore& store) {
    std::vector<const DataPage*> targets;
    for (const auto& p : store.pages) {
        if (p.header.subtype == static_cast<std::uint32_t>(Subtype::MetadataRecords)) targets.push_back(&p);
    }
    StoreRecords out;
    out.pages.resize(targets.size());
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, targets.size() / 8 + 1));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < targets.size(); i = next++) out.pages[i] = walk_page(*targets[i]);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    return out;
}

}  // namespace sv2
