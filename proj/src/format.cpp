#include "sv2/format.hpp"

#include <algorithm>
#include <cstring>

namespace sv2 {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InputTooShort: return "InputTooShort";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::NotAStore: return "NotAStore";
        case ErrorCode::NotAHeader: return "NotAHeader";
        case ErrorCode::NotAMap: return "NotAMap";
        case ErrorCode::NotADataPage: return "NotADataPage";
        case ErrorCode::WrongSubtype: return "WrongSubtype";
        case ErrorCode::DecompressError: return "DecompressError";
        case ErrorCode::NoPlausibleWalk: return "NoPlausibleWalk";
        case ErrorCode::SpecInvalid: return "SpecInvalid";
        case ErrorCode::SpecTooLarge: return "SpecTooLarge";
        case ErrorCode::UnknownTarget: return "UnknownTarget";
        case ErrorCode::NonEmptyFolder: return "NonEmptyFolder";
        case ErrorCode::InvalidEvent: return "InvalidEvent";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

std::string_view to_string(PageKind kind) {
    switch (kind) {
        case PageKind::Header: return "header";
        case PageKind::Map: return "map";
        case PageKind::Data: return "data";
        case PageKind::NotAPage: return "not_a_page";
    }
    return "not_a_page";
}

namespace {

bool has_magic(ByteView bytes, const PageSignature& sig) {
    return std::memcmp(bytes.data(), sig.tag.data(), sig.tag.size()) == 0;
}

}  // namespace

PageClass classify_page(ByteView first_bytes) {
    if (first_bytes.size() < kPageHeaderSize) {
        throw Error(ErrorCode::InputTooShort,
                    "page classification needs 20 bytes, got " + std::to_string(first_bytes.size()));
    }
    PageClass out;
    if (has_magic(first_bytes, kHeaderMagic)) {
        out.kind = PageKind::Header;
    } else if (has_magic(first_bytes, kDataMagic)) {
        out.kind = PageKind::Data;
        out.subtype = read_field_u32_le(first_bytes, 12);
    } else if (has_magic(first_bytes, kMapMagic)) {
        const auto type = read_field_u32_le(first_bytes, kMapPageTypeOffset);
        if (type == kMapPageType) {
            out.kind = PageKind::Map;
        } else {
            out.kind = PageKind::Data;
            out.subtype = type;
            out.alternate_magic = true;
        }
    }
    return out;
}

std::uint32_t read_field_u32_le(ByteView bytes, std::size_t offset) {
    if (offset > bytes.size() || bytes.size() - offset < 4) {
        throw Error(ErrorCode::OutOfBounds, "u32 read at " + std::to_string(offset) + " of " +
                                                std::to_string(bytes.size()));
    }
    return static_cast<std::uint32_t>(bytes[offset]) |
           static_cast<std::uint32_t>(bytes[offset + 1]) << 8 |
           static_cast<std::uint32_t>(bytes[offset + 2]) << 16 |
           static_cast<std::uint32_t>(bytes[offset + 3]) << 24;
}

std::uint64_t read_field_u64_le(ByteView bytes, std::size_t offset) {
    const std::uint64_t lo = read_field_u32_le(bytes, offset);
    const std::uint64_t hi = read_field_u32_le(bytes, offset + 4);
    return lo | hi << 32;
}

std::uint64_t read_field_u64_be(ByteView bytes, std::size_t offset) {
    if (offset > bytes.size() || bytes.size() - offset < 8) {
        throw Error(ErrorCode::OutOfBounds, "u64 read at " + std::to_string(offset));
    }
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) v = v << 8 | bytes[offset + i];
    return v;
}

void write_field_u32_le(std::span<std::uint8_t> bytes, std::size_t offset, std::uint32_t value) {
    if (offset > bytes.size() || bytes.size() - offset < 4) {
        throw Error(ErrorCode::OutOfBounds, "u32 write at " + std::to_string(offset));
    }
    for (int i = 0; i < 4; ++i) bytes[offset + i] = static_cast<std::uint8_t>(value >> (8 * i));
}

void append_u32_le(Bytes& out, std::uint32_t value) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

void append_u64_le(Bytes& out, std::uint64_t value) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

std::array<std::uint8_t, kMapEntrySize> MapEntry::encode() const {
    std::array<std::uint8_t, kMapEntrySize> out{};
    write_field_u32_le(out, 0, data_page_size);
    std::copy(unknown12.begin(), unknown12.end(), out.begin() + 4);
    return out;
}

MapEntry MapEntry::decode(ByteView sixteen_bytes) {
    if (sixteen_bytes.size() < kMapEntrySize) {
        throw Error(ErrorCode::OutOfBounds, "map entry needs 16 bytes");
    }
    MapEntry e;
    e.data_page_size = read_field_u32_le(sixteen_bytes, 0);
    std::copy_n(sixteen_bytes.begin() + 4, 12, e.unknown12.begin());
    return e;
}

std::array<std::uint8_t, kPageHeaderSize> DataPageHeader::encode() const {
    std::array<std::uint8_t, kPageHeaderSize> out{};
    std::copy(magic.tag.begin(), magic.tag.end(), out.begin());
    write_field_u32_le(out, 4, physical_size);
    write_field_u32_le(out, 8, allocated_size);
    write_field_u32_le(out, 12, subtype);
    write_field_u32_le(out, 16, size2);
    return out;
}

DataPageHeader DataPageHeader::decode(ByteView first_20) {
    if (first_20.size() < kPageHeaderSize) {
        throw Error(ErrorCode::InputTooShort, "data page header needs 20 bytes");
    }
    DataPageHeader h;
    std::copy_n(first_20.begin(), 4, h.magic.tag.begin());
    h.physical_size = read_field_u32_le(first_20, 4);
    h.allocated_size = read_field_u32_le(first_20, 8);
    h.subtype = read_field_u32_le(first_20, 12);
    h.size2 = read_field_u32_le(first_20, 16);
    return h;
}

ByteView DataPage::payload() const {
    ByteView all(bytes);
    return all.size() <= kPayloadOffset ? ByteView{} : all.subspan(kPayloadOffset);
}

ByteView DataPage::allocated_region() const {
    ByteView all(bytes);
    if (header.allocated_size >= kPageHeaderSize && header.allocated_size <= all.size()) {
        return all.first(header.allocated_size);
    }
    return all;
}

std::size_t printable_char_length(ByteView bytes, std::size_t pos) {
    if (pos >= bytes.size()) return 0;
    const auto b = bytes[pos];
    if (b >= 0x20 && b < 0x7F) return 1;
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if ((b & 0xE0) == 0xC0) {
        len = 2;
        cp = b & 0x1F;
    } else if ((b & 0xF0) == 0xE0) {
        len = 3;
        cp = b & 0x0F;
    } else if ((b & 0xF8) == 0xF0) {
        len = 4;
        cp = b & 0x07;
    } else {
        return 0;
    }
    if (bytes.size() - pos < len) return 0;
    for (std::size_t i = 1; i < len; ++i) {
        const auto c = bytes[pos + i];
        if ((c & 0xC0) != 0x80) return 0;
        cp = cp << 6 | (c & 0x3F);
    }
    // Reject overlong forms, surrogates, out-of-range and C1 controls.
    static constexpr std::uint32_t kMin[] = {0, 0, 0xA0, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
    return len;
}

std::string decode_printable(ByteView bytes) {
    static constexpr char kDigits[] = "0123456789ABCDEF";
    std::string out;
    std::size_t i = 0;
    while (i < bytes.size()) {
        const auto n = printable_char_length(bytes, i);
        if (n > 0 && bytes[i] != '\\') {
            out.append(reinterpret_cast<const char*>(bytes.data() + i), n);
            i += n;
        } else {
            out += "\\x";
            out.push_back(kDigits[bytes[i] >> 4]);
            out.push_back(kDigits[bytes[i] & 0xF]);
            ++i;
        }
    }
    return out;
}

}  // namespace sv2
