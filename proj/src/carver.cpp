#include "sv2/carver.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <thread>

namespace sv2 {

std::string_view to_string(Confidence c) {
    switch (c) {
        case Confidence::Confirmed: return "confirmed";
        case Confidence::Candidate: return "candidate";
        case Confidence::Rejected: return "rejected";
    }
    return "rejected";
}

ByteSource::Chunk MemorySource::read(std::span<std::uint8_t> out) {
    const auto n = std::min(out.size(), bytes_.size() - pos_);
    std::memcpy(out.data(), bytes_.data() + pos_, n);
    pos_ += n;
    return {n, false};
}

FileSource::FileSource(const std::string& path) {
    if (path == "-") {
        fd_ = STDIN_FILENO;
    } else {
        fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
        if (fd_ < 0) throw Error(ErrorCode::IoError, "cannot open '" + path + "': " + std::strerror(errno));
        owned_ = true;
    }
    struct stat st {};
    seekable_ = ::fstat(fd_, &st) == 0 && S_ISREG(st.st_mode);
}

FileSource::~FileSource() {
    if (owned_) ::close(fd_);
}

ByteSource::Chunk FileSource::read(std::span<std::uint8_t> out) {
    std::size_t got = 0;
    while (got < out.size()) {
        const auto r = seekable_ ? ::pread(fd_, out.data() + got, out.size() - got, static_cast<off_t>(pos_ + got))
                                 : ::read(fd_, out.data() + got, out.size() - got);
        if (r < 0) {
            if (errno == EINTR) continue;
            if (got > 0) break;
            if (!seekable_) return {0, true};
            // Skip one sector-sized region past the unreadable bytes.
            const std::size_t skip = std::min<std::size_t>(out.size(), 512);
            std::memset(out.data(), 0, skip);
            pos_ += skip;
            return {skip, true};
        }
        if (r == 0) break;
        got += static_cast<std::size_t>(r);
    }
    pos_ += got;
    return {got, false};
}

namespace {

bool starts_with_signature(const std::uint8_t* p) {
    return std::memcmp(p, kDataMagic.tag.data(), 4) == 0 || std::memcmp(p, kMapMagic.tag.data(), 4) == 0 ||
           std::memcmp(p, kHeaderMagic.tag.data(), 4) == 0;
}

}  // namespace

CarvedPage evaluate_candidate(ByteView window, std::uint64_t offset, std::uint32_t page_size) {
    CarvedPage out;
    out.source_offset = offset;
    if (window.size() < kPageHeaderSize) {
        out.note = "fewer than 20 bytes available";
        return out;
    }
    const auto cls = classify_page(window.first(kPageHeaderSize));
    out.kind = cls.kind;
    out.subtype = cls.subtype;
    const bool complete = window.size() >= page_size;
    auto keep = [&](std::size_t len) { out.bytes.assign(window.begin(), window.begin() + std::min(len, window.size())); };

    switch (cls.kind) {
        case PageKind::NotAPage:
            out.note = "no page signature";
            return out;
        case PageKind::Header: {
            const auto hs = window.size() >= kHeaderSizeOffset + 4 ? read_field_u32_le(window, kHeaderSizeOffset) : 0;
            if (hs == kHeaderPageSize && window.size() >= hs) {
                out.confidence = Confidence::Confirmed;
            } else if (hs >= 512 && hs % 512 == 0 && hs <= page_size && window.size() >= hs) {
                out.confidence = Confidence::Candidate;
                out.note = "non-canonical header size " + std::to_string(hs);
            } else {
                out.note = "implausible header size " + std::to_string(hs);
                return out;
            }
            keep(hs);
            return out;
        }
        case PageKind::Map: {
            if (read_field_u32_le(window, kMapPageSizeOffset) != page_size) {
                out.note = "map page size field mismatch";
                return out;
            }
            out.confidence = complete ? Confidence::Confirmed : Confidence::Candidate;
            if (!complete) out.note = "truncated at end of input";
            keep(page_size);
            return out;
        }
        case PageKind::Data: break;
    }

    out.header = DataPageHeader::decode(window);
    if (out.header.physical_size != page_size) {
        out.note = "physical size " + std::to_string(out.header.physical_size) + " != " + std::to_string(page_size);
        return out;
    }
    if (out.header.allocated_size > out.header.physical_size) {
        out.note = "allocated size exceeds physical size";
        return out;
    }
    keep(page_size);
    out.confidence = Confidence::Confirmed;
    if (cls.subtype == static_cast<std::uint32_t>(Subtype::MetadataRecords)) {
        const auto walked = carved_records(out);
        if (walked.error) {
            out.confidence = Confidence::Candidate;
            out.note = walked.error->what();
        } else if (walked.truncated) {
            out.confidence = Confidence::Candidate;
            out.note = "record walk truncated";
        } else {
            out.record_count = walked.records.size();
        }
    }
    if (!complete && out.confidence == Confidence::Confirmed) {
        out.confidence = Confidence::Candidate;
        out.note = "truncated at end of input";
    }
    if (out.confidence != Confidence::Confirmed) out.record_count = 0;
    return out;
}

Confidence validate_page(ByteView candidate, std::uint32_t page_size) {
    return evaluate_candidate(candidate, 0, page_size).confidence;
}

PageRecords carved_records(const CarvedPage& page) {
    if (page.kind != PageKind::Data || page.subtype != static_cast<std::uint32_t>(Subtype::MetadataRecords)) {
        return {};
    }
    DataPage dp;
    dp.file_offset = page.source_offset;
    dp.header = page.header;
    dp.bytes = page.bytes;
    return walk_page(dp);
}

ScanResult scan_image(ByteSource& source, const CarveOptions& options) {
    if (options.sector_size == 0 || options.page_size % options.sector_size != 0) {
        throw std::invalid_argument("sector size must divide page size");
    }
    if (options.page_size < kPageHeaderSize) throw std::invalid_argument("page size too small");
    const std::uint64_t step = options.byte_granular ? 1 : options.sector_size;
    const std::size_t chunk = std::max<std::size_t>(options.chunk_size, options.sector_size);

    ScanResult result;
    std::optional<Md5Stream> digest;
    if (options.digest_input) digest.emplace();

    Bytes buf;
    std::uint64_t base = 0;       // absolute offset of buf[0]
    std::uint64_t next = 0;       // next candidate offset to test
    std::uint64_t covered = 0;    // end of the last accepted page
    bool eof = false;

    while (!eof) {
        const std::size_t old = buf.size();
        buf.resize(old + chunk);
        std::size_t filled = 0;
        while (filled < chunk) {
            const auto c = source.read(std::span(buf).subspan(old + filled, chunk - filled));
            if (c.error) result.io_errors.push_back({base + old + filled, c.n});
            if (c.n == 0) {
                eof = true;
                break;
            }
            filled += c.n;
        }
        buf.resize(old + filled);
        if (digest) digest->update(ByteView(buf).subspan(old));
        result.bytes_scanned += filled;

        const std::uint64_t end = base + buf.size();
        // Offsets whose full window is buffered (or everything at EOF).
        const std::uint64_t limit = eof ? (end >= kPageHeaderSize ? end - kPageHeaderSize + 1 : 0)
                                        : (end >= options.page_size ? end - options.page_size + 1 : 0);
        std::vector<std::uint64_t> hits;
        for (; next < limit; next += step) {
            if (starts_with_signature(buf.data() + (next - base))) hits.push_back(next);
        }

        std::vector<CarvedPage> evaluated(hits.size());
        auto eval = [&](std::size_t i) {
            const auto rel = hits[i] - base;
            const auto len = std::min<std::uint64_t>(options.page_size, buf.size() - rel);
            evaluated[i] = evaluate_candidate(ByteView(buf).subspan(rel, len), hits[i], options.page_size);
        };
        const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(hits.size())));
        if (workers <= 1) {
            for (std::size_t i = 0; i < hits.size(); ++i) eval(i);
        } else {
            std::atomic<std::size_t> cursor{0};
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (std::size_t i = cursor++; i < hits.size(); i = cursor++) eval(i);
                });
            }
        }

        for (auto& page : evaluated) {
            if (page.kind == PageKind::NotAPage) continue;
            if (page.source_offset < covered) {
                result.suppressed.push_back(page.source_offset);
                continue;
            }
            if (page.confidence != Confidence::Rejected) covered = page.source_offset + page.bytes.size();
            if (!options.keep_page_bytes) page.bytes.clear();
            result.pages.push_back(std::move(page));
        }

        const std::uint64_t keep_from = std::min(next, end);
        buf.erase(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(keep_from - base));
        base = keep_from;
    }
    if (digest) result.input_md5 = digest->finish();
    return result;
}

ScanResult scan_image(ByteView bytes, const CarveOptions& options) {
    MemorySource src(bytes);
    return scan_image(src, options);
}

CarveReport carve_report(const std::vector<CarvedPage>& pages) {
    CarveReport r;
    for (const auto& p : pages) {
        ++r.by_confidence[std::string(to_string(p.confidence))];
        if (p.confidence == Confidence::Rejected) continue;
        switch (p.kind) {
            case PageKind::Header: ++r.header_pages; break;
            case PageKind::Map: ++r.map_pages; break;
            case PageKind::Data:
                ++r.by_subtype[p.subtype];
                if (p.confidence == Confidence::Confirmed) {
                    ++r.pages_recovered;
                    if (p.subtype == static_cast<std::uint32_t>(Subtype::MetadataRecords)) {
                        r.records_recovered += p.record_count;
                    }
                }
                break;
            case PageKind::NotAPage: break;
        }
    }
    return r;
}

}  // namespace sv2
