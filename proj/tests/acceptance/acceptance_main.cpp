// Acceptance harness: one PASS/FAIL line per criterion. Tolerances are
// fixed below; the exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "sv2/analysis.hpp"
#include "sv2/carver.hpp"
#include "sv2/cli.hpp"
#include "sv2/digest.hpp"
#include "sv2/error.hpp"
#include "sv2/parser.hpp"
#include "sv2/records.hpp"
#include "sv2/synth.hpp"
#include "support/fixtures.hpp"
#include "support/helpers.hpp"

namespace {

using namespace sv2;
using synth::FileEvent;
using synth::StoreModel;
using Clock = std::chrono::steady_clock;

constexpr double kWalkBudgetMs = 1.0;
constexpr double kCountSuiteBudgetS = 30.0;
constexpr double kCarveSuiteBudgetS = 60.0;
constexpr double kPersistenceBudgetS = 60.0;
constexpr std::size_t kCountTrials = 200;
constexpr std::size_t kMaxFiles = 5000;
constexpr std::size_t kMaxFolders = 200;
constexpr std::size_t kPlantedPages = 50;
constexpr std::size_t kCarveImageBytes = std::size_t{64} << 20;
constexpr std::uint64_t kRandomImageBytes = std::uint64_t{1} << 30;
constexpr std::size_t kWipeSequences = 1000;
constexpr std::size_t kDiffTrials = 100;
constexpr std::size_t kMaxLag = 10;
constexpr std::size_t kRobustPages = 100;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 3) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(prec);
    os << v;
    return os.str();
}

std::multiset<Md5> digests_of(const std::vector<RawRecord>& recs) {
    std::multiset<Md5> out;
    for (const auto& r : recs) out.insert(r.digest);
    return out;
}

Outcome size_marker_walk() {
    Bytes stream = {0x8A, 0x08, 0x00, 0x00};
    stream.resize(4 + 2186, 0x41);
    append_u32_le(stream, 6);
    stream.insert(stream.end(), {'s', 'e', 'c', 'o', 'n', 'd'});
    stream.resize(stream.size() + 512, 0);
    split_records(stream);  // warm-up
    const auto t0 = Clock::now();
    const auto r = split_records(stream);
    const double ms = seconds_since(t0) * 1e3;
    const bool shape = r.records.size() == 2 && r.records[0].declared_size == 2186 &&
                       r.records[0].body.size() == 2186 && r.records[1].stream_offset == 2190 &&
                       r.records[1].declared_size == 6;
    return {shape && ms < kWalkBudgetMs,
            "record0=" + std::to_string(r.records.empty() ? 0 : r.records[0].body.size()) + " next_marker@" +
                std::to_string(r.records.size() > 1 ? r.records[1].stream_offset : 0) + " time=" + fmt(ms, 4) +
                "ms"};
}

Outcome count_formula() {
    std::mt19937_64 rng(0xC0FFEE);
    const auto t0 = Clock::now();
    std::size_t exact = 0;
    std::string first_miss;
    for (std::size_t t = 0; t < kCountTrials; ++t) {
        const auto files = std::uniform_int_distribution<std::size_t>(0, kMaxFiles)(rng);
        const auto folders = std::uniform_int_distribution<std::size_t>(0, kMaxFolders)(rng);
        const auto spec = testing::random_spec(rng, files, folders);
        const auto store = parse_store(synth::build_store(spec));
        const auto got = collect_records(store).total();
        if (got == synth::expected_record_count(files, folders)) {
            ++exact;
        } else if (first_miss.empty()) {
            first_miss = " first_miss=(" + std::to_string(files) + "," + std::to_string(folders) + ")->" +
                         std::to_string(got);
        }
    }
    const double s = seconds_since(t0);
    return {exact == kCountTrials && s < kCountSuiteBudgetS,
            std::to_string(exact) + "/" + std::to_string(kCountTrials) + " exact, " + fmt(s) + "s" + first_miss};
}

Outcome empty_baseline() {
    const auto store = parse_store(synth::build_store({}));
    const auto pages = store.total_page_count();
    const auto records = collect_records(store).total();
    return {pages >= 8 && records == 2, "pages=" + std::to_string(pages) + " records=" + std::to_string(records)};
}

// Seeded random bytes produced on demand, never held in memory at once.
class RandomSource : public ByteSource {
public:
    RandomSource(std::uint64_t seed, std::uint64_t total) : rng_(seed), left_(total) {}
    Chunk read(std::span<std::uint8_t> out) override {
        const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(left_, out.size()));
        std::size_t i = 0;
        for (; i + 8 <= n; i += 8) {
            const auto v = rng_();
            std::memcpy(out.data() + i, &v, 8);
        }
        for (; i < n; ++i) out[i] = static_cast<std::uint8_t>(rng_());
        left_ -= n;
        return {n, false};
    }

private:
    std::mt19937_64 rng_;
    std::uint64_t left_;
};

Outcome carving() {
    const auto t0 = Clock::now();
    // 50 intact data pages: the bookkeeping pages plus record pages of one store.
    std::mt19937_64 rng(404);
    StoreModel model(testing::random_spec(rng, 9000, 40));
    std::vector<Bytes> pages;
    {
        const auto store = parse_store(model.emit());
        for (const auto& p : store.pages) {
            if (pages.size() < kPlantedPages) pages.push_back(p.bytes);
        }
    }
    if (pages.size() != kPlantedPages) return {false, "fixture store has only " + std::to_string(pages.size())};

    auto image = testing::random_bytes(405, kCarveImageBytes);
    const std::size_t sectors = kCarveImageBytes / 512;
    const std::size_t span = kPageSize / 512;
    std::set<std::uint64_t> planted;
    std::vector<bool> used(sectors, false);
    for (const auto& page : pages) {
        for (;;) {
            const auto s = std::uniform_int_distribution<std::size_t>(0, sectors - span)(rng);
            if (std::any_of(used.begin() + static_cast<std::ptrdiff_t>(s),
                            used.begin() + static_cast<std::ptrdiff_t>(s + span), [](bool b) { return b; })) {
                continue;
            }
            std::fill(used.begin() + static_cast<std::ptrdiff_t>(s), used.begin() + static_cast<std::ptrdiff_t>(s + span),
                      true);
            std::copy(page.begin(), page.end(), image.begin() + static_cast<std::ptrdiff_t>(s * 512));
            planted.insert(s * 512);
            break;
        }
    }
    const auto scan = scan_image(image);
    std::size_t true_pos = 0, false_pos = 0;
    for (const auto& p : scan.pages) {
        if (p.kind != PageKind::Data || p.confidence != Confidence::Confirmed) continue;
        (planted.contains(p.source_offset) ? true_pos : false_pos)++;
    }
    image.clear();
    image.shrink_to_fit();

    CarveOptions fast;
    fast.digest_input = false;
    fast.keep_page_bytes = false;
    RandomSource noise(406, kRandomImageBytes);
    const auto noise_scan = scan_image(noise, fast);
    const auto noise_confirmed = carve_report(noise_scan.pages).pages_recovered;
    const double s = seconds_since(t0);
    return {true_pos == kPlantedPages && false_pos == 0 && noise_confirmed == 0 &&
                noise_scan.bytes_scanned == kRandomImageBytes && s < kCarveSuiteBudgetS,
            "planted 50: confirmed=" + std::to_string(true_pos) + " fp=" + std::to_string(false_pos) +
                "; 1GiB noise confirmed=" + std::to_string(noise_confirmed) + "; " + fmt(s) + "s"};
}

Outcome persistence() {
    const auto t0 = Clock::now();
    auto name = [](std::size_t i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "doc_%04zu_x.txt", i);
        return std::string(buf);
    };
    StoreModel m({});
    m.apply(FileEvent::create_folder("work"));
    m.apply(FileEvent::create_folder("bulk"));
    for (std::size_t i = 0; i < 1000; ++i) {
        m.apply(FileEvent::create_file((i < 700 ? "work/" : "bulk/") + name(i), {{"kMDItemAuthors", "Examiner"}}));
    }
    std::vector<std::string> deleted;
    for (std::size_t i = 0; i < 700 && deleted.size() < 300; i += 2) {
        m.apply(FileEvent::remove("work/" + name(i)));
        deleted.push_back(name(i));
    }
    for (std::size_t i = 1; deleted.size() < 300; i += 2) {
        m.apply(FileEvent::remove("work/" + name(i)));
        deleted.push_back(name(i));
    }
    const auto live_hits = [&] {
        const auto store = parse_store(m.emit());
        return search_records(collect_records(store).all(), deleted).size();
    };
    const auto hits_after_delete = live_hits();
    m.apply(FileEvent::mass_delete("bulk"));
    const auto hits_after_mass = live_hits();
    const auto mass_removed = m.deltas().back().removed;
    m.apply(FileEvent::index_reset());
    const auto reset_removed = m.deltas().back().removed;

    const auto blob = synth::export_unallocated(m, 505);
    const auto carved = carved_record_set(scan_image(blob));
    std::map<Md5, std::vector<const Bytes*>> by_digest;
    for (const auto& r : carved) by_digest[r.digest].push_back(&r.body);
    std::size_t expected = 0, recovered = 0;
    for (const auto* set : {&mass_removed, &reset_removed}) {
        for (const auto& body : *set) {
            ++expected;
            const auto it = by_digest.find(md5(body));
            if (it != by_digest.end() &&
                std::any_of(it->second.begin(), it->second.end(), [&](const Bytes* b) { return *b == body; })) {
                ++recovered;
            }
        }
    }
    const double s = seconds_since(t0);
    return {hits_after_delete == 0 && hits_after_mass == 0 && recovered == expected && mass_removed.size() == 301 &&
                s < kPersistenceBudgetS,
            "live hits for deleted names=" + std::to_string(hits_after_delete) + "/" +
                std::to_string(hits_after_mass) + "; recovered " + std::to_string(recovered) + "/" +
                std::to_string(expected) + " byte-identical; " + fmt(s) + "s"};
}

// Every live page: back-to-back records, zero tail in the stream and the page.
bool pages_wiped(const StoreModel& m, std::string* why) {
    for (std::size_t p = 0; p < m.live_pages().size(); ++p) {
        const auto image = m.page_image(p);
        const auto page = testing::make_page(image);
        const auto in = inflate_payload(page);
        const auto region = in.records_region();
        const auto split = split_records(region);
        const auto& expect = m.live_pages()[p].records;
        if (split.records.size() != expect.size()) {
            *why = "record count mismatch on page " + std::to_string(p);
            return false;
        }
        std::size_t pos = 0;
        for (std::size_t i = 0; i < expect.size(); ++i) {
            if (split.records[i].stream_offset != pos || split.records[i].body != expect[i].body) {
                *why = "gap or mismatch at slot " + std::to_string(i);
                return false;
            }
            pos += 4 + expect[i].body.size();
        }
        if (!std::all_of(region.begin() + static_cast<std::ptrdiff_t>(pos), region.end(),
                         [](std::uint8_t b) { return b == 0; })) {
            *why = "non-zero stream tail on page " + std::to_string(p);
            return false;
        }
        if (!std::all_of(image.begin() + page.header.allocated_size, image.end(),
                         [](std::uint8_t b) { return b == 0; })) {
            *why = "non-zero bytes after allocated region on page " + std::to_string(p);
            return false;
        }
    }
    return true;
}

// Random valid event against the current model state.
FileEvent random_event(const StoreModel& m, std::mt19937_64& rng, std::size_t& counter) {
    const auto files = m.live_paths(synth::RecordKind::File);
    const auto folders = m.live_paths(synth::RecordKind::Folder);
    const auto roll = rng() % 100;
    if (roll < 45 && !files.empty()) return FileEvent::remove(files[rng() % files.size()]);
    if (roll < 50 && !folders.empty()) return FileEvent::mass_delete(folders[rng() % folders.size()]);
    if (roll < 52) return FileEvent::index_reset();
    std::string parent;
    if (!folders.empty() && rng() % 2 == 0) parent = folders[rng() % folders.size()] + "/";
    if (roll < 60) return FileEvent::create_folder(parent + "nd" + std::to_string(counter++));
    std::map<std::string, std::string> attrs;
    if (rng() % 2 == 0) attrs["kMDItemTitle"] = testing::random_word(rng, 3, 40);
    return FileEvent::create_file(parent + "nf" + std::to_string(counter++) + ".txt", attrs);
}

Outcome wipe_invariant() {
    std::mt19937_64 rng(606);
    std::size_t deletes = 0, failures = 0;
    std::string first;
    for (std::size_t seq = 0; seq < kWipeSequences; ++seq) {
        StoreModel m(testing::random_spec(rng, 20 + rng() % 400, rng() % 6));
        std::size_t counter = 0;
        const auto steps = 5 + rng() % 20;
        bool ok = true;
        for (std::size_t k = 0; k < steps && ok; ++k) {
            auto ev = random_event(m, rng, counter);
            if (ev.kind != synth::EventKind::Delete) {
                m.apply(ev);
                continue;
            }
            m.apply(ev);
            ++deletes;
            std::string why;
            if (!pages_wiped(m, &why)) {
                ok = false;
                ++failures;
                if (first.empty()) first = " first: seq " + std::to_string(seq) + " " + why;
            }
        }
    }
    return {failures == 0 && deletes > 0, std::to_string(kWipeSequences) + " sequences, " + std::to_string(deletes) +
                                              " deletes, " + std::to_string(failures) + " violations" + first};
}

Outcome diff_exactness() {
    std::mt19937_64 rng(707);
    std::size_t exact = 0;
    std::string first;
    for (std::size_t t = 0; t < kDiffTrials; ++t) {
        const std::size_t lag = t % (kMaxLag + 1);
        StoreModel m(testing::random_spec(rng, rng() % 600, rng() % 8));
        std::size_t counter = 0;
        const auto steps = kMaxLag + rng() % 10;
        for (std::size_t k = 0; k < steps; ++k) m.apply(random_event(m, rng, counter));
        const auto pair = synth::emit_store_pair(m, lag);
        const auto d = diff_stores(parse_store(pair.store), parse_store(pair.dot_store));
        const auto want = synth::pending_delta(m, lag);
        std::vector<Md5> added, removed;
        for (const auto& r : d.added) added.push_back(r.digest);
        for (const auto& r : d.removed) removed.push_back(r.digest);
        std::sort(added.begin(), added.end());
        std::sort(removed.begin(), removed.end());
        if (added == want.added && removed == want.removed && d.a_page_errors + d.b_page_errors == 0) {
            ++exact;
        } else if (first.empty()) {
            first = " first_miss: trial " + std::to_string(t) + " lag " + std::to_string(lag);
        }
    }
    return {exact == kDiffTrials, std::to_string(exact) + "/" + std::to_string(kDiffTrials) + " exact" + first};
}

Outcome robustness() {
    // Header + map + 5 bookkeeping pages + 93 record pages.
    const std::size_t record_pages = kRobustPages - 2 - synth::kBookkeepingPages;
    auto spec_for = [](std::size_t n) {
        synth::StoreSpec spec;
        spec.seed = 808;
        for (std::size_t i = 0; i < n; ++i) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "file_%06zu.txt", i);
            spec.files.push_back({buf, "", {}});
        }
        return spec;
    };
    std::size_t lo = 0, hi = 40000;
    while (lo < hi) {
        const auto mid = (lo + hi) / 2;
        if (StoreModel(spec_for(mid)).live_pages().size() < record_pages) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    const StoreModel model(spec_for(lo));
    auto bytes = model.emit();
    auto store = parse_store(bytes);
    if (store.total_page_count() != kRobustPages) {
        return {false, "fixture has " + std::to_string(store.total_page_count()) + " pages"};
    }
    std::vector<const DataPage*> rec_pages;
    for (const auto& p : store.pages) {
        if (p.header.subtype == 9) rec_pages.push_back(&p);
    }
    const auto victim = rec_pages[rec_pages.size() / 2]->file_offset;
    for (std::size_t i = 0; i < 16; ++i) bytes[victim + kPayloadOffset + 8 + i] = 0xFF;

    store = parse_store(bytes);
    const auto counts = count_records(store);
    std::size_t decompress_errors = 0, correct_pages = 0, other_errors = 0;
    std::size_t rp = 0;
    for (const auto& pc : counts.per_page) {
        const auto expect = model.live_pages()[rp++].records.size();
        if (pc.error) {
            (pc.error->find("DecompressError") == 0 ? decompress_errors : other_errors)++;
        } else if (pc.records == expect) {
            ++correct_pages;
        }
    }
    std::size_t tables_ok = 0;
    for (const auto& p : store.pages) {
        if (p.header.subtype == 17 && parse_attribute_page(p).size() == synth::attribute_names().size()) ++tables_ok;
        if (p.header.subtype == 33 && parse_uti_page(p).size() == synth::uti_table().size()) ++tables_ok;
    }
    // Header, map, three opaque pages and both tables parse alongside the record pages.
    const std::size_t opaque = store.pages.size() - counts.per_page.size() - 2;
    const std::size_t parsed_ok = 2 + opaque + tables_ok + correct_pages;

    const auto path = std::filesystem::temp_directory_path() / "sv2_acceptance_robust.db";
    {
        std::ofstream f(path, std::ios::binary);
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
    std::ostringstream out, err;
    const int rc = cli::run({"inspect", path.string(), "--format", "json"}, out, err);
    std::filesystem::remove(path);
    return {parsed_ok == kRobustPages - 1 && decompress_errors == 1 && other_errors == 0 && rc == 3,
            std::to_string(parsed_ok) + " pages parsed correctly, DecompressError=" +
                std::to_string(decompress_errors) + ", exit=" + std::to_string(rc)};
}

Outcome byte_facts() {
    std::vector<std::string> misses;
    auto check = [&](bool ok, const std::string& what) {
        if (!ok) misses.push_back(what);
    };
    const auto bytes = synth::build_store({});
    const ByteView v(bytes);
    check(std::equal(v.begin(), v.begin() + 4, "8tsd"), "header magic");
    check(std::equal(v.begin() + 4096, v.begin() + 4100, "2mbd"), "map magic");
    check(std::equal(v.begin() + 4096 + 16384, v.begin() + 4096 + 16384 + 4, "2pbd"), "data magic");
    check(read_field_u32_le(v, kHeaderSizeOffset) == 4096, "header size 4096");
    check(read_field_u32_le(v, 4096 + kMapPageSizeOffset) == 16384, "map page_size 16384");
    const auto store = parse_store(bytes);
    check(store.map && store.map->page_size == 16384, "parsed map page_size");
    check(store.header.header_page_size == 4096, "parsed header size");

    Bytes page(kPageSize, 0);
    std::copy(fixtures::kUtiPageHead.begin(), fixtures::kUtiPageHead.end(), page.begin());
    const auto utis = parse_uti_page(testing::make_page(page));
    check(utis.size() >= 2 && utis[0].record_number == 1 && utis[0].uti == "public.message", "UTI entry 1");
    check(utis.size() >= 2 && utis[1].record_number == 2 && utis[1].uti == "com.apple.mail.emlx", "UTI entry 2");

    std::string detail = "magics, sizes and UTI fixture";
    for (const auto& m : misses) detail += "; miss: " + m;
    return {misses.empty(), detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1 size-marker walk", size_marker_walk},
        {"2 count formula round-trip", count_formula},
        {"3 empty-store baseline", empty_baseline},
        {"4 carving recall/precision", carving},
        {"5 persistence reproduction", persistence},
        {"6 wipe invariant", wipe_invariant},
        {"7 diff exactness", diff_exactness},
        {"8 robustness", robustness},
        {"9 byte-fact fixtures", byte_facts},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << o.detail << std::endl;
        failed += o.pass ? 0 : 1;
    }
    std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED") << std::endl;
    return failed == 0 ? 0 : 1;
}
