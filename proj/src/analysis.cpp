#include "sv2/analysis.hpp"

#include <algorithm>
#include <set>

namespace sv2 {

namespace {

RecordRef ref_of(const RawRecord& r) {
    const auto fields = extract_fields(r);
    return {r.page_index, r.slot_index, r.digest, display_string(fields)};
}

}  // namespace

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::LiveRecord: return "LiveRecord";
        case Verdict::CarvedOnly: return "CarvedOnly";
        case Verdict::NotFound: return "NotFound";
    }
    return "NotFound";
}

DiffReport diff_records(const std::vector<RawRecord>& a, const std::vector<RawRecord>& b) {
    DiffReport out;
    out.a_total = a.size();
    out.b_total = b.size();
    std::map<Md5, std::size_t> in_a;
    std::map<Md5, std::size_t> in_b;
    for (const auto& r : a) ++in_a[r.digest];
    for (const auto& r : b) ++in_b[r.digest];

    // Walk each side in (page, slot) order and consume matches from the
    // other side's multiset, so duplicates are handled as multiset elements.
    auto matched = in_b;
    for (const auto& r : a) {
        auto it = matched.find(r.digest);
        if (it != matched.end() && it->second > 0) {
            --it->second;
            ++out.unchanged_count;
        } else {
            out.removed.push_back(ref_of(r));
        }
    }
    auto matched_a = in_a;
    for (const auto& r : b) {
        auto it = matched_a.find(r.digest);
        if (it != matched_a.end() && it->second > 0) {
            --it->second;
        } else {
            out.added.push_back(ref_of(r));
        }
    }
    return out;
}

DiffReport diff_stores(const ParsedStore& a, const ParsedStore& b) {
    const auto ra = collect_records(a);
    const auto rb = collect_records(b);
    auto out = diff_records(ra.all(), rb.all());
    out.a_page_errors = ra.error_count();
    out.b_page_errors = rb.error_count();
    return out;
}

CnidDiffReport diff_stores_by_cnid(const ParsedStore& a, const ParsedStore& b) {
    CnidDiffReport out;
    auto index = [&](const ParsedStore& s) {
        std::map<std::uint64_t, Md5> m;
        for (const auto& r : collect_records(s).all()) {
            const auto f = extract_fields(r);
            if (f.cnid_candidates.empty()) {
                ++out.unkeyed_records;
                continue;
            }
            m[f.cnid_candidates.front().value] = r.digest;
        }
        return m;
    };
    const auto ia = index(a);
    const auto ib = index(b);
    for (const auto& [cnid, d] : ia) {
        const auto it = ib.find(cnid);
        if (it == ib.end()) {
            out.removed.push_back(cnid);
        } else if (it->second != d) {
            out.changed.push_back(cnid);
        }
    }
    for (const auto& [cnid, d] : ib) {
        if (!ia.contains(cnid)) out.added.push_back(cnid);
    }
    return out;
}

RecordCount count_records(const ParsedStore& store) {
    RecordCount out;
    out.per_subtype = store.subtype_histogram();
    for (const auto& p : collect_records(store).pages) {
        PageCount pc{p.page_index, p.file_offset, p.records.size(), std::nullopt};
        if (p.error) {
            pc.error = p.error->what();
            ++out.page_errors;
        }
        out.total += p.records.size();
        out.per_page.push_back(std::move(pc));
    }
    return out;
}

std::vector<RawRecord> carved_record_set(const ScanResult& scan) {
    std::vector<RawRecord> out;
    for (std::size_t i = 0; i < scan.pages.size(); ++i) {
        const auto& page = scan.pages[i];
        if (page.confidence != Confidence::Confirmed) continue;
        auto walked = carved_records(page);
        for (auto& r : walked.records) {
            r.page_index = static_cast<std::uint32_t>(i);
            out.push_back(std::move(r));
        }
    }
    return out;
}

PersistenceTable persistence_check(const std::vector<RawRecord>& live, const std::vector<RawRecord>& carved,
                                   const std::vector<std::string>& names) {
    std::set<std::string> unique(names.begin(), names.end());
    const std::vector<std::string> keys(unique.begin(), unique.end());
    const auto live_hits = search_records(live, keys);
    const auto carved_hits = search_records(carved, keys);
    PersistenceTable out;
    for (const auto& name : keys) {
        PersistenceRow row;
        row.name = name;
        row.live_hits = static_cast<std::size_t>(
            std::count_if(live_hits.begin(), live_hits.end(), [&](const Hit& h) { return h.keyword == name; }));
        row.carved_hits = static_cast<std::size_t>(
            std::count_if(carved_hits.begin(), carved_hits.end(), [&](const Hit& h) { return h.keyword == name; }));
        row.verdict = row.live_hits > 0    ? Verdict::LiveRecord
                      : row.carved_hits > 0 ? Verdict::CarvedOnly
                                            : Verdict::NotFound;
        out.push_back(std::move(row));
    }
    return out;
}

PersistenceTable persistence_check(const ParsedStore& live, const ScanResult& carved,
                                   const std::vector<std::string>& names) {
    return persistence_check(collect_records(live).all(), carved_record_set(carved), names);
}

}  // namespace sv2
