#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sv2/carver.hpp"
#include "sv2/parser.hpp"
#include "sv2/records.hpp"

namespace sv2 {

struct RecordRef {
    std::uint32_t page_index = 0;
    std::uint32_t slot_index = 0;
    Md5 digest{};
    std::string first_string;
};

struct DiffReport {
    std::vector<RecordRef> added;    // only in B
    std::vector<RecordRef> removed;  // only in A
    std::size_t unchanged_count = 0;
    std::size_t a_total = 0;
    std::size_t b_total = 0;
    std::string method = "md5-multiset";
    std::size_t a_page_errors = 0;
    std::size_t b_page_errors = 0;
};

// Multiset difference over record-body MD5 digests.
DiffReport diff_stores(const ParsedStore& a, const ParsedStore& b);
DiffReport diff_records(const std::vector<RawRecord>& a, const std::vector<RawRecord>& b);

// Investigator mode keyed on the first CNID candidate of each record.
// Heuristic: records without a candidate are keyed by digest.
struct CnidDiffReport {
    std::vector<std::uint64_t> added;
    std::vector<std::uint64_t> removed;
    std::vector<std::uint64_t> changed;
    std::size_t unkeyed_records = 0;
};

CnidDiffReport diff_stores_by_cnid(const ParsedStore& a, const ParsedStore& b);

struct PageCount {
    std::uint32_t page_index = 0;
    std::uint64_t file_offset = 0;
    std::size_t records = 0;
    std::optional<std::string> error;
};

struct RecordCount {
    std::size_t total = 0;
    std::vector<PageCount> per_page;                   // subtype-9 pages
    std::map<std::uint32_t, std::size_t> per_subtype;  // page histogram
    std::size_t page_errors = 0;
};

RecordCount count_records(const ParsedStore& store);

enum class Verdict { LiveRecord, CarvedOnly, NotFound };

std::string_view to_string(Verdict v);

struct PersistenceRow {
    std::string name;
    Verdict verdict = Verdict::NotFound;
    std::size_t live_hits = 0;
    std::size_t carved_hits = 0;
};

using PersistenceTable = std::vector<PersistenceRow>;

// Sorted by name.
PersistenceTable persistence_check(const std::vector<RawRecord>& live, const std::vector<RawRecord>& carved,
                                   const std::vector<std::string>& names);
PersistenceTable persistence_check(const ParsedStore& live, const ScanResult& carved,
                                   const std::vector<std::string>& names);

std::vector<RawRecord> carved_record_set(const ScanResult& scan);

}  // namespace sv2
