#include "sv2/report.hpp"

#include <iomanip>

namespace sv2::report {

using nlohmann::json;

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

json diagnostics_json(const Diagnostics& d) {
    json out = json::array();
    for (const auto& w : d) out.push_back({{"offset", w.offset}, {"code", w.code}, {"message", w.message}});
    return out;
}

json header_json(const StoreHeader& h) {
    return {{"magic", std::string(h.magic.view())},
            {"header_page_size", h.header_page_size},
            {"volume_path", h.volume_path},
            {"raw_tail_length", h.raw_tail.size()},
            {"raw_tail_md5", to_hex(md5(h.raw_tail))}};
}

json map_json(const PageMap& m) {
    json entries = json::array();
    for (const auto& e : m.entries) {
        entries.push_back({{"data_page_size", e.data_page_size}, {"unknown12_hex", to_hex(e.unknown12)}});
    }
    return {{"magic", std::string(m.magic.view())},
            {"page_size", m.page_size},
            {"page_count", m.page_count},
            {"page_type", m.page_type},
            {"entries", entries}};
}

json record_json(const RawRecord& r) {
    const auto f = extract_fields(r);
    auto candidates = [](const std::vector<IdCandidate>& v) {
        json a = json::array();
        for (const auto& c : v) {
            a.push_back({{"offset", c.offset},
                         {"value", c.value},
                         {"endian", c.endian == Endian::Little ? "little" : "big"}});
        }
        return a;
    };
    return {{"page_index", r.page_index},
            {"slot_index", r.slot_index},
            {"declared_size", r.declared_size},
            {"truncated", r.truncated},
            {"digest", to_hex(r.digest)},
            {"strings", f.strings},
            {"cnid_candidates", candidates(f.cnid_candidates)},
            {"parent_cnid_candidates", candidates(f.parent_cnid_candidates)}};
}

json carve_json(const ScanResult& scan, const CarveReport& report, const CarveOptions& options) {
    json pages = json::array();
    for (const auto& p : scan.pages) {
        json j = {{"offset", p.source_offset},
                  {"kind", std::string(to_string(p.kind))},
                  {"confidence", std::string(to_string(p.confidence))},
                  {"record_count", p.record_count}};
        if (p.kind == PageKind::Data) {
            j["subtype"] = p.subtype;
            j["physical_size"] = p.header.physical_size;
            j["allocated_size"] = p.header.allocated_size;
            j["size2"] = p.header.size2;
        }
        if (!p.note.empty()) j["note"] = p.note;
        pages.push_back(std::move(j));
    }
    json by_subtype = json::object();
    for (const auto& [k, v] : report.by_subtype) by_subtype[std::to_string(k)] = v;
    json io = json::array();
    for (const auto& r : scan.io_errors) io.push_back({{"offset", r.offset}, {"length", r.length}});
    return {{"version", kSchemaVersion},
            {"parameters",
             {{"sector_size", options.sector_size},
              {"page_size", options.page_size},
              {"byte_granular", options.byte_granular}}},
            {"pages", pages},
            {"suppressed_offsets", scan.suppressed},
            {"io_errors", io},
            {"totals",
             {{"pages_recovered", report.pages_recovered},
              {"records_recovered", report.records_recovered},
              {"header_pages", report.header_pages},
              {"map_pages", report.map_pages},
              {"by_subtype", by_subtype},
              {"by_confidence", report.by_confidence},
              {"bytes_scanned", scan.bytes_scanned}}}};
}

json diff_json(const DiffReport& d) {
    auto refs = [](const std::vector<RecordRef>& v) {
        json a = json::array();
        for (const auto& r : v) {
            a.push_back({{"page", r.page_index},
                         {"slot", r.slot_index},
                         {"digest", to_hex(r.digest)},
                         {"first_string", r.first_string}});
        }
        return a;
    };
    return {{"method", d.method},
            {"added", refs(d.added)},
            {"removed", refs(d.removed)},
            {"unchanged_count", d.unchanged_count},
            {"a_total", d.a_total},
            {"b_total", d.b_total},
            {"a_page_errors", d.a_page_errors},
            {"b_page_errors", d.b_page_errors}};
}

json hits_json(const std::vector<Hit>& hits) {
    json a = json::array();
    for (const auto& h : hits) {
        a.push_back({{"page_index", h.page_index},
                     {"slot_index", h.slot_index},
                     {"keyword", h.keyword},
                     {"byte_offset", h.byte_offset}});
    }
    return a;
}

void attrs_csv(std::ostream& out, const std::vector<AttributeEntry>& entries) {
    out << "record_number,flags_hex,name\n";
    for (const auto& e : entries) out << e.record_number << ',' << to_hex(e.flags) << ',' << csv_field(e.name) << '\n';
}

void utis_csv(std::ostream& out, const std::vector<UtiEntry>& entries) {
    out << "record_number,uti,language_code\n";
    for (const auto& e : entries) {
        out << e.record_number << ',' << csv_field(e.uti) << ',' << csv_field(e.language_code.value_or("")) << '\n';
    }
}

void diff_csv(std::ostream& out, const DiffReport& d) {
    out << "status,page,slot,digest,first_string\n";
    for (const auto& [status, refs] : {std::pair{"removed", &d.removed}, std::pair{"added", &d.added}}) {
        for (const auto& r : *refs) {
            out << status << ',' << r.page_index << ',' << r.slot_index << ',' << to_hex(r.digest) << ','
                << csv_field(r.first_string) << '\n';
        }
    }
}

void carve_table(std::ostream& out, const CarveReport& report, const ScanResult& scan) {
    out << std::left << std::setw(20) << "Pages recovered" << std::setw(22) << "Unallocated records"
        << std::setw(14) << "Header pages" << "Map pages\n";
    out << std::setw(20) << report.pages_recovered << std::setw(22) << report.records_recovered << std::setw(14)
        << report.header_pages << report.map_pages << "\n\n";
    out << std::setw(14) << "Offset" << std::setw(8) << "Kind" << std::setw(9) << "Subtype" << std::setw(11)
        << "Confidence" << "Records\n";
    for (const auto& p : scan.pages) {
        out << std::setw(14) << p.source_offset << std::setw(8) << to_string(p.kind) << std::setw(9)
            << (p.kind == PageKind::Data ? std::to_string(p.subtype) : "-") << std::setw(11)
            << to_string(p.confidence) << p.record_count << '\n';
    }
}

}  // namespace sv2::report
