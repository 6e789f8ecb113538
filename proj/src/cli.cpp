#include "sv2/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <thread>

#include "sv2/analysis.hpp"
#include "sv2/carver.hpp"
#include "sv2/parser.hpp"
#include "sv2/records.hpp"
#include "sv2/report.hpp"
#include "sv2/synth.hpp"

namespace sv2::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Input {
    std::string path;
    Bytes bytes;
    std::string md5_hex;
};

Input read_input(const std::string& path) {
    Input in;
    in.path = path;
    if (path == "-") {
        in.bytes.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    } else {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
        in.bytes.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    }
    in.md5_hex = to_hex(md5(in.bytes));
    return in;
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::string text_md5(const std::string& s) {
    return to_hex(md5(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())));
}

bool same_path(const std::string& a, const std::string& b) {
    if (a == "-" || b == "-") return false;
    std::error_code ec;
    if (fs::exists(a, ec) && fs::exists(b, ec)) return fs::equivalent(a, b, ec);
    return fs::weakly_canonical(a, ec) == fs::weakly_canonical(b, ec);
}

void refuse_overwrite(const std::vector<std::string>& inputs, const std::string& output) {
    for (const auto& in : inputs) {
        if (same_path(in, output)) throw UsageError("refusing to write to input path '" + output + "'");
    }
}

void write_file(const std::string& path, ByteView bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(ErrorCode::IoError, "short write to '" + path + "'");
}

json provenance(const std::string& command, const std::vector<const Input*>& inputs, json parameters) {
    json in = json::array();
    for (const auto* i : inputs) in.push_back({{"path", i->path}, {"md5", i->md5_hex}, {"size", i->bytes.size()}});
    return {{"version", report::kSchemaVersion},
            {"tool", report::kToolName},
            {"tool_version", report::kToolVersion},
            {"command", command},
            {"inputs", in},
            {"parameters", std::move(parameters)}};
}

void emit_json(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

void print_warnings(std::ostream& err, const Diagnostics& d) {
    for (const auto& w : d) err << "warning: " << w.code << " @" << w.offset << ": " << w.message << '\n';
}

struct Options {
    std::string format;
    std::string output;
    bool terminal = false;

    // Resolved format: explicit flag, then SV2_FORMAT, then the default.
    std::string resolve(const std::string& fallback_tty, const std::string& fallback_pipe) const {
        if (!format.empty()) return format;
        if (const char* env = std::getenv("SV2_FORMAT"); env != nullptr && *env != '\0') return env;
        return terminal ? fallback_tty : fallback_pipe;
    }
};

// Writes to -o when given (refusing input paths), else to `out`.
class Sink {
public:
    Sink(const Options& opts, std::ostream& out, const std::vector<std::string>& inputs) : out_(&out) {
        if (!opts.output.empty() && opts.output != "-") {
            refuse_overwrite(inputs, opts.output);
            file_.open(opts.output, std::ios::binary | std::ios::trunc);
            if (!file_) throw Error(ErrorCode::IoError, "cannot write '" + opts.output + "'");
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }

private:
    std::ofstream file_;
    std::ostream* out_;
};

int cmd_inspect(const Options& opts, const std::string& path, std::ostream& out, std::ostream& err) {
    const auto in = read_input(path);
    const auto store = parse_store(in.bytes);
    const auto counts = count_records(store);
    Sink sink(opts, out, {path});
    auto& os = sink.stream();
    const auto fmt = opts.resolve("table", "json");

    if (fmt == "json") {
        json pages = json::array();
        std::map<std::uint32_t, const PageCount*> by_index;
        for (const auto& pc : counts.per_page) by_index[pc.page_index] = &pc;
        for (const auto& p : store.pages) {
            json j = {{"index", p.index},
                      {"offset", p.file_offset},
                      {"length", p.bytes.size()},
                      {"subtype", p.header.subtype},
                      {"physical_size", p.header.physical_size},
                      {"allocated_size", p.header.allocated_size},
                      {"size2", p.header.size2}};
            if (auto it = by_index.find(p.index); it != by_index.end()) {
                j["records"] = it->second->records;
                if (it->second->error) j["error"] = *it->second->error;
            }
            pages.push_back(std::move(j));
        }
        json hist = json::object();
        for (const auto& [k, v] : counts.per_subtype) hist[std::to_string(k)] = v;
        json j = provenance("inspect", {&in}, json::object());
        j["header"] = report::header_json(store.header);
        j["map"] = store.map ? report::map_json(*store.map) : json(nullptr);
        j["page_location"] = store.location == PageLocation::Map ? "map" : "signature_scan";
        j["total_pages"] = store.total_page_count();
        j["pages"] = pages;
        j["subtype_histogram"] = hist;
        j["records_total"] = counts.total;
        j["page_errors"] = counts.page_errors;
        j["warnings"] = report::diagnostics_json(store.warnings);
        emit_json(os, j);
    } else if (fmt == "csv") {
        os << "index,offset,subtype,physical_size,allocated_size,records,error\n";
        std::map<std::uint32_t, const PageCount*> by_index;
        for (const auto& pc : counts.per_page) by_index[pc.page_index] = &pc;
        for (const auto& p : store.pages) {
            const auto it = by_index.find(p.index);
            os << p.index << ',' << p.file_offset << ',' << p.header.subtype << ',' << p.header.physical_size << ','
               << p.header.allocated_size << ',' << (it != by_index.end() ? std::to_string(it->second->records) : "")
               << ',' << report::csv_field(it != by_index.end() ? it->second->error.value_or("") : "") << '\n';
        }
    } else {
        os << "store:        " << path << " (" << in.bytes.size() << " bytes, md5 " << in.md5_hex << ")\n"
           << "volume path:  " << store.header.volume_path << '\n'
           << "header size:  " << store.header.header_page_size << '\n'
           << "map:          "
           << (store.map ? std::to_string(store.map->page_count) + " entries, page size " +
                               std::to_string(store.map->page_size)
                         : std::string("absent"))
           << '\n'
           << "total pages:  " << store.total_page_count() << '\n'
           << "records:      " << counts.total << '\n'
           << "subtypes:    ";
        for (const auto& [k, v] : counts.per_subtype) os << ' ' << k << "x" << v;
        os << '\n';
        for (const auto& pc : counts.per_page) {
            if (pc.error) os << "page " << pc.page_index << ": " << *pc.error << '\n';
        }
    }
    print_warnings(err, store.warnings);
    for (const auto& pc : counts.per_page) {
        if (pc.error) err << "error: page " << pc.page_index << " @" << pc.file_offset << ": " << *pc.error << '\n';
    }
    return store.warnings.empty() && counts.page_errors == 0 ? kOk : kPartial;
}

int cmd_records(const Options& opts, const std::string& path, std::ostream& out, std::ostream& err) {
    const auto in = read_input(path);
    const auto store = parse_store(in.bytes);
    const auto recs = collect_records(store);
    Sink sink(opts, out, {path});
    auto& os = sink.stream();
    const auto fmt = opts.resolve("table", "json");
    bool partial = !store.warnings.empty();
    for (const auto& page : recs.pages) {
        if (page.error) {
            err << "error: page " << page.page_index << " @" << page.file_offset << ": " << page.error->what() << '\n';
            partial = true;
        }
        if (page.truncated) {
            err << "warning: page " << page.page_index << ": TruncatedRecord\n";
            partial = true;
        }
    }
    if (fmt == "csv") os << "page_index,slot_index,declared_size,digest,first_string\n";
    for (const auto& r : recs.all()) {
        if (fmt == "json") {
            os << report::record_json(r).dump() << '\n';
        } else {
            const auto f = extract_fields(r);
            const std::string first = display_string(f);
            if (fmt == "csv") {
                os << r.page_index << ',' << r.slot_index << ',' << r.declared_size << ',' << to_hex(r.digest) << ','
                   << report::csv_field(first) << '\n';
            } else {
                os << std::setw(6) << r.page_index << std::setw(6) << r.slot_index << std::setw(8) << r.declared_size
                   << "  " << to_hex(r.digest) << "  " << first << '\n';
            }
        }
    }
    print_warnings(err, store.warnings);
    return partial ? kPartial : kOk;
}

template <typename Entry, typename Parse, typename Csv>
int cmd_table(const Options& opts, const std::string& path, Subtype subtype, Parse parse, Csv csv,
              std::ostream& out, std::ostream& err) {
    const auto in = read_input(path);
    const auto store = parse_store(in.bytes);
    Diagnostics warnings = store.warnings;
    std::vector<Entry> entries;
    for (const auto& p : store.pages) {
        if (p.header.subtype != static_cast<std::uint32_t>(subtype)) continue;
        Diagnostics page_warnings;
        auto got = parse(p, &page_warnings);
        for (auto& w : page_warnings) {
            w.offset += p.file_offset;
            warnings.push_back(std::move(w));
        }
        entries.insert(entries.end(), std::make_move_iterator(got.begin()), std::make_move_iterator(got.end()));
    }
    Sink sink(opts, out, {path});
    auto& os = sink.stream();
    const auto fmt = opts.resolve("csv", "csv");
    if (fmt == "json") {
        json a = json::array();
        for (const auto& e : entries) {
            if constexpr (std::is_same_v<Entry, AttributeEntry>) {
                a.push_back({{"record_number", e.record_number}, {"flags_hex", to_hex(e.flags)}, {"name", e.name}});
            } else {
                a.push_back({{"record_number", e.record_number},
                             {"uti", e.uti},
                             {"language_code", e.language_code ? json(*e.language_code) : json(nullptr)}});
            }
        }
        json j = provenance(subtype == Subtype::AttributeTable ? "attrs" : "utis", {&in}, json::object());
        j["entries"] = a;
        emit_json(os, j);
    } else {
        csv(os, entries);
    }
    print_warnings(err, warnings);
    return warnings.empty() ? kOk : kPartial;
}

int cmd_search(const Options& opts, const std::string& path, const std::vector<std::string>& keywords,
               std::ostream& out, std::ostream& err) {
    if (keywords.empty()) throw UsageError("search needs at least one -k keyword");
    const auto in = read_input(path);
    const auto store = parse_store(in.bytes);
    const auto recs = collect_records(store);
    const auto hits = search_records(recs.all(), keywords);
    Sink sink(opts, out, {path});
    auto& os = sink.stream();
    const auto fmt = opts.resolve("table", "json");
    if (fmt == "json") {
        json j = provenance("search", {&in}, {{"keywords", keywords}});
        j["hits"] = report::hits_json(hits);
        emit_json(os, j);
    } else {
        if (fmt == "csv") os << "page_index,slot_index,keyword,byte_offset\n";
        for (const auto& h : hits) {
            os << h.page_index << ',' << h.slot_index << ',' << report::csv_field(h.keyword) << ',' << h.byte_offset
               << '\n';
        }
    }
    print_warnings(err, store.warnings);
    return store.warnings.empty() && recs.error_count() == 0 ? kOk : kPartial;
}

int cmd_carve(const Options& opts, const std::string& path, CarveOptions co, const std::string& dump_dir,
              std::ostream& out, std::ostream& err) {
    FileSource src(path);
    auto scan = scan_image(src, co);
    const auto rep = carve_report(scan.pages);
    if (!dump_dir.empty()) {
        refuse_overwrite({path}, dump_dir);
        fs::create_directories(dump_dir);
        for (const auto& p : scan.pages) {
            if (p.confidence == Confidence::Rejected) continue;
            const auto file = (fs::path(dump_dir) / ("page_" + std::to_string(p.source_offset) + ".bin")).string();
            refuse_overwrite({path}, file);
            write_file(file, p.bytes);
        }
    }
    Sink sink(opts, out, {path});
    auto& os = sink.stream();
    const auto fmt = opts.resolve("table", "json");
    if (fmt == "json") {
        json j = report::carve_json(scan, rep, co);
        const auto prov = provenance("carve", {}, j["parameters"]);
        j["command"] = "carve";
        j["tool"] = prov["tool"];
        j["tool_version"] = prov["tool_version"];
        j["inputs"] = json::array({{{"path", path},
                                    {"md5", scan.input_md5 ? to_hex(*scan.input_md5) : std::string{}},
                                    {"size", scan.bytes_scanned}}});
        emit_json(os, j);
    } else if (fmt == "csv") {
        os << "offset,kind,subtype,confidence,record_count\n";
        for (const auto& p : scan.pages) {
            os << p.source_offset << ',' << to_string(p.kind) << ',' << p.subtype << ',' << to_string(p.confidence)
               << ',' << p.record_count << '\n';
        }
    } else {
        report::carve_table(os, rep, scan);
    }
    for (const auto& r : scan.io_errors) err << "error: unreadable region @" << r.offset << " +" << r.length << '\n';
    for (auto off : scan.suppressed) err << "note: suppressed overlapping signature @" << off << '\n';
    return scan.io_errors.empty() ? kOk : kPartial;
}

int cmd_diff(const Options& opts, const std::string& a, const std::string& b, bool by_cnid, std::ostream& out,
             std::ostream& err) {
    const auto ia = read_input(a);
    const auto ib = read_input(b);
    const auto sa = parse_store(ia.bytes);
    const auto sb = parse_store(ib.bytes);
    Sink sink(opts, out, {a, b});
    auto& os = sink.stream();
    const auto fmt = opts.resolve("table", "json");
    int rc = sa.warnings.empty() && sb.warnings.empty() ? kOk : kPartial;
    if (by_cnid) {
        const auto d = diff_stores_by_cnid(sa, sb);
        if (fmt == "csv") {
            os << "status,cnid\n";
            for (auto c : d.removed) os << "removed," << c << '\n';
            for (auto c : d.added) os << "added," << c << '\n';
            for (auto c : d.changed) os << "changed," << c << '\n';
        } else {
            json j = provenance("diff", {&ia, &ib}, {{"by_cnid", true}});
            j["method"] = "cnid-heuristic";
            j["added"] = d.added;
            j["removed"] = d.removed;
            j["changed"] = d.changed;
            j["unkeyed_records"] = d.unkeyed_records;
            emit_json(os, j);
        }
    } else {
        const auto d = diff_stores(sa, sb);
        if (d.a_page_errors + d.b_page_errors > 0) rc = kPartial;
        if (fmt == "csv") {
            report::diff_csv(os, d);
        } else if (fmt == "json") {
            json j = provenance("diff", {&ia, &ib}, {{"by_cnid", false}});
            j.update(report::diff_json(d));
            emit_json(os, j);
        } else {
            os << "added " << d.added.size() << ", removed " << d.removed.size() << ", unchanged " << d.unchanged_count
               << '\n';
            report::diff_csv(os, d);
        }
    }
    print_warnings(err, sa.warnings);
    print_warnings(err, sb.warnings);
    return rc;
}

int cmd_gen(const Options& opts, const std::string& spec_path, std::ostream& out) {
    if (opts.output.empty() || opts.output == "-") throw UsageError("gen needs -o <store>");
    refuse_overwrite({spec_path}, opts.output);
    const auto spec_text = read_text(spec_path);
    const auto spec = synth::parse_spec_json(spec_text);
    const synth::StoreModel model(spec);
    const auto bytes = model.emit();
    write_file(opts.output, bytes);
    json j = provenance("gen", {}, {{"seed", spec.seed}});
    j["inputs"] = json::array({{{"path", spec_path}, {"md5", text_md5(spec_text)}}});
    j["output"] = {{"path", opts.output}, {"md5", to_hex(md5(bytes))}, {"size", bytes.size()}};
    j["records"] = model.live_record_count();
    j["files"] = model.file_count();
    j["folders"] = model.folder_count();
    emit_json(out, j);
    return kOk;
}

int cmd_simulate(const Options& opts, const std::string& spec_path, const std::string& events_path,
                 std::size_t lag, std::uint64_t unalloc_seed, std::ostream& out) {
    if (opts.output.empty() || opts.output == "-") throw UsageError("simulate needs -o <dir>");
    const auto spec_text = read_text(spec_path);
    const auto events_text = read_text(events_path);
    auto spec = synth::parse_spec_json(spec_text);
    const auto events = synth::parse_events_json(events_text);
    synth::StoreModel model(spec);
    for (const auto& e : events) model.apply(e);
    if (lag > events.size()) throw UsageError("--lag exceeds the number of events");
    const auto pair = synth::emit_store_pair(model, lag);
    std::vector<synth::Placement> layout;
    const auto unalloc = synth::export_unallocated(model, unalloc_seed, &layout);

    fs::create_directories(opts.output);
    const fs::path dir(opts.output);
    const std::vector<std::pair<std::string, const Bytes*>> files = {
        {".store.db", &pair.dot_store}, {"store.db", &pair.store}, {"unallocated.bin", &unalloc}};
    json outputs = json::array();
    for (const auto& [name, bytes] : files) {
        const auto p = (dir / name).string();
        refuse_overwrite({spec_path, events_path}, p);
        write_file(p, *bytes);
        outputs.push_back({{"path", p}, {"md5", to_hex(md5(*bytes))}, {"size", bytes->size()}});
    }
    json placements = json::array();
    for (const auto& pl : layout) placements.push_back({{"offset", pl.offset}, {"freed_index", pl.freed_index}});
    json j = provenance("simulate", {}, {{"seed", spec.seed}, {"lag", lag}, {"unallocated_seed", unalloc_seed}});
    j["inputs"] = json::array({{{"path", spec_path}, {"md5", text_md5(spec_text)}},
                               {{"path", events_path}, {"md5", text_md5(events_text)}}});
    j["outputs"] = outputs;
    j["events"] = events.size();
    j["live_records"] = model.live_record_count();
    j["freed_pages"] = model.freed_pages().size();
    j["placements"] = placements;
    const auto manifest = (dir / "manifest.json").string();
    refuse_overwrite({spec_path, events_path}, manifest);
    {
        std::ofstream f(manifest, std::ios::trunc);
        f << j.dump(2) << '\n';
    }
    emit_json(out, j);
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool terminal) {
    CLI::App app{"Spotlight Store-V2 metadata store toolkit", "sv2"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", report::kToolVersion);

    Options opts;
    opts.terminal = terminal;
    app.add_option("--format", opts.format, "Output format")
        ->check(CLI::IsMember({"json", "csv", "table"}))
        ->envname("SV2_FORMAT");
    app.add_option("-o,--output", opts.output, "Output path (directory for simulate)");

    std::string store_path, other_path, spec_path, events_path, dump_dir;
    std::vector<std::string> keywords;
    CarveOptions co;
    co.workers = std::max(1u, std::thread::hardware_concurrency());
    bool by_cnid = false;
    std::size_t lag = 0;
    std::uint64_t unalloc_seed = 0;

    auto* inspect = app.add_subcommand("inspect", "Header, map and page summary");
    inspect->add_option("store", store_path)->required();
    auto* records = app.add_subcommand("records", "Dump metadata records (JSON lines)");
    records->add_option("store", store_path)->required();
    auto* attrs = app.add_subcommand("attrs", "Attribute-name table as CSV");
    attrs->add_option("store", store_path)->required();
    auto* utis = app.add_subcommand("utis", "UTI table as CSV");
    utis->add_option("store", store_path)->required();
    auto* search = app.add_subcommand("search", "Keyword search over record bodies");
    search->add_option("store", store_path)->required();
    search->add_option("-k,--keyword", keywords)->required();
    auto* carve = app.add_subcommand("carve", "Carve store pages from a raw image");
    carve->add_option("image", store_path, "Image path or - for standard input")->required();
    carve->add_option("--sector", co.sector_size)->check(CLI::PositiveNumber);
    carve->add_option("--page-size", co.page_size)->check(CLI::PositiveNumber);
    carve->add_flag("--byte-granular", co.byte_granular);
    carve->add_option("--workers", co.workers)->check(CLI::PositiveNumber);
    carve->add_option("--dump-dir", dump_dir, "Write page_<offset>.bin per carved page");
    auto* diff = app.add_subcommand("diff", "Record-level diff of two stores");
    diff->add_option("a", store_path)->required();
    diff->add_option("b", other_path)->required();
    diff->add_flag("--by-cnid", by_cnid, "Key records by heuristic CNID candidate");
    auto* gen = app.add_subcommand("gen", "Generate a synthetic store from a JSON spec");
    gen->add_option("spec", spec_path)->required();
    auto* simulate = app.add_subcommand("simulate", "Replay events; emit store pair and unallocated blob");
    simulate->add_option("spec", spec_path)->required();
    simulate->add_option("--events", events_path)->required();
    simulate->add_option("--lag", lag, "Events the store.db lags behind .store.db");
    simulate->add_option("--unallocated-seed", unalloc_seed);

    std::vector<std::string> argv_store = {"sv2"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*inspect) return cmd_inspect(opts, store_path, out, err);
        if (*records) return cmd_records(opts, store_path, out, err);
        if (*attrs) {
            return cmd_table<AttributeEntry>(
                opts, store_path, Subtype::AttributeTable,
                [](const DataPage& p, Diagnostics* w) { return parse_attribute_page(p, w); },
                [](std::ostream& os, const std::vector<AttributeEntry>& e) { report::attrs_csv(os, e); }, out, err);
        }
        if (*utis) {
            return cmd_table<UtiEntry>(
                opts, store_path, Subtype::UtiTable,
                [](const DataPage& p, Diagnostics* w) { return parse_uti_page(p, w); },
                [](std::ostream& os, const std::vector<UtiEntry>& e) { report::utis_csv(os, e); }, out, err);
        }
        if (*search) return cmd_search(opts, store_path, keywords, out, err);
        if (*carve) return cmd_carve(opts, store_path, co, dump_dir, out, err);
        if (*diff) return cmd_diff(opts, store_path, other_path, by_cnid, out, err);
        if (*gen) return cmd_gen(opts, spec_path, out);
        if (*simulate) return cmd_simulate(opts, spec_path, events_path, lag, unalloc_seed, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUnparseable;
    }
    return kUsage;
}

}  // namespace sv2::cli
