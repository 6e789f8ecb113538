#include "sv2/synth.hpp"

#include <json.hpp>

#include "sv2/records.hpp"

#include <algorithm>
#include <cstring>
#include <random>

namespace sv2::synth {

namespace {

using Fields = std::vector<std::pair<std::uint8_t, std::string>>;

constexpr std::uint8_t kFieldSeparator = 0x01;
constexpr std::uint8_t kFsNameId = 1;
constexpr std::uint8_t kDisplayNameId = 2;
constexpr std::uint8_t kContentTypeId = 3;
constexpr std::uint64_t kRootParentCnid = 1;

constexpr char kConfigPlist[] =
    "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    "<!DOCTYPE plist PUBLIC \"-//Apple//DTD PLIST 1.0//EN\" \"http://www.apple.com/DTDs/PropertyList-1.0.dtd\">\n"
    "<plist version=\"1.0\">\n<dict>\n\t<key>IndexVersion</key>\n\t<integer>2</integer>\n</dict>\n</plist>\n";

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::string guid_from_seed(std::uint64_t seed) {
    const auto a = splitmix64(seed);
    const auto b = splitmix64(a);
    const std::string hex = to_hex(std::span(reinterpret_cast<const std::uint8_t*>(&a), 8)) +
                            to_hex(std::span(reinterpret_cast<const std::uint8_t*>(&b), 8));
    std::string out;
    for (std::size_t i = 0; i < hex.size(); ++i) {
        if (i == 8 || i == 12 || i == 16 || i == 20) out.push_back('-');
        out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(hex[i]))));
    }
    return out;
}

bool printable_text(std::string_view s) {
    const ByteView bytes(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
    std::size_t i = 0;
    while (i < bytes.size()) {
        const auto n = printable_char_length(bytes, i);
        if (n == 0) return false;
        i += n;
    }
    return true;
}

std::pair<std::string, std::string> split_path(const std::string& path) {
    const auto slash = path.rfind('/');
    if (slash == std::string::npos) return {"", path};
    return {path.substr(0, slash), path.substr(slash + 1)};
}

std::string join_path(const std::string& parent, const std::string& name) {
    return parent.empty() ? name : parent + "/" + name;
}

std::string stem(std::string_view name) {
    const auto dot = name.rfind('.');
    return std::string(dot == std::string_view::npos || dot == 0 ? name : name.substr(0, dot));
}

Bytes table_page(std::uint32_t subtype, const Bytes& entries) {
    Bytes page(kPageSize, 0);
    DataPageHeader h;
    h.subtype = subtype;
    h.allocated_size = static_cast<std::uint32_t>(kTableEntriesOffset + entries.size());
    h.size2 = static_cast<std::uint32_t>(entries.size());
    const auto hdr = h.encode();
    std::copy(hdr.begin(), hdr.end(), page.begin());
    std::copy(entries.begin(), entries.end(), page.begin() + kTableEntriesOffset);
    return page;
}

Bytes attribute_page_image() {
    Bytes entries;
    const auto& names = attribute_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        append_u32_le(entries, static_cast<std::uint32_t>(i + 1));
        // Two flag bytes: a value-type code and a reserved zero byte.
        entries.push_back(static_cast<std::uint8_t>(i < 3 ? 0x0B : 0x02));
        entries.push_back(0x00);
        entries.insert(entries.end(), names[i].begin(), names[i].end());
        entries.push_back(0x00);
    }
    return table_page(static_cast<std::uint32_t>(Subtype::AttributeTable), entries);
}

Bytes uti_page_image() {
    Bytes entries;
    const auto& utis = uti_table();
    for (std::size_t i = 0; i < utis.size(); ++i) {
        append_u32_le(entries, static_cast<std::uint32_t>(i + 1));
        entries.insert(entries.end(), utis[i].uti.begin(), utis[i].uti.end());
        entries.push_back(0x00);
        if (utis[i].language_code) {
            entries.insert(entries.end(), utis[i].language_code->begin(), utis[i].language_code->end());
            entries.push_back(0x00);
        }
    }
    return table_page(static_cast<std::uint32_t>(Subtype::UtiTable), entries);
}

Bytes opaque_page_image(std::uint32_t subtype) {
    Bytes page(kPageSize, 0);
    DataPageHeader h;
    h.subtype = subtype;
    h.allocated_size = static_cast<std::uint32_t>(kPageHeaderSize);
    const auto hdr = h.encode();
    std::copy(hdr.begin(), hdr.end(), page.begin());
    return page;
}

Bytes header_page_image(const std::string& volume_path) {
    Bytes page(kHeaderPageSize, 0);
    std::copy(kHeaderMagic.tag.begin(), kHeaderMagic.tag.end(), page.begin());
    write_field_u32_le(page, kHeaderSizeOffset, kHeaderPageSize);
    const auto n = std::min(volume_path.size(), kHeaderPageSize - kVolumePathOffset - 1);
    std::copy_n(volume_path.begin(), n, page.begin() + kVolumePathOffset);
    return page;
}

Bytes map_page_image(const std::vector<std::uint32_t>& subtypes, std::uint64_t seed) {
    Bytes page(kPageSize, 0);
    std::copy(kMapMagic.tag.begin(), kMapMagic.tag.end(), page.begin());
    write_field_u32_le(page, kMapPageSizeOffset, kPageSize);
    write_field_u32_le(page, kMapPageCountOffset, static_cast<std::uint32_t>(subtypes.size()));
    write_field_u32_le(page, kMapPageTypeOffset, kMapPageType);
    for (std::size_t i = 0; i < subtypes.size(); ++i) {
        MapEntry e;
        e.data_page_size = kPageSize;
        write_field_u32_le(e.unknown12, 0, static_cast<std::uint32_t>(i));
        write_field_u32_le(e.unknown12, 4, subtypes[i]);
        write_field_u32_le(e.unknown12, 8, static_cast<std::uint32_t>(splitmix64(seed ^ i)));
        const auto enc = e.encode();
        std::copy(enc.begin(), enc.end(), page.begin() + kMapEntriesOffset + i * kMapEntrySize);
    }
    return page;
}

std::vector<Bytes> bodies_of(const RecordPage& page) {
    std::vector<Bytes> out;
    out.reserve(page.records.size());
    for (const auto& r : page.records) out.push_back(r.body);
    return out;
}

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorCode::InvalidEvent, message); }

}  // namespace

const std::vector<std::string>& attribute_names() {
    static const std::vector<std::string> names = {
        "kMDItemFSName",       "kMDItemDisplayName", "kMDItemContentType", "kMDItemAuthors",
        "kMDItemTitle",        "kMDItemSubject",     "kMDItemKeywords",    "kMDItemComment",
        "kMDItemOrganizations", "kMDItemWhereFroms", "kMDItemFinderComment", "kMDItemCreator",
        "kMDStoreProperties",
    };
    return names;
}

const std::vector<UtiDef>& uti_table() {
    static const std::vector<UtiDef> utis = {
        {"public.message", std::nullopt},
        {"com.apple.mail.emlx", std::nullopt},
        {"public.folder", std::nullopt},
        {"public.data", std::nullopt},
        {"public.plain-text", std::nullopt},
        {"org.openxmlformats.wordprocessingml.document", "en"},
        {"com.adobe.pdf", std::nullopt},
        {"public.jpeg", std::nullopt},
        {"com.apple.property-list", "en_GB"},
        {"public.volume", std::nullopt},
    };
    return utis;
}

std::string content_type_for(std::string_view name) {
    const auto dot = name.rfind('.');
    const auto ext = dot == std::string_view::npos ? std::string_view{} : name.substr(dot + 1);
    if (ext == "txt") return "public.plain-text";
    if (ext == "docx") return "org.openxmlformats.wordprocessingml.document";
    if (ext == "pdf") return "com.adobe.pdf";
    if (ext == "jpg" || ext == "jpeg") return "public.jpeg";
    if (ext == "emlx") return "com.apple.mail.emlx";
    if (ext == "eml") return "public.message";
    return "public.data";
}

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Create: return "create";
        case EventKind::Delete: return "delete";
        case EventKind::MassDelete: return "mass_delete";
        case EventKind::IndexReset: return "index_reset";
    }
    return "create";
}

FileEvent FileEvent::create_file(std::string path, std::map<std::string, std::string> attrs) {
    return {EventKind::Create, std::move(path), false, std::move(attrs)};
}
FileEvent FileEvent::create_folder(std::string path) { return {EventKind::Create, std::move(path), true, {}}; }
FileEvent FileEvent::remove(std::string path) { return {EventKind::Delete, std::move(path), false, {}}; }
FileEvent FileEvent::mass_delete(std::string path) { return {EventKind::MassDelete, std::move(path), true, {}}; }
FileEvent FileEvent::index_reset() { return {EventKind::IndexReset, {}, false, {}}; }

Bytes encode_record_body(std::uint64_t cnid, std::uint64_t parent_cnid, double created, const Fields& fields) {
    Bytes body;
    append_u64_le(body, cnid);
    append_u64_le(body, parent_cnid);
    for (double t : {created, created + 60.0}) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &t, sizeof bits);
        append_u64_le(body, bits);
    }
    for (const auto& [id, value] : fields) {
        body.push_back(kFieldSeparator);
        body.push_back(id);
        body.insert(body.end(), value.begin(), value.end());
        body.push_back(0x00);
    }
    return body;
}

Bytes record_page_image(const std::vector<Bytes>& bodies) {
    Bytes stream;
    stream.reserve(kRecordCapacity);
    for (const auto& b : bodies) {
        append_u32_le(stream, static_cast<std::uint32_t>(b.size()));
        stream.insert(stream.end(), b.begin(), b.end());
    }
    if (stream.size() > kRecordCapacity) throw Error(ErrorCode::SpecTooLarge, "records exceed page capacity");
    const auto used = stream.size();
    stream.resize(kRecordCapacity, 0);
    const auto compressed = zlib_deflate(stream);
    Bytes page(kPageSize, 0);
    DataPageHeader h;
    h.subtype = static_cast<std::uint32_t>(Subtype::MetadataRecords);
    h.allocated_size = static_cast<std::uint32_t>(kPayloadOffset + compressed.size());
    h.size2 = static_cast<std::uint32_t>(used);
    const auto hdr = h.encode();
    std::copy(hdr.begin(), hdr.end(), page.begin());
    std::copy(compressed.begin(), compressed.end(), page.begin() + kPayloadOffset);
    return page;
}

std::size_t RecordPage::used() const {
    std::size_t n = 0;
    for (const auto& r : records) n += 4 + r.body.size();
    return n;
}

StoreModel::StoreModel(StoreSpec spec, BuildOptions options) : spec_(std::move(spec)), options_(options) {
    build_baseline();
    try {
        std::vector<const FolderSpec*> pending;
        for (const auto& f : spec_.folders) pending.push_back(&f);
        while (!pending.empty()) {
            std::vector<const FolderSpec*> next;
            for (const auto* f : pending) {
                if (!f->parent.empty() && !nodes_.contains(f->parent)) {
                    next.push_back(f);
                    continue;
                }
                create(join_path(f->parent, f->name), true, {}, nullptr);
            }
            if (next.size() == pending.size()) {
                throw Error(ErrorCode::SpecInvalid, "folder parent '" + next.front()->parent + "' does not exist");
            }
            pending = std::move(next);
        }
        for (const auto& f : spec_.files) create(join_path(f.parent, f.name), false, f.attributes, nullptr);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidEvent) throw Error(ErrorCode::SpecInvalid, e.what());
        throw;
    }
}

std::string StoreModel::volume_path() const {
    if (!spec_.volume_path.empty()) return spec_.volume_path;
    return "/.Spotlight-V100/Store-V2/" + guid_from_seed(spec_.seed) + "/store.db";
}

double StoreModel::timestamp_for(std::uint64_t cnid) const {
    return 5.0e8 + static_cast<double>(spec_.seed % 10'000'000) + static_cast<double>(cnid) * 7.0;
}

std::uint64_t StoreModel::take_cnid() {
    const auto c = next_cnid_++;
    assigned_cnids_.push_back(c);
    return c;
}

void StoreModel::build_baseline() {
    LiveRecord config;
    config.cnid = take_cnid();
    config.parent_cnid = 0;
    config.kind = RecordKind::Configuration;
    config.body = encode_record_body(config.cnid, 0, timestamp_for(config.cnid),
                                     {{static_cast<std::uint8_t>(attribute_names().size()), kConfigPlist}});
    LiveRecord root;
    root.cnid = take_cnid();
    root.parent_cnid = kRootParentCnid;
    root.kind = RecordKind::Root;
    root.body = encode_record_body(root.cnid, kRootParentCnid, timestamp_for(root.cnid),
                                   {{kFsNameId, "Macintosh HD"}, {kContentTypeId, "public.volume"}});
    root_cnid_ = root.cnid;
    append_record(std::move(config));
    append_record(std::move(root));
}

void StoreModel::append_record(LiveRecord rec) {
    const auto need = 4 + rec.body.size();
    if (live_pages_.empty() || live_pages_.back().used() + need > kRecordCapacity) {
        if (kBookkeepingPages + live_pages_.size() + 1 > options_.max_data_pages) {
            throw Error(ErrorCode::SpecTooLarge, "store would exceed " + std::to_string(options_.max_data_pages) +
                                                     " data pages");
        }
        live_pages_.emplace_back();
    }
    live_pages_.back().records.push_back(std::move(rec));
}

void StoreModel::create(const std::string& path, bool folder, const std::map<std::string, std::string>& attrs,
                        EventDelta* delta) {
    const auto [parent, name] = split_path(path);
    if (name.empty() || !printable_text(name)) invalid("invalid name in '" + path + "'");
    if (!parent.empty()) {
        const auto it = nodes_.find(parent);
        if (it == nodes_.end() || it->second.kind != RecordKind::Folder) invalid("parent folder '" + parent + "' is not live");
    }
    if (nodes_.contains(path)) invalid("'" + path + "' already exists");

    Fields fields = {{kFsNameId, name},
                     {kDisplayNameId, folder ? name : stem(name)},
                     {kContentTypeId, folder ? "public.folder" : content_type_for(name)}};
    const auto& table = attribute_names();
    std::vector<std::pair<std::uint8_t, std::string>> extra;
    for (const auto& [key, value] : attrs) {
        const auto it = std::find(table.begin(), table.end(), key);
        if (it == table.end() || it - table.begin() < 3 || it + 1 == table.end()) {
            invalid("attribute '" + key + "' is not a user-settable attribute");
        }
        if (value.empty() || !printable_text(value)) invalid("attribute '" + key + "' has a non-printable value");
        extra.emplace_back(static_cast<std::uint8_t>(it - table.begin() + 1), value);
    }
    std::sort(extra.begin(), extra.end());
    fields.insert(fields.end(), extra.begin(), extra.end());

    const std::uint64_t parent_cnid = parent.empty() ? root_cnid_ : nodes_.at(parent).cnid;
    const std::uint64_t cnid = next_cnid_;
    Bytes body = encode_record_body(cnid, parent_cnid, timestamp_for(cnid), fields);
    if (4 + body.size() > kRecordCapacity) {
        throw Error(ErrorCode::SpecTooLarge, "record for '" + path + "' exceeds page capacity");
    }
    if ((live_pages_.empty() || live_pages_.back().used() + 4 + body.size() > kRecordCapacity) &&
        kBookkeepingPages + live_pages_.size() + 1 > options_.max_data_pages) {
        throw Error(ErrorCode::SpecTooLarge, "store would exceed " + std::to_string(options_.max_data_pages) +
                                                 " data pages");
    }

    LiveRecord rec;
    rec.cnid = take_cnid();
    rec.parent_cnid = parent_cnid;
    rec.kind = folder ? RecordKind::Folder : RecordKind::File;
    rec.path = path;
    rec.body = std::move(body);
    if (delta != nullptr) delta->added.push_back(rec.body);
    append_record(std::move(rec));
    nodes_[path] = Node{cnid, folder ? RecordKind::Folder : RecordKind::File, path};
    children_[parent].insert(path);
}

std::pair<std::size_t, std::size_t> StoreModel::locate(std::uint64_t cnid) const {
    for (std::size_t p = 0; p < live_pages_.size(); ++p) {
        const auto& recs = live_pages_[p].records;
        for (std::size_t s = 0; s < recs.size(); ++s) {
            if (recs[s].cnid == cnid) return {p, s};
        }
    }
    throw Error(ErrorCode::UnknownTarget, "CNID " + std::to_string(cnid) + " has no live record");
}

void StoreModel::remove_single(const std::string& path, EventDelta& delta) {
    const auto it = nodes_.find(path);
    if (it == nodes_.end()) throw Error(ErrorCode::UnknownTarget, "'" + path + "' is not live");
    if (it->second.kind == RecordKind::Folder) {
        const auto ch = children_.find(path);
        if (ch != children_.end() && !ch->second.empty()) {
            throw Error(ErrorCode::NonEmptyFolder, "'" + path + "' still has live children");
        }
    }
    const auto [p, s] = locate(it->second.cnid);
    auto& recs = live_pages_[p].records;
    delta.removed.push_back(recs[s].body);
    // Later records collapse into the vacated space; the stream tail is
    // re-zeroed when the page is materialized.
    recs.erase(recs.begin() + static_cast<std::ptrdiff_t>(s));
    children_[split_path(path).first].erase(path);
    children_.erase(path);
    nodes_.erase(it);
}

void StoreModel::mass_delete(const std::string& path, EventDelta& delta, std::size_t event_index) {
    const auto it = nodes_.find(path);
    if (it == nodes_.end()) throw Error(ErrorCode::UnknownTarget, "'" + path + "' is not live");
    if (it->second.kind != RecordKind::Folder) invalid("mass delete target '" + path + "' is not a folder");

    std::set<std::uint64_t> doomed;
    std::vector<std::string> doomed_paths;
    std::vector<std::string> stack = {path};
    while (!stack.empty()) {
        auto cur = std::move(stack.back());
        stack.pop_back();
        doomed.insert(nodes_.at(cur).cnid);
        doomed_paths.push_back(cur);
        if (const auto ch = children_.find(cur); ch != children_.end()) {
            stack.insert(stack.end(), ch->second.begin(), ch->second.end());
        }
    }

    std::vector<RecordPage> kept;
    std::vector<LiveRecord> survivors;
    for (std::size_t p = 0; p < live_pages_.size(); ++p) {
        auto& page = live_pages_[p];
        const bool touched = std::any_of(page.records.begin(), page.records.end(),
                                         [&](const LiveRecord& r) { return doomed.contains(r.cnid); });
        if (!touched) {
            kept.push_back(std::move(page));
            continue;
        }
        freed_pages_.push_back({page_image(p), bodies_of(page), event_index, EventKind::MassDelete});
        for (auto& r : page.records) {
            if (doomed.contains(r.cnid)) {
                delta.removed.push_back(r.body);
            } else {
                survivors.push_back(std::move(r));
            }
        }
    }
    live_pages_ = std::move(kept);
    for (auto& r : survivors) append_record(std::move(r));

    for (const auto& d : doomed_paths) {
        children_.erase(d);
        nodes_.erase(d);
    }
    children_[split_path(path).first].erase(path);
}

void StoreModel::index_reset(EventDelta& delta, std::size_t event_index) {
    for (auto& image : bookkeeping_images()) {
        freed_pages_.push_back({std::move(image), {}, event_index, EventKind::IndexReset});
    }
    for (std::size_t p = 0; p < live_pages_.size(); ++p) {
        auto bodies = bodies_of(live_pages_[p]);
        delta.removed.insert(delta.removed.end(), bodies.begin(), bodies.end());
        freed_pages_.push_back({page_image(p), std::move(bodies), event_index, EventKind::IndexReset});
    }
    live_pages_.clear();
    nodes_.clear();
    children_.clear();
    build_baseline();
    for (const auto& r : live_pages_.front().records) delta.added.push_back(r.body);
}

void StoreModel::apply(const FileEvent& event) {
    EventDelta delta;
    const auto index = event_log_.size();
    switch (event.kind) {
        case EventKind::Create: create(event.path, event.folder, event.attributes, &delta); break;
        case EventKind::Delete: remove_single(event.path, delta); break;
        case EventKind::MassDelete: mass_delete(event.path, delta, index); break;
        case EventKind::IndexReset: index_reset(delta, index); break;
    }
    event_log_.push_back(event);
    deltas_.push_back(std::move(delta));
}

std::vector<Bytes> StoreModel::bookkeeping_images() const {
    std::vector<Bytes> out;
    out.push_back(attribute_page_image());
    out.push_back(uti_page_image());
    for (auto st : kBookkeepingSubtypes) out.push_back(opaque_page_image(st));
    return out;
}

Bytes StoreModel::page_image(std::size_t live_page) const {
    return record_page_image(bodies_of(live_pages_.at(live_page)));
}

Bytes StoreModel::emit() const {
    auto images = bookkeeping_images();
    std::vector<std::uint32_t> subtypes = {static_cast<std::uint32_t>(Subtype::AttributeTable),
                                           static_cast<std::uint32_t>(Subtype::UtiTable)};
    subtypes.insert(subtypes.end(), std::begin(kBookkeepingSubtypes), std::end(kBookkeepingSubtypes));
    for (std::size_t p = 0; p < live_pages_.size(); ++p) {
        images.push_back(page_image(p));
        subtypes.push_back(static_cast<std::uint32_t>(Subtype::MetadataRecords));
    }
    if (images.size() > options_.max_data_pages || images.size() > kMaxMapEntries) {
        throw Error(ErrorCode::SpecTooLarge, std::to_string(images.size()) + " data pages exceed the page budget");
    }
    Bytes out = header_page_image(volume_path());
    const auto map = map_page_image(subtypes, spec_.seed);
    out.reserve(out.size() + map.size() + images.size() * kPageSize);
    out.insert(out.end(), map.begin(), map.end());
    for (const auto& img : images) out.insert(out.end(), img.begin(), img.end());
    return out;
}

std::size_t StoreModel::live_record_count() const {
    std::size_t n = 0;
    for (const auto& p : live_pages_) n += p.records.size();
    return n;
}

std::size_t StoreModel::file_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(),
                                                  [](const auto& kv) { return kv.second.kind == RecordKind::File; }));
}

std::size_t StoreModel::folder_count() const { return nodes_.size() - file_count(); }

std::vector<Bytes> StoreModel::live_bodies() const {
    std::vector<Bytes> out;
    for (const auto& p : live_pages_) {
        for (const auto& r : p.records) out.push_back(r.body);
    }
    return out;
}

bool StoreModel::is_live(const std::string& path) const { return nodes_.contains(path); }

std::optional<LiveRecord> StoreModel::find(const std::string& path) const {
    const auto it = nodes_.find(path);
    if (it == nodes_.end()) return std::nullopt;
    const auto [p, s] = locate(it->second.cnid);
    return live_pages_[p].records[s];
}

std::vector<std::string> StoreModel::live_paths(std::optional<RecordKind> kind) const {
    std::vector<std::string> out;
    for (const auto& [path, node] : nodes_) {
        if (!kind || node.kind == *kind) out.push_back(path);
    }
    return out;
}

StoreModel apply_event(StoreModel model, const FileEvent& event) {
    model.apply(event);
    return model;
}

Bytes build_store(const StoreSpec& spec, BuildOptions options) { return StoreModel(spec, options).emit(); }

Bytes export_unallocated(const StoreModel& model, std::uint64_t seed, std::vector<Placement>* layout,
                         std::uint32_t sector_size) {
    const auto& freed = model.freed_pages();
    std::uint64_t total = 0;
    for (const auto& f : freed) total += (f.image.size() + sector_size - 1) / sector_size * sector_size;
    const std::uint64_t length =
        ((2 * total + (std::uint64_t{256} << 10)) + sector_size - 1) / sector_size * sector_size;
    const std::uint64_t spare_sectors = (length - total) / sector_size;

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(freed.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_int_distribution<std::uint64_t> cut(0, spare_sectors);
    std::vector<std::uint64_t> cuts(freed.size());
    for (auto& c : cuts) c = cut(rng);
    std::sort(cuts.begin(), cuts.end());

    Bytes out(length);
    for (std::size_t i = 0; i + 8 <= out.size(); i += 8) {
        const auto v = rng();
        std::memcpy(out.data() + i, &v, 8);
    }
    if (layout != nullptr) layout->clear();
    std::uint64_t used = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& img = freed[order[k]].image;
        const std::uint64_t offset = cuts[k] * sector_size + used;
        std::copy(img.begin(), img.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
        used += (img.size() + sector_size - 1) / sector_size * sector_size;
        if (layout != nullptr) layout->push_back({offset, order[k]});
    }
    return out;
}

StorePair emit_store_pair(const StoreModel& model, std::size_t lag) {
    const auto& log = model.event_log();
    if (lag > log.size()) invalid("lag " + std::to_string(lag) + " exceeds " + std::to_string(log.size()) + " events");
    StoreModel lagging(model.spec(), model.options());
    for (std::size_t i = 0; i + lag < log.size(); ++i) lagging.apply(log[i]);
    return {model.emit(), lagging.emit()};
}

DigestDelta pending_delta(const StoreModel& model, std::size_t lag) {
    const auto& deltas = model.deltas();
    if (lag > deltas.size()) invalid("lag exceeds event count");
    std::map<Md5, long> net;
    for (std::size_t i = deltas.size() - lag; i < deltas.size(); ++i) {
        for (const auto& b : deltas[i].added) ++net[md5(b)];
        for (const auto& b : deltas[i].removed) --net[md5(b)];
    }
    DigestDelta out;
    for (const auto& [digest, n] : net) {
        for (long k = 0; k < n; ++k) out.added.push_back(digest);
        for (long k = 0; k < -n; ++k) out.removed.push_back(digest);
    }
    return out;
}

StoreSpec parse_spec_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SpecInvalid, e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::SpecInvalid, "spec must be a JSON object");
    try {
        StoreSpec spec;
        spec.seed = j.value("seed", std::uint64_t{0});
        spec.volume_path = j.value("volume_path", std::string{});
        for (const auto& f : j.value("folders", nlohmann::json::array())) {
            spec.folders.push_back({f.at("name").get<std::string>(), f.value("parent", std::string{})});
        }
        for (const auto& f : j.value("files", nlohmann::json::array())) {
            FileSpec fs{f.at("name").get<std::string>(), f.value("parent", std::string{}), {}};
            if (f.contains("attributes")) fs.attributes = f.at("attributes").get<std::map<std::string, std::string>>();
            spec.files.push_back(std::move(fs));
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SpecInvalid, e.what());
    }
}

std::vector<FileEvent> parse_events_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        if (j.is_object()) j = j.at("events");
        if (!j.is_array()) throw Error(ErrorCode::InvalidEvent, "events must be a JSON array");
        std::vector<FileEvent> out;
        for (const auto& e : j) {
            const auto kind = e.at("kind").get<std::string>();
            if (kind == "create") {
                FileEvent ev = FileEvent::create_file(e.at("path").get<std::string>());
                ev.folder = e.value("folder", false);
                if (e.contains("attributes")) ev.attributes = e.at("attributes").get<std::map<std::string, std::string>>();
                out.push_back(std::move(ev));
            } else if (kind == "delete") {
                out.push_back(FileEvent::remove(e.at("path").get<std::string>()));
            } else if (kind == "mass_delete") {
                out.push_back(FileEvent::mass_delete(e.at("path").get<std::string>()));
            } else if (kind == "index_reset") {
                out.push_back(FileEvent::index_reset());
            } else {
                throw Error(ErrorCode::InvalidEvent, "unknown event kind '" + kind + "'");
            }
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidEvent, e.what());
    }
}

}  // namespace sv2::synth
