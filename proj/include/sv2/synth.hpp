#pragma once

// Synthetic Store-V2 generator and lifecycle simulator. Stores built here
// are the oracle for every round-trip, carving and persistence test: the
// model knows exactly which record bodies are live, which were freed with
// their page, and which were destroyed by in-page collapse.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sv2/digest.hpp"
#include "sv2/format.hpp"

namespace sv2::synth {

// Uncompressed record-stream capacity of one subtype-9 page. Chosen so the
// zlib bound of a full stream always fits in the page.
inline constexpr std::size_t kRecordCapacity = kPageSize - kPageHeaderSize - 128;
inline constexpr std::size_t kMaxMapEntries = (kPageSize - kMapEntriesOffset) / kMapEntrySize;
inline constexpr std::uint32_t kBookkeepingSubtypes[] = {1, 3, 5};
inline constexpr std::size_t kBookkeepingPages = 5;  // attribute, UTI and three opaque pages

struct FileSpec {
    std::string name;
    std::string parent;  // folder path, "" for the volume root
    std::map<std::string, std::string> attributes;
};

struct FolderSpec {
    std::string name;
    std::string parent;
};

struct StoreSpec {
    std::vector<FileSpec> files;
    std::vector<FolderSpec> folders;
    std::uint64_t seed = 0;
    std::string volume_path;  // empty: derived from the seed
};

struct BuildOptions {
    std::size_t max_data_pages = kMaxMapEntries;
};

struct UtiDef {
    std::string uti;
    std::optional<std::string> language_code;
};

// Attribute table: entry i has record number i + 1. The first three are
// written into every record by the generator.
const std::vector<std::string>& attribute_names();
const std::vector<UtiDef>& uti_table();
std::string content_type_for(std::string_view name);

enum class RecordKind { Configuration, Root, Folder, File };

struct LiveRecord {
    std::uint64_t cnid = 0;
    std::uint64_t parent_cnid = 0;
    RecordKind kind = RecordKind::File;
    std::string path;
    Bytes body;
};

struct RecordPage {
    std::vector<LiveRecord> records;

    std::size_t used() const;
    std::size_t free_space() const { return kRecordCapacity - used(); }
};

enum class EventKind { Create, Delete, MassDelete, IndexReset };

std::string_view to_string(EventKind kind);

struct FileEvent {
    EventKind kind = EventKind::Create;
    std::string path;  // unused for IndexReset
    bool folder = false;
    std::map<std::string, std::string> attributes;

    static FileEvent create_file(std::string path, std::map<std::string, std::string> attrs = {});
    static FileEvent create_folder(std::string path);
    static FileEvent remove(std::string path);
    static FileEvent mass_delete(std::string path);
    static FileEvent index_reset();
};

struct FreedPage {
    Bytes image;               // byte-exact page as it was before being freed
    std::vector<Bytes> bodies;  // record bodies on the page at that moment
    std::size_t event_index = 0;
    EventKind cause = EventKind::MassDelete;
};

struct EventDelta {
    std::vector<Bytes> added;
    std::vector<Bytes> removed;
};

// Record body layout: u64 CNID, u64 parent CNID, two f64 timestamps (Mac
// absolute seconds), then fields `01 <attribute number> <utf-8 value> 00`.
Bytes encode_record_body(std::uint64_t cnid, std::uint64_t parent_cnid, double created,
                         const std::vector<std::pair<std::uint8_t, std::string>>& fields);

// Materializes a subtype-9 page image from an ordered record list.
Bytes record_page_image(const std::vector<Bytes>& bodies);

class StoreModel {
public:
    explicit StoreModel(StoreSpec spec, BuildOptions options = {});

    // Throws UnknownTarget, NonEmptyFolder, InvalidEvent, SpecInvalid or
    // SpecTooLarge; the model is unchanged when an event is rejected.
    void apply(const FileEvent& event);

    Bytes emit() const;
    Bytes page_image(std::size_t live_page) const;

    const StoreSpec& spec() const { return spec_; }
    const BuildOptions& options() const { return options_; }
    const std::vector<RecordPage>& live_pages() const { return live_pages_; }
    const std::vector<FreedPage>& freed_pages() const { return freed_pages_; }
    const std::vector<FileEvent>& event_log() const { return event_log_; }
    const std::vector<EventDelta>& deltas() const { return deltas_; }
    const std::vector<std::uint64_t>& assigned_cnids() const { return assigned_cnids_; }
    std::uint64_t next_cnid() const { return next_cnid_; }
    std::string volume_path() const;

    std::size_t live_record_count() const;
    std::size_t file_count() const;
    std::size_t folder_count() const;
    std::vector<Bytes> live_bodies() const;
    bool is_live(const std::string& path) const;
    std::optional<LiveRecord> find(const std::string& path) const;
    // Live paths of files/folders, sorted.
    std::vector<std::string> live_paths(std::optional<RecordKind> kind = std::nullopt) const;

private:
    struct Node {
        std::uint64_t cnid = 0;
        RecordKind kind = RecordKind::File;
        std::string path;
    };

    void build_baseline();
    void create(const std::string& path, bool folder, const std::map<std::string, std::string>& attrs,
                EventDelta* delta);
    void remove_single(const std::string& path, EventDelta& delta);
    void mass_delete(const std::string& path, EventDelta& delta, std::size_t event_index);
    void index_reset(EventDelta& delta, std::size_t event_index);
    void append_record(LiveRecord rec);
    std::uint64_t take_cnid();
    std::pair<std::size_t, std::size_t> locate(std::uint64_t cnid) const;
    std::vector<Bytes> bookkeeping_images() const;
    double timestamp_for(std::uint64_t cnid) const;

    StoreSpec spec_;
    BuildOptions options_;
    std::vector<RecordPage> live_pages_;
    std::vector<FreedPage> freed_pages_;
    std::vector<FileEvent> event_log_;
    std::vector<EventDelta> deltas_;
    std::vector<std::uint64_t> assigned_cnids_;
    std::uint64_t next_cnid_ = 1;
    std::uint64_t root_cnid_ = 0;
    std::map<std::string, Node> nodes_;  // keyed by path
    std::map<std::string, std::set<std::string>> children_;  // parent path -> child paths
};

StoreModel apply_event(StoreModel model, const FileEvent& event);

// Throws SpecInvalid or SpecTooLarge.
Bytes build_store(const StoreSpec& spec, BuildOptions options = {});

constexpr std::size_t expected_record_count(std::size_t files, std::size_t folders) {
    return files + folders + 2;
}

struct Placement {
    std::uint64_t offset = 0;
    std::size_t freed_index = 0;
};

// Freed pages at seeded random sector-aligned offsets inside random filler.
Bytes export_unallocated(const StoreModel& model, std::uint64_t seed, std::vector<Placement>* layout = nullptr,
                         std::uint32_t sector_size = 512);

struct StorePair {
    Bytes dot_store;  // reflects every event
    Bytes store;      // lags by `lag` events
};

StorePair emit_store_pair(const StoreModel& model, std::size_t lag);

// Net digest delta of the last `lag` events (added minus removed, as
// multisets), each side sorted.
struct DigestDelta {
    std::vector<Md5> added;
    std::vector<Md5> removed;
};

DigestDelta pending_delta(const StoreModel& model, std::size_t lag);

StoreSpec parse_spec_json(std::string_view text);
std::vector<FileEvent> parse_events_json(std::string_view text);

}  // namespace sv2::synth
