#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sv2/format.hpp"
#include "sv2/synth.hpp"

namespace sv2::testing {

inline std::string random_word(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len) {
    static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-";
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, sizeof(kAlphabet) - 2);
    std::string s(len(rng), ' ');
    for (auto& c : s) c = kAlphabet[pick(rng)];
    return s;
}

// Random but valid spec: folders nest under earlier folders, names are
// unique by construction.
inline synth::StoreSpec random_spec(std::mt19937_64& rng, std::size_t files, std::size_t folders) {
    static const char* kExt[] = {".txt", ".docx", ".pdf", ".jpg", ".plist", ".eml", ""};
    static const char* kUserAttrs[] = {"kMDItemAuthors", "kMDItemTitle", "kMDItemSubject", "kMDItemKeywords",
                                       "kMDItemComment"};
    synth::StoreSpec spec;
    spec.seed = rng();
    std::vector<std::string> paths = {""};
    for (std::size_t i = 0; i < folders; ++i) {
        const auto& parent = paths[std::uniform_int_distribution<std::size_t>(0, paths.size() - 1)(rng)];
        synth::FolderSpec f{"dir" + std::to_string(i) + "_" + random_word(rng, 1, 6), parent};
        paths.push_back(parent.empty() ? f.name : parent + "/" + f.name);
        spec.folders.push_back(std::move(f));
    }
    for (std::size_t i = 0; i < files; ++i) {
        synth::FileSpec f;
        f.name = "f" + std::to_string(i) + "_" + random_word(rng, 1, 12) + kExt[rng() % 7];
        f.parent = paths[std::uniform_int_distribution<std::size_t>(0, paths.size() - 1)(rng)];
        const auto n_attrs = rng() % 3;
        for (std::size_t a = 0; a < n_attrs; ++a) f.attributes[kUserAttrs[rng() % 5]] = random_word(rng, 3, 24);
        spec.files.push_back(std::move(f));
    }
    return spec;
}

inline DataPage make_page(ByteView image, std::uint32_t index = 0) {
    DataPage p;
    p.index = index;
    p.bytes.assign(image.begin(), image.end());
    p.header = DataPageHeader::decode(image.first(kPageHeaderSize));
    return p;
}

inline Bytes random_bytes(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    Bytes out(n);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const auto v = rng();
        for (int k = 0; k < 8; ++k) out[i + k] = static_cast<std::uint8_t>(v >> (8 * k));
    }
    for (; i < n; ++i) out[i] = static_cast<std::uint8_t>(rng());
    return out;
}

}  // namespace sv2::testing
