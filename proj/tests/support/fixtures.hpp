#pragma once

#include <cstdint>
#include <vector>

namespace sv2::fixtures {

// One record of a word document: size marker 0x171 then 369 body bytes.
inline const std::vector<std::uint8_t> kWordDocumentRecord = {
    0x71, 0x01, 0x00, 0x00, 0xDF, 0xA7, 0xDF, 0x00, 0x85, 0x00, 0xDF, 0xA7, 0x99, 0xFE, 0x05, 0x56,
    0x56, 0x6B, 0x38, 0xD1, 0x54, 0x07, 0x02, 0x03, 0x80, 0xCC, 0x01, 0x0E, 0x03, 0x81, 0xF5, 0x02,
    0xC0, 0x60, 0x00, 0x0A, 0x03, 0x01, 0x00, 0x00, 0x00, 0xE4, 0x72, 0x32, 0xBF, 0x41, 0x01, 0x00,
    0x00, 0x00, 0x0D, 0xAF, 0x31, 0xBF, 0x41, 0x01, 0x00, 0x00, 0x00, 0x0D, 0xAF, 0x31, 0xBF, 0x41,
    0x01, 0x1A, 0x01, 0x05, 0x01, 0x14, 0x44, 0x6F, 0x63, 0x75, 0x6D, 0x65, 0x6E, 0x74, 0x5F, 0x30,
    0x31, 0x2D, 0x30, 0x31, 0x2E, 0x64, 0x6F, 0x63, 0x78, 0x00, 0x01, 0x14, 0x44, 0x6F, 0x63, 0x75,
    0x6D, 0x65, 0x6E, 0x74, 0x5F, 0x30, 0x31, 0x2D, 0x30, 0x31, 0x2E, 0x64, 0x6F, 0x63, 0x78, 0x00,
    0x01, 0x01, 0x01, 0x01, 0x01, 0x00, 0x00, 0x00, 0xE4, 0x72, 0x32, 0xBF, 0x41, 0x01, 0xF0, 0x4D,
    0x53, 0x57, 0x44, 0x02, 0x00, 0x00, 0x00, 0x0D, 0xAF, 0x31, 0xBF, 0x41, 0x01, 0xF0, 0x57, 0x58,
    0x42, 0x4E, 0x01, 0x14, 0x01, 0x11, 0x44, 0x6F, 0x63, 0x75, 0x6D, 0x65, 0x6E, 0x74, 0x5F, 0x30,
    0x31, 0x2D, 0x30, 0x31, 0x16, 0x02, 0x00, 0x01, 0x04, 0x35, 0x30, 0x31, 0x00, 0x01, 0x10, 0x54,
    0x61, 0x6A, 0x76, 0x69, 0x6E, 0x64, 0x65, 0x72, 0x20, 0x41, 0x74, 0x77, 0x61, 0x6C, 0x00, 0x01,
    0x16, 0x41, 0x75, 0x74, 0x68, 0x6F, 0x72, 0x5F, 0x44, 0x6F, 0x63, 0x75, 0x6D, 0x65, 0x6E, 0x74,
    0x5F, 0x30, 0x31, 0x2D, 0x30, 0x31, 0x00, 0x01, 0x01, 0x02, 0x17, 0x53, 0x75, 0x62, 0x6A, 0x65,
    0x63, 0x74, 0x5F, 0x44, 0x6F, 0x63, 0x75, 0x6D, 0x65, 0x6E, 0x74, 0x5F, 0x30, 0x31, 0x2D, 0x30,
    0x31, 0x00, 0x01, 0x17, 0x43, 0x6F, 0x6D, 0x70, 0x61, 0x6E, 0x79, 0x5F, 0x44, 0x6F, 0x63, 0x75,
    0x6D, 0x65, 0x6E, 0x74, 0x5F, 0x30, 0x31, 0x2D, 0x30, 0x31, 0x00, 0x01, 0x18, 0x48, 0x65, 0x79,
    0x77, 0x6F, 0x72, 0x64, 0x73, 0x5F, 0x44, 0x6F, 0x63, 0x75, 0x6D, 0x65, 0x6E, 0x74, 0x5F, 0x30,
    0x31, 0x2D, 0x30, 0x31, 0x00, 0x02, 0x18, 0x43, 0x6F, 0x6D, 0x6D, 0x65, 0x6E, 0x74, 0x73, 0x5F,
    0x44, 0x6F, 0x63, 0x75, 0x6D, 0x65, 0x6E, 0x74, 0x5F, 0x30, 0x31, 0x2D, 0x30, 0x31, 0x00, 0x01,
    0x01, 0x01, 0x08, 0x01, 0x08, 0x46, 0x5C, 0xF8, 0x0D, 0xAF, 0x31, 0xBF, 0x41, 0x02, 0x09, 0x01,
    0x15, 0x54, 0x69, 0x74, 0x6C, 0x65, 0x5F, 0x44, 0x6F, 0x63, 0x75, 0x6D, 0x65, 0x6E, 0x74, 0x5F,
    0x30, 0x31, 0x2D, 0x30, 0x31, 0x00, 0x01, 0x01, 0x01, 0xC0, 0x56, 0x0D, 0x02, 0x00, 0x00, 0x00,
    0xC5, 0xC8, 0x63, 0x2D, 0xC4,
};

// Head of a UTI table page (subtype 33), first nine rows.
inline const std::vector<std::uint8_t> kUtiPageHead = {
    0x32, 0x70, 0x62, 0x64, 0x00, 0x40, 0x00, 0x00, 0x89, 0x19, 0x00, 0x00, 0x21, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x01, 0x00, 0x00, 0x00, 0x70, 0x75, 0x62, 0x6C, 0x69, 0x63, 0x2E, 0x6D, 0x65, 0x73, 0x73, 0x61,
    0x67, 0x65, 0x00, 0x02, 0x00, 0x00, 0x00, 0x63, 0x6F, 0x6D, 0x2E, 0x61, 0x70, 0x70, 0x6C, 0x65,
    0x2E, 0x6D, 0x61, 0x69, 0x6C, 0x2E, 0x65, 0x6D, 0x6C, 0x78, 0x00, 0x03, 0x00, 0x00, 0x00, 0x63,
    0x6F, 0x6D, 0x2E, 0x61, 0x70, 0x70, 0x6C, 0x65, 0x2E, 0x6D, 0x61, 0x69, 0x6C, 0x2E, 0x65, 0x6D,
    0x6C, 0x00, 0x04, 0x00, 0x00, 0x00, 0x63, 0x6F, 0x6D, 0x2E, 0x6D, 0x69, 0x63, 0x72, 0x6F, 0x73,
    0x6F, 0x66, 0x74, 0x2E, 0x65, 0x6E, 0x74, 0x6F, 0x75, 0x72, 0x61, 0x67, 0x65, 0x2E, 0x76, 0x69,
    0x72, 0x74, 0x75, 0x61, 0x6C, 0x2E, 0x6D, 0x65, 0x73, 0x73, 0x61, 0x67, 0x65, 0x00, 0x05, 0x00,
};

}  // namespace sv2::fixtures
