#pragma once

// JSON / CSV / table emitters shared by the CLI and tests.

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

#include "sv2/analysis.hpp"
#include "sv2/carver.hpp"
#include "sv2/parser.hpp"
#include "sv2/records.hpp"

namespace sv2::report {

inline constexpr const char* kToolName = "sv2";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

std::string csv_field(std::string_view s);

nlohmann::json diagnostics_json(const Diagnostics& d);
nlohmann::json header_json(const StoreHeader& h);
nlohmann::json map_json(const PageMap& m);
nlohmann::json record_json(const RawRecord& r);
nlohmann::json carve_json(const ScanResult& scan, const CarveReport& report, const CarveOptions& options);
nlohmann::json diff_json(const DiffReport& d);
nlohmann::json hits_json(const std::vector<Hit>& hits);

void attrs_csv(std::ostream& out, const std::vector<AttributeEntry>& entries);
void utis_csv(std::ostream& out, const std::vector<UtiEntry>& entries);
void diff_csv(std::ostream& out, const DiffReport& d);
void carve_table(std::ostream& out, const CarveReport& report, const ScanResult& scan);

}  // namespace sv2::report
