#pragma once

#include "shrinker/analysis.hpp"

#include <json.hpp>

#include <string>

namespace shrinker {

using Json = nlohmann::json;

void to_json(Json& j, const SeedSpec& s);
void from_json(const Json& j, SeedSpec& s);
// Missing fields keep their defaults; unknown fields are rejected with InvalidInput.
void to_json(Json& j, const EvolveConfig& c);
void from_json(const Json& j, EvolveConfig& c);

void to_json(Json& j, const TraceRecord& r);
void to_json(Json& j, const EvolveTrace& t);
void to_json(Json& j, const TraceSummary& s);
void to_json(Json& j, const AngleStats& a);
void to_json(Json& j, const VerticalAxisReport& v);
void to_json(Json& j, const KnownShrinkerCheck& c);
void to_json(Json& j, const VerifyReport& r);
void to_json(Json& j, const WidthScan& w);

// The full trace goes to a sidecar; the report keeps its summary.
Json report_json(const RunReport& r, bool include_trace = false);

// Shortest round-trip decimal form of every double, two-space indentation.
std::string dump(const Json& j);

// Fields present in the file override `base`.
EvolveConfig load_config(const std::string& path, EvolveConfig base = {});
void write_json(const std::string& path, const Json& j);

// <dir>/<stem>.obj and <dir>/<stem>.trace.json.
void write_checkpoint(const std::string& dir, const std::string& stem, const TriMesh& mesh,
                      const EvolveTrace& trace);

} // namespace shrinker
