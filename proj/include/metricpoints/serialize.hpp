#pragma once

#include "metricpoints/discrepancy.hpp"
#include "metricpoints/invariance.hpp"
#include "metricpoints/partition.hpp"

#include <json.hpp>

#include <string>

namespace mps {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; identical input bits give identical
/// text, which keeps records byte-stable for a fixed build.
std::string format_double(double v);

Json to_json(const Estimate& e);
Json to_json(const PointSet& pts);
Json to_json(const BoxPartition& part);
Json to_json(const SpacePartition& part);
Json to_json(const DiscrepancyReport& rep);
Json to_json(const InvarianceReport& rep);
Json to_json(const BoundReport& rep);

/// Wrap a payload in the versioned record envelope: schema and artifact
/// versions, the command, the seed, and an echo of the effective config.
Json record_envelope(const std::string& command, std::uint64_t seed, const Json& config,
                     Json payload);

// Fixed CSV schemas (documented in the README).
std::string bounds_sweep_csv_header();
std::string bounds_sweep_csv_row(const BoundReport& rep);
std::string discrepancy_csv_header();
std::string discrepancy_csv_row(const DiscrepancyReport& rep);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace mps
