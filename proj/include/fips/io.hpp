#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "fips/harness.hpp"
#include "fips/model.hpp"
#include "fips/scheduler.hpp"
#include "fips/sim.hpp"

namespace fips {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

// Parsing is strict: unknown fields, a missing or different format_version,
// and wrong types raise Error(Parse) naming the offending field.

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);
std::string dump(const Json& j);

Json to_json(const DelayHistogram& h);
DelayHistogram histogram_from_json(const Json& j, const std::string& where = "histogram");

// Histogram entries may be inline objects or paths relative to base_dir.
Json to_json(const NetworkSpec& n);
NetworkSpec network_from_json(const Json& j, const std::string& base_dir = ".");
NetworkGraph load_network(const std::string& path);

Json to_json(const std::vector<StreamSpec>& streams);
std::vector<StreamSpec> streams_from_json(const Json& j);
std::vector<StreamSpec> load_streams(const std::string& path);

// Ports are written as {src, dst} node ids.
Json to_json(const TsnConfiguration& c, const NetworkGraph& g);
TsnConfiguration configuration_from_json(const Json& j, const NetworkGraph& g);

Json to_json(const ScheduleResult& r, const NetworkGraph& g);

Json to_json(const QosReport& q);
QosReport qos_from_json(const Json& j);

Json to_json(const Trace& t, const std::vector<Stream>& streams);
Trace trace_from_json(const Json& j, const std::vector<Stream>& streams);

Json to_json(const std::vector<Violation>& v, const NetworkGraph& g);

Json to_json(const ScenarioSpec& s);
ScenarioSpec scenario_from_json(const Json& j);

Json to_json(const ReliabilityReport& r);
Json to_json(const ScalabilityReport& r);

}  // namespace fips
