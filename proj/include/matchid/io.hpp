#pragma once
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "matchid/algorithms.hpp"
#include "matchid/fluid.hpp"
#include "matchid/market.hpp"
#include "matchid/oracle.hpp"

namespace matchid {

using Json = nlohmann::json;

Json to_json(const Mat& m);
Mat mat_from_json(const Json& j);

Json instance_to_json(const MarketInstance& inst);
// Validates the instance after parsing.
MarketInstance instance_from_json(const Json& j);
MarketInstance load_instance(const std::string& path);
void save_instance(const MarketInstance& inst, const std::string& path);

Json solution_to_json(const OracleSolution& sol);

// Accepts {"alloc": [[...]]} or a bare matrix.
Mat load_alloc(const std::string& path);

Json read_json_file(const std::string& path);
void write_json_file(const Json& j, const std::string& path);

std::string version_string();
std::string git_revision();

// '#'-prefixed metadata block: version, revision, then the given key/value pairs.
using Meta = std::vector<std::pair<std::string, std::string>>;
void write_meta(std::ostream& os, const Meta& meta);

// Shortest round-trip decimal form.
std::string fmt(double v);

void write_results_csv(std::ostream& os, const std::vector<RunResult>& results, const Meta& meta);
void write_trace_csv(std::ostream& os, const RunResult& result, int M, int K, const Meta& meta);
void write_trajectory_csv(std::ostream& os, const FluidTrajectory& tr, const Meta& meta);

}  // namespace matchid
