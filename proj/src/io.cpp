#include "matchid/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#ifndef MATCHID_VERSION
#define MATCHID_VERSION "0.0.0"
#endif
#ifndef MATCHID_GIT_REVISION
#define MATCHID_GIT_REVISION "unknown"
#endif

namespace matchid {

Json to_json(const Mat& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.rows; ++i) {
        Json r = Json::array();
        for (int k = 0; k < m.cols; ++k) r.push_back(m(i, k));
        rows.push_back(std::move(r));
    }
    return rows;
}

Mat mat_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix must be a nonempty array of arrays");
    std::vector<std::vector<double>> rows;
    for (const auto& r : j) {
        if (!r.is_array()) throw std::invalid_argument("matrix row is not an array");
        rows.push_back(r.get<std::vector<double>>());
        if (rows.back().size() != rows.front().size()) throw std::invalid_argument("ragged matrix");
    }
    return Mat::from_rows(rows);
}

Json instance_to_json(const MarketInstance& inst) {
    Json j;
    j["kind"] = inst.kind;
    j["M"] = inst.M;
    j["K"] = inst.K;
    j["family"] = to_string(inst.family);
    if (inst.variance != 1.0) j["variance"] = inst.variance;
    j["mu"] = to_json(inst.mu);
    if (inst.eta) j["eta"] = to_json(*inst.eta);
    if (inst.arm_prefs) j["arm_prefs"] = *inst.arm_prefs;
    return j;
}

MarketInstance instance_from_json(const Json& j) {
    MarketInstance inst;
    try {
        inst.kind = j.value("kind", std::string("custom"));
        inst.family = family_from_string(j.value("family", std::string("gaussian")));
        inst.variance = j.value("variance", 1.0);
        inst.mu = mat_from_json(j.at("mu"));
        inst.M = j.value("M", inst.mu.rows);
        inst.K = j.value("K", inst.mu.cols);
        if (j.contains("eta")) inst.eta = mat_from_json(j.at("eta"));
        if (j.contains("arm_prefs")) inst.arm_prefs = j.at("arm_prefs").get<Ordering>();
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("malformed instance: ") + e.what());
    }
    inst.validate();
    return inst;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

void write_json_file(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

MarketInstance load_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }

void save_instance(const MarketInstance& inst, const std::string& path) {
    write_json_file(instance_to_json(inst), path);
}

Json solution_to_json(const OracleSolution& sol) {
    Json j;
    j["w"] = to_json(sol.w);
    j["T_star"] = sol.T_star;
    j["level"] = sol.level;
    j["residuals"] = {{"first_order", sol.residual}};
    j["anchors"] = sol.anchors;
    j["method"] = sol.method;
    return j;
}

Mat load_alloc(const std::string& path) {
    Json j = read_json_file(path);
    return mat_from_json(j.is_object() ? j.at("alloc") : j);
}

std::string version_string() { return MATCHID_VERSION; }
std::string git_revision() { return MATCHID_GIT_REVISION; }

void write_meta(std::ostream& os, const Meta& meta) {
    os << "# version: " << version_string() << "\n";
    os << "# git_revision: " << git_revision() << "\n";
    for (const auto& [k, v] : meta) os << "# " << k << ": " << v << "\n";
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_results_csv(std::ostream& os, const std::vector<RunResult>& results, const Meta& meta) {
    write_meta(os, meta);
    os << "rep,tau,correct,hit_cap\n";
    for (std::size_t r = 0; r < results.size(); ++r)
        os << r << "," << results[r].tau << "," << (results[r].correct ? 1 : 0) << ","
           << (results[r].hit_cap ? 1 : 0) << "\n";
}

void write_trace_csv(std::ostream& os, const RunResult& result, int M, int K, const Meta& meta) {
    write_meta(os, meta);
    os << "t,i_t,k_t,min_index";
    for (int i = 0; i < M; ++i) os << ",g" << i;
    for (int i = 0; i < M; ++i)
        for (int k = 0; k < K; ++k) os << ",w" << i << "_" << k;
    os << "\n";
    for (const auto& row : result.trace) {
        os << row.t << "," << row.i << "," << row.k << "," << fmt(row.min_index);
        for (double g : row.anchors) os << "," << fmt(g);
        for (double w : row.alloc) os << "," << fmt(w);
        os << "\n";
    }
}

void write_trajectory_csv(std::ostream& os, const FluidTrajectory& tr, const Meta& meta) {
    write_meta(os, meta);
    if (tr.rows.empty()) return;
    const Mat& a0 = tr.rows.front().alloc;
    os << "t";
    for (int i = 0; i < a0.rows; ++i)
        for (int k = 0; k < a0.cols; ++k) os << ",t" << i << "_" << k;
    for (int i = 0; i < a0.rows; ++i) os << ",g" << i;
    os << ",C_min,labels,event\n";
    for (const auto& row : tr.rows) {
        os << fmt(row.t);
        for (double v : row.alloc.data) os << "," << fmt(v);
        for (double g : row.anchor) os << "," << fmt(g);
        os << "," << fmt(row.C_min) << "," << row.labels << "," << row.event << "\n";
    }
}

}  // namespace matchid
