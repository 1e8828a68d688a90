#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridrrt/errors.hpp"
#include "gridrrt/hybrid.hpp"
#include "gridrrt/planner.hpp"

namespace gridrrt {

using Json = nlohmann::ordered_json;

// Execution wire format: {intervals, modes, inputs, samples}. Doubles are
// emitted with shortest round-trip encoding, so serialization is lossless
// for 64-bit floats and byte-stable across runs.
inline Json execution_to_json(const Execution& chi) {
    Json j;
    j["intervals"] = Json::array();
    for (const auto& iv : chi.tau.intervals) j["intervals"].push_back({iv.begin, iv.end});
    j["modes"] = chi.modes;
    j["inputs"] = Json::array();
    for (const auto& in : chi.inputs) {
        if (in.continuous)
            j["inputs"].push_back(Json{{"u", *in.continuous}});
        else if (in.discrete_target)
            j["inputs"].push_back(Json{{"switch_to", *in.discrete_target}});
        else
            j["inputs"].push_back(nullptr);
    }
    j["samples"] = Json::array();
    for (const auto& series : chi.samples) {
        Json arr = Json::array();
        for (const auto& s : series) {
            Json rec;
            rec["t"] = s.t;
            rec["x"] = std::vector<double>(s.x.data(), s.x.data() + s.x.size());
            arr.push_back(std::move(rec));
        }
        j["samples"].push_back(std::move(arr));
    }
    return j;
}

inline Execution execution_from_json(const Json& j) {
    Execution chi;
    try {
        for (const auto& iv : j.at("intervals"))
            chi.tau.intervals.push_back(TimeInterval{iv.at(0).get<double>(), iv.at(1).get<double>()});
        chi.modes = j.at("modes").get<std::vector<int>>();
        for (const auto& in : j.at("inputs")) {
            if (in.is_null())
                chi.inputs.push_back(IntervalInput::none());
            else if (in.contains("u"))
                chi.inputs.push_back(IntervalInput::hold(in.at("u").get<double>()));
            else
                chi.inputs.push_back(IntervalInput::jump(in.at("switch_to").get<int>()));
        }
        for (const auto& series : j.at("samples")) {
            std::vector<ExecutionSample> ss;
            for (const auto& rec : series) {
                ExecutionSample s;
                s.t = rec.at("t").get<double>();
                const auto xs = rec.at("x").get<std::vector<double>>();
                s.x = Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
                ss.push_back(std::move(s));
            }
            chi.samples.push_back(std::move(ss));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("execution json: ") + e.what());
    }
    return chi;
}

// Tree export: nodes with parent links; edges are implicit.
inline Json tree_to_json(const SearchTree& tree) {
    Json j;
    j["nodes"] = Json::array();
    for (const auto& node : tree.nodes) {
        Json n;
        n["id"] = node.id;
        n["parent"] = node.parent < 0 ? Json(nullptr) : Json(node.parent);
        n["mode"] = node.state.mode;
        if (node.edge_input)
            n["input"] = Json{{"q", node.edge_input->first}, {"u", node.edge_input->second}};
        else
            n["input"] = nullptr;
        n["x"] = std::vector<double>(node.state.x.data(), node.state.x.data() + node.state.x.size());
        j["nodes"].push_back(std::move(n));
    }
    return j;
}

inline void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    out << j.dump(1) << "\n";
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace gridrrt
