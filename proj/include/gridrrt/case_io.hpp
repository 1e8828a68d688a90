#pragma once

#include <set>
#include <string>
#include <vector>

#include "gridrrt/io.hpp"
#include "gridrrt/power.hpp"

namespace gridrrt {

namespace detail {

inline void reject_unknown_keys(const Json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) throw ParseError(where + ": unknown field '" + key + "'");
}

}  // namespace detail

inline PowerSystemCase case_from_json(const Json& j) {
    PowerSystemCase sys;
    try {
        detail::reject_unknown_keys(j, {"schema", "name", "provenance", "base_mva", "freq_hz",
                                        "load_model", "infinite_bus", "buses", "lines",
                                        "generators", "modes", "edges", "control", "fault"},
                                    "case");
        if (j.at("schema").get<std::string>() != "gridrrt-case-1")
            throw ParseError("case: unsupported schema '" + j.at("schema").get<std::string>() + "'");
        sys.name = j.value("name", "");
        sys.provenance = j.value("provenance", "");
        sys.base_mva = j.at("base_mva").get<double>();
        sys.freq_hz = j.at("freq_hz").get<double>();
        const std::string lm = j.value("load_model", "constant_power");
        if (lm == "constant_power")
            sys.load_model = LoadModel::ConstantPower;
        else if (lm == "constant_impedance")
            sys.load_model = LoadModel::ConstantImpedance;
        else
            throw ParseError("case: unknown load_model '" + lm + "'");
        sys.infinite_bus = j.value("infinite_bus", true);

        for (const auto& bj : j.at("buses")) {
            detail::reject_unknown_keys(
                bj, {"id", "kind", "p_load", "q_load", "p_gen", "v_setpoint", "v", "theta", "v_min", "v_max"},
                "bus");
            Bus bus;
            bus.id = bj.at("id").get<int>();
            const std::string kind = bj.at("kind").get<std::string>();
            if (kind == "slack")
                bus.kind = BusKind::Slack;
            else if (kind == "PV")
                bus.kind = BusKind::PV;
            else if (kind == "PQ")
                bus.kind = BusKind::PQ;
            else
                throw ParseError("bus " + std::to_string(bus.id) + ": unknown kind '" + kind + "'");
            bus.p_load = bj.value("p_load", 0.0);
            bus.q_load = bj.value("q_load", 0.0);
            bus.p_gen = bj.value("p_gen", 0.0);
            bus.v_setpoint = bj.value("v_setpoint", 1.0);
            bus.v = bj.value("v", 1.0);
            bus.theta = bj.value("theta", 0.0);
            if (bj.contains("v_min")) bus.v_min = bj.at("v_min").get<double>();
            if (bj.contains("v_max")) bus.v_max = bj.at("v_max").get<double>();
            sys.buses.push_back(bus);
        }

        for (const auto& lj : j.at("lines")) {
            detail::reject_unknown_keys(lj, {"id", "from", "to", "r", "x", "b", "tap", "closed"},
                                        "line");
            Line line;
            line.id = lj.at("id").get<std::string>();
            line.from = lj.at("from").get<int>();
            line.to = lj.at("to").get<int>();
            line.r = lj.value("r", 0.0);
            line.x = lj.at("x").get<double>();
            line.b = lj.value("b", 0.0);
            line.tap = lj.value("tap", 1.0);
            line.closed = lj.value("closed", true);
            sys.lines.push_back(line);
        }

        for (const auto& gj : j.at("generators")) {
            detail::reject_unknown_keys(
                gj, {"id", "bus", "h", "d", "xd_p", "e_p", "delta", "omega", "p_m"}, "generator");
            Generator gen;
            gen.id = gj.at("id").get<int>();
            gen.bus = gj.at("bus").get<int>();
            gen.h = gj.at("h").get<double>();
            gen.d = gj.value("d", 0.0);
            gen.xd_p = gj.at("xd_p").get<double>();
            gen.e_p = gj.value("e_p", 0.0);
            gen.delta = gj.value("delta", 0.0);
            gen.omega = gj.value("omega", 1.0);
            gen.p_m = gj.value("p_m", 0.0);
            sys.generators.push_back(gen);
        }

        for (const auto& mj : j.at("modes")) {
            detail::reject_unknown_keys(mj, {"id", "label", "open_lines"}, "mode");
            ModeSpec m;
            m.mode.id = mj.at("id").get<int>();
            m.mode.label = mj.value("label", "");
            m.open_lines = mj.value("open_lines", std::vector<std::string>{});
            sys.modes.push_back(m);
        }

        for (const auto& ej : j.at("edges")) sys.edges.emplace_back(ej.at(0).get<int>(), ej.at(1).get<int>());

        const auto& cj = j.at("control");
        detail::reject_unknown_keys(cj, {"target", "inputs"}, "control");
        sys.control.target_gen = cj.at("target").get<int>();
        sys.control.inputs = cj.at("inputs").get<std::vector<double>>();

        if (j.contains("fault")) {
            const auto& fj = j.at("fault");
            detail::reject_unknown_keys(fj, {"bus", "shunt_b"}, "fault");
            sys.fault = FaultSpec{fj.at("bus").get<int>(), fj.value("shunt_b", -1e6)};
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("case json: ") + e.what());
    }

    // Semantic validation.
    std::set<int> bus_ids;
    int slack_count = 0;
    for (const auto& bus : sys.buses) {
        if (!bus_ids.insert(bus.id).second)
            throw ValidationError("case: duplicate bus id " + std::to_string(bus.id));
        if (bus.kind == BusKind::Slack) ++slack_count;
        if (!(bus.v > 0.0)) throw ValidationError("case: bus " + std::to_string(bus.id) + ": v <= 0");
    }
    if (slack_count != 1)
        throw ValidationError("case: expected exactly one slack bus, found " +
                              std::to_string(slack_count));
    std::set<std::string> line_ids;
    for (const auto& line : sys.lines) {
        if (!line_ids.insert(line.id).second)
            throw ValidationError("case: duplicate line id '" + line.id + "'");
        if (line.x == 0.0) throw ValidationError("case: line '" + line.id + "': x must be nonzero");
        if (line.from == line.to)
            throw ValidationError("case: line '" + line.id + "': from == to");
        sys.bus_index(line.from);
        sys.bus_index(line.to);
    }
    std::set<int> gen_ids;
    for (const auto& gen : sys.generators) {
        if (!gen_ids.insert(gen.id).second)
            throw ValidationError("case: duplicate generator id " + std::to_string(gen.id));
        if (!(gen.h > 0.0)) throw ValidationError("case: generator " + std::to_string(gen.id) + ": H <= 0");
        if (!(gen.xd_p > 0.0))
            throw ValidationError("case: generator " + std::to_string(gen.id) + ": xd_p <= 0");
        sys.bus_index(gen.bus);
    }
    for (std::size_t i = 0; i < sys.modes.size(); ++i) {
        if (sys.modes[i].mode.id != static_cast<int>(i))
            throw ValidationError("case: mode ids must be dense 0..n-1 in order");
        for (const auto& lid : sys.modes[i].open_lines)
            if (!line_ids.count(lid))
                throw ValidationError("case: mode references unknown line '" + lid + "'");
    }
    if (sys.modes.empty()) throw ValidationError("case: at least one mode required");
    for (const auto& e : sys.edges)
        if (e.first < 0 || e.first >= static_cast<int>(sys.modes.size()) || e.second < 0 ||
            e.second >= static_cast<int>(sys.modes.size()) || e.first == e.second)
            throw ValidationError("case: invalid edge");
    if (!sys.generators.empty()) sys.generator_index(sys.control.target_gen);
    return sys;
}

inline Json case_to_json(const PowerSystemCase& sys) {
    Json j;
    j["schema"] = "gridrrt-case-1";
    j["name"] = sys.name;
    if (!sys.provenance.empty()) j["provenance"] = sys.provenance;
    j["base_mva"] = sys.base_mva;
    j["freq_hz"] = sys.freq_hz;
    j["load_model"] =
        sys.load_model == LoadModel::ConstantPower ? "constant_power" : "constant_impedance";
    j["infinite_bus"] = sys.infinite_bus;
    j["buses"] = Json::array();
    for (const auto& bus : sys.buses) {
        Json bj;
        bj["id"] = bus.id;
        bj["kind"] = bus.kind == BusKind::Slack ? "slack" : (bus.kind == BusKind::PV ? "PV" : "PQ");
        bj["p_load"] = bus.p_load;
        bj["q_load"] = bus.q_load;
        bj["p_gen"] = bus.p_gen;
        bj["v_setpoint"] = bus.v_setpoint;
        bj["v"] = bus.v;
        bj["theta"] = bus.theta;
        if (bus.v_min) bj["v_min"] = *bus.v_min;
        if (bus.v_max) bj["v_max"] = *bus.v_max;
        j["buses"].push_back(std::move(bj));
    }
    j["lines"] = Json::array();
    for (const auto& line : sys.lines) {
        Json lj;
        lj["id"] = line.id;
        lj["from"] = line.from;
        lj["to"] = line.to;
        lj["r"] = line.r;
        lj["x"] = line.x;
        lj["b"] = line.b;
        lj["tap"] = line.tap;
        lj["closed"] = line.closed;
        j["lines"].push_back(std::move(lj));
    }
    j["generators"] = Json::array();
    for (const auto& gen : sys.generators) {
        Json gj;
        gj["id"] = gen.id;
        gj["bus"] = gen.bus;
        gj["h"] = gen.h;
        gj["d"] = gen.d;
        gj["xd_p"] = gen.xd_p;
        gj["e_p"] = gen.e_p;
        gj["delta"] = gen.delta;
        gj["omega"] = gen.omega;
        gj["p_m"] = gen.p_m;
        j["generators"].push_back(std::move(gj));
    }
    j["modes"] = Json::array();
    for (const auto& m : sys.modes) {
        Json mj;
        mj["id"] = m.mode.id;
        mj["label"] = m.mode.label;
        mj["open_lines"] = m.open_lines;
        j["modes"].push_back(std::move(mj));
    }
    j["edges"] = Json::array();
    for (const auto& e : sys.edges) j["edges"].push_back({e.first, e.second});
    j["control"] = Json{{"target", sys.control.target_gen}, {"inputs", sys.control.inputs}};
    if (sys.fault) j["fault"] = Json{{"bus", sys.fault->bus}, {"shunt_b", sys.fault->shunt_b}};
    return j;
}

inline PowerSystemCase load_case(const std::string& path) { return case_from_json(read_json_file(path)); }

inline void save_case(const PowerSystemCase& sys, const std::string& path) {
    write_json_file(path, case_to_json(sys));
}

}  // namespace gridrrt
