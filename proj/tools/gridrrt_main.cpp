#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gridrrt/scenario.hpp"

namespace {

std::vector<int> parse_k_list(const std::string& text) try {
    std::vector<int> ks;
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        // a:b:step sweep
        const auto rest = text.substr(colon + 1);
        const auto colon2 = rest.find(':');
        if (colon2 == std::string::npos) throw gridrrt::ParseError("--k-list sweep needs a:b:step");
        const int a = std::stoi(text.substr(0, colon));
        const int b = std::stoi(rest.substr(0, colon2));
        const int step = std::stoi(rest.substr(colon2 + 1));
        if (step <= 0 || b < a) throw gridrrt::ParseError("--k-list sweep must increase");
        for (int k = a; k <= b; k += step) ks.push_back(k);
        return ks;
    }
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        ks.push_back(std::stoi(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    if (ks.empty()) throw gridrrt::ParseError("--k-list is empty");
    return ks;
} catch (const gridrrt::ParseError&) {
    throw;
} catch (const std::exception&) {
    throw gridrrt::ParseError("--k-list must be a comma list or a:b:step sweep of integers");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridrrt: dynamic security analysis of power systems via hybrid-automaton RRT search"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string scenario_path;
    std::string out_override;
    app.add_option("--scenario", scenario_path, "scenario JSON file")->required();
    app.add_option("--out", out_override, "output directory (overrides the scenario's out_dir)");

    auto* cmd_pf = app.add_subcommand("powerflow", "solve the pre-fault power flow, write the bus table");

    auto* cmd_sim = app.add_subcommand("simulate", "time-domain simulation of the fault scenario");
    std::optional<int> sim_mode;
    double sim_u = 0.0;
    double sim_duration = 10.0;
    std::string plots = "omega,delta,theta,v";
    cmd_sim->add_option("--mode", sim_mode, "post-clearing operation mode (default: scenario initial_mode)");
    cmd_sim->add_option("--u", sim_u, "constant control input after clearing");
    cmd_sim->add_option("--duration", sim_duration, "total simulated time (s)");
    cmd_sim->add_option("--plots", plots, "comma list of plot groups: omega,delta,theta,v");

    auto* cmd_dsa = app.add_subcommand("dsa", "search for a feasible execution into the target set");
    std::optional<std::uint64_t> seed_override;
    std::optional<int> k_override;
    int threads = 1;
    cmd_dsa->add_option("--seed", seed_override, "RNG seed (overrides the scenario seed)");
    cmd_dsa->add_option("--k", k_override, "iteration budget override");
    cmd_dsa->add_option("--threads", threads, "parallel simulations inside one expansion");

    auto* cmd_bench = app.add_subcommand("bench", "build trees for a list of K and record timings");
    std::string k_list = "100:1000:100";
    cmd_bench->add_option("--k-list", k_list, "comma list or a:b:step sweep of iteration budgets");

    CLI11_PARSE(app, argc, argv);

    try {
        const gridrrt::Scenario sc = gridrrt::load_scenario(scenario_path);
        const std::string out_dir = out_override.empty() ? sc.out_dir : out_override;

        if (cmd_pf->parsed()) {
            const auto art = gridrrt::run_powerflow(sc, out_dir);
            std::cout << "power flow converged in " << art.pf.iterations
                      << " iterations, max mismatch " << gridrrt::fmt_double(art.pf.mismatch_inf)
                      << " p.u.\n"
                      << "wrote " << art.csv_path << "\n";
        } else if (cmd_sim->parsed()) {
            std::vector<std::string> groups;
            std::size_t pos = 0;
            while (pos < plots.size()) {
                auto comma = plots.find(',', pos);
                if (comma == std::string::npos) comma = plots.size();
                groups.push_back(plots.substr(pos, comma - pos));
                pos = comma + 1;
            }
            const int mode = sim_mode.value_or(sc.initial_mode);
            const auto art = gridrrt::run_simulate(sc, mode, sim_u, sim_duration, out_dir, groups);
            std::cout << "simulated " << gridrrt::fmt_double(sim_duration) << " s, "
                      << art.points.size() << " samples\nwrote " << art.csv_path << "\n";
        } else if (cmd_dsa->parsed()) {
            gridrrt::DsaOverrides ov;
            ov.seed = seed_override;
            ov.iterations = k_override;
            ov.threads = threads;
            const auto outcome = gridrrt::run_dsa(sc, out_dir, ov);
            const auto& tree = outcome.plan.tree;
            std::cout << "verdict: " << outcome.verdict << "\n"
                      << "nodes: " << tree.nodes.size() << ", expanded: " << tree.expanded.size()
                      << ", simulator invocations: " << tree.sims_total << " (bound "
                      << tree.expanded.size() * outcome.ctx.automaton.modes.size() *
                             outcome.ctx.automaton.inputs.size()
                      << ")\n";
            if (outcome.plan.goal)
                std::cout << "goal node: " << outcome.plan.goal->node
                          << ", execution valid: " << (outcome.execution_report.ok ? "yes" : "no")
                          << "\n";
        } else if (cmd_bench->parsed()) {
            const auto ks = parse_k_list(k_list);
            const auto rows = gridrrt::run_bench(sc, ks, out_dir);
            for (const auto& row : rows)
                std::cout << "K=" << row.k << " total=" << gridrrt::fmt_double(row.t_total)
                          << "s nodes=" << row.nodes << " sims=" << row.sims_total << "\n";
            std::cout << "wrote " << out_dir << "/bench.csv\n";
        }
        return 0;
    } catch (const gridrrt::PowerFlowDivergence& e) {
        std::cerr << "power flow failed: " << e.what() << "\n";
        return 2;
    } catch (const gridrrt::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 3;
    } catch (const gridrrt::ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 3;
    } catch (const gridrrt::NewtonDivergence& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 4;
    } catch (const gridrrt::SingularJacobian& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 5;
    }
}
