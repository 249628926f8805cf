#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tsl/abstraction.hpp"
#include "tsl/config.hpp"
#include "tsl/facts.hpp"
#include "tsl/opendrive.hpp"
#include "tsl/osc.hpp"
#include "tsl/reasoner.hpp"
#include "tsl/rules.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw tsl::InvalidInput("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Common {
    std::string config_path;
    std::string out_path;

    tsl::Config config() const { return config_path.empty() ? tsl::Config{} : tsl::parse_config(slurp(config_path)); }

    void write(const tsl::Config& cfg, const std::string& text) const { write_to(cfg, out_path, text); }

    static void write_to(const tsl::Config& cfg, const std::string& path, const std::string& text) {
        if (path.empty() || path == "-") {
            std::cout << text;
            return;
        }
        fs::path p(path);
        if (p.is_relative()) p = fs::path(cfg.output_dir) / p;
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        out << text;
        if (!out) throw tsl::InvalidInput("cannot write '" + p.string() + "'");
    }
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "key=value settings file");
    cmd->add_option("--out", c.out_path, "output file (default: standard output)");
}

tsl::NetworkPtr load_network(const std::string& path) {
    auto net = tsl::parse_network(slurp(path));
    if (auto defects = tsl::validate_network(net); !defects.empty()) {
        std::string msg = "network is invalid:";
        for (const auto& d : defects) msg += "\n  " + d.message();
        throw tsl::InvalidInput(msg);
    }
    return tsl::compile(std::move(net));
}

std::string coord_facts(const tsl::AbstractMap& m) {
    std::string out;
    char buf[160];
    for (const auto& [p, xy] : m.point_xy) {
        std::snprintf(buf, sizeof buf, "coord(%s,%.3f,%.3f,0).\n", p.str().c_str(), xy.x, xy.y);
        out += buf;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Traffic scenario logic toolkit"};
    app.require_subcommand(1);

    Common ingest_opts;
    std::string ingest_map, ingest_coords;
    auto* ingest = app.add_subcommand("ingest", "OpenDRIVE map to network facts");
    ingest->add_option("map", ingest_map, "OpenDRIVE file")->required();
    ingest->add_option("--coords", ingest_coords, "also write point coordinates here");
    add_common(ingest, ingest_opts);

    Common gen_opts;
    std::string gen_request, gen_mode;
    int gen_workers = 0, gen_horizon = 0;
    auto* generate = app.add_subcommand("generate", "enumerate scenarios for a request");
    generate->add_option("request", gen_request, "request file")->required();
    generate->add_option("--workers", gen_workers, "worker threads")->check(CLI::PositiveNumber);
    generate->add_option("--mode", gen_mode, "exact|shortest")->check(CLI::IsMember({"exact", "shortest"}));
    generate->add_option("--horizon", gen_horizon, "maximum number of scenes")->check(CLI::PositiveNumber);
    add_common(generate, gen_opts);

    Common check_opts;
    std::string check_scenario_path, check_network_path;
    auto* check = app.add_subcommand("check", "report rule violations");
    check->add_option("scenario", check_scenario_path, "scenario fact file")->required();
    check->add_option("network", check_network_path, "network fact file")->required();
    add_common(check, check_opts);

    Common abs_opts;
    std::string abs_trace, abs_map;
    auto* abstract = app.add_subcommand("abstract", "trace CSV to scenario facts");
    abstract->add_option("trace", abs_trace, "trace CSV")->required();
    abstract->add_option("map", abs_map, "OpenDRIVE file")->required();
    add_common(abstract, abs_opts);

    Common exp_opts;
    std::string exp_scenario, exp_network, exp_coords;
    auto* exportc = app.add_subcommand("export", "scenario facts to OpenSCENARIO DSL");
    exportc->add_option("scenario", exp_scenario, "scenario fact file")->required();
    exportc->add_option("network", exp_network, "network fact file")->required();
    exportc->add_option("--coords", exp_coords, "coord(p,x,y,z) facts");
    add_common(exportc, exp_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*ingest) {
            const auto cfg = ingest_opts.config();
            const auto model = tsl::parse_opendrive(slurp(ingest_map));
            const auto m = tsl::abstract_map(model, cfg.tolerances);
            if (auto defects = tsl::validate_network(m.network); !defects.empty()) {
                std::string msg = "abstracted network is invalid:";
                for (const auto& d : defects) msg += "\n  " + d.message();
                throw tsl::InvalidInput(msg);
            }
            ingest_opts.write(cfg, m.metadata_block() + tsl::render_network(m.network));
            if (!ingest_coords.empty()) Common::write_to(cfg, ingest_coords, coord_facts(m));
        } else if (*generate) {
            const auto cfg = gen_opts.config();
            auto req = tsl::parse_request(slurp(gen_request));
            req.workers = gen_workers > 0 ? gen_workers : cfg.workers;
            if (!gen_mode.empty()) req.mode = *tsl::mode_from_string(gen_mode);
            if (gen_horizon > 0) req.horizon = gen_horizon;
            req.max_scenarios = cfg.max_scenarios;
            const auto res = tsl::expand(req);
            gen_opts.write(cfg, tsl::render_result(res.scenarios));
            const auto& st = res.stats;
            std::cerr << "scenarios: " << res.scenarios.size() << "\n"
                      << "horizon: " << st.horizon << "\n"
                      << "expanded: " << st.expanded << "\n"
                      << "pruned: " << st.pruned << "\n"
                      << "distinct scenes: " << st.distinct << "\n"
                      << "seconds: " << st.seconds << "\n";
        } else if (*check) {
            const auto cfg = check_opts.config();
            const auto net = load_network(check_network_path);
            const auto scenarios = tsl::parse_scenarios(slurp(check_scenario_path), net);
            std::string report;
            for (std::size_t i = 0; i < scenarios.size(); ++i)
                for (const auto& line : tsl::render_report(tsl::check_scenario(scenarios[i])))
                    report += (scenarios.size() > 1 ? "scenario " + std::to_string(i + 1) + ": " : "") + line + "\n";
            check_opts.write(cfg, report);
            return report.empty() ? 0 : 1;
        } else if (*abstract) {
            const auto cfg = abs_opts.config();
            const auto samples = tsl::parse_trace_csv(slurp(abs_trace));
            const auto m = tsl::abstract_map(tsl::parse_opendrive(slurp(abs_map)), cfg.tolerances);
            const auto sc = tsl::abstract_trace(samples, m);
            abs_opts.write(cfg, m.metadata_block() + tsl::render_scenario(sc));
        } else if (*exportc) {
            const auto cfg = exp_opts.config();
            const auto net = load_network(exp_network);
            const auto scenarios = tsl::parse_scenarios(slurp(exp_scenario), net);
            std::optional<tsl::CoordMap> coords;
            if (!exp_coords.empty()) coords = tsl::parse_coords(slurp(exp_coords));
            std::string out;
            for (std::size_t i = 0; i < scenarios.size(); ++i) {
                if (i) out += "\n";
                const std::string name = scenarios.size() > 1 ? "tsl_scenario_" + std::to_string(i + 1) : "tsl_scenario";
                out += tsl::emit_osc(scenarios[i], coords, name);
            }
            exp_opts.write(cfg, out);
        }
    } catch (const tsl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
