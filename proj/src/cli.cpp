#include "closedgeo/cli.hpp"

#include "closedgeo/acceptance.hpp"
#include "closedgeo/errors.hpp"
#include "closedgeo/level_ring.hpp"
#include "closedgeo/report.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace closedgeo {

namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, other = 1, usage = 2, solver = 3, round_trip = 4, ring_axiom = 5 };

struct Global {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string coeff = "z2";
};

// with --out, create the directory and return a stream on out/file; without, stdout
struct Sink {
    std::ofstream file;
    std::ostream* os = &std::cout;
    std::string path;

    Sink(const Global& g, const std::string& name) {
        if (g.out.empty()) return;
        std::error_code ec;
        fs::create_directories(g.out, ec);
        path = (fs::path(g.out) / name).string();
        file.open(path, std::ios::binary);
        if (!file) throw ConfigError(fmt::format("output directory '{}' is not writable", g.out));
        os = &file;
    }
};

CampaignConfig campaign(const Global& g) {
    if (g.config.empty()) throw ConfigError("--config is required");
    auto cfg = load_campaign(g.config);
    if (g.seed) cfg.model.seed = *g.seed;
    return cfg;
}

int cmd_find(const Global& g) {
    CampaignConfig cfg;
    try {
        cfg = campaign(g);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return usage;
    }
    OrbitDatabase db;
    try {
        db = run_campaign(cfg, worker_count());
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return usage;
    } catch (const ParseError& e) {
        std::cerr << e.what() << '\n';
        return usage;
    } catch (const Error& e) {
        // a seed that cannot even be built
        std::cerr << e.what() << '\n';
        return solver;
    }
    for (const auto& f : db.failures) std::cerr << f << '\n';
    Sink sink(g, "orbits.jsonl");
    write_orbit_db(*sink.os, db);
    std::cerr << fmt::format("{} orbits, {} seeds failed\n", db.orbits.size(), db.failures.size());
    return db.orbits.empty() ? solver : ok;
}

int cmd_bott(const Global& g, const std::string& db_path, std::optional<int> depth) {
    int M = 8;
    if (depth) M = *depth;
    else if (!g.config.empty()) M = campaign(g).iterates;
    if (M < 1) throw ConfigError("-M must be >= 1");
    std::ifstream in(db_path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot read orbit database '{}'", db_path));
    auto db = read_orbit_db(in);
    Sink sink(g, "bott.jsonl");
    bool mismatch = false;
    for (std::size_t i = 0; i < db.orbits.size(); ++i) {
        BottRow row;
        try {
            row = bott_row(db.orbits[i], int(i), M);
        } catch (const Error& e) {
            std::cerr << fmt::format("orbit {}: {}\n", i, e.what());
            return solver;
        }
        mismatch = mismatch || row.round_trip == "mismatch";
        *sink.os << bott_row_json(row) << '\n';
    }
    return mismatch ? round_trip : ok;
}

ClosedModelPtr ring_model(const Global& g, const std::string& model_name, Coeff coeff) {
    if (!model_name.empty()) {
        if (model_name.find('/') != std::string::npos || model_name.ends_with(".model")) return load_closed_model(model_name, coeff);
        return builtin_model(model_name, coeff);
    }
    if (g.config.empty()) throw ConfigError("ring needs --model or --config");
    return closed_model_for(*make_model(campaign(g).model), coeff);
}

int cmd_ring(const Global& g, const std::string& model_name, int max_t, int max_degree) {
    const Coeff coeff = parse_coeff(g.coeff);
    ClosedModelPtr model;
    try {
        model = ring_model(g, model_name, coeff);
    } catch (const AxiomViolation& e) {
        std::cerr << e.what() << '\n';
        return ring_axiom;
    } catch (const ParseError& e) {
        std::cerr << e.what() << '\n';
        return ring_axiom;
    }
    const auto tables = ring_tables(model, max_t, max_degree, coeff);
    if (g.out.empty()) {
        for (std::size_t k = 0; k < tables.size(); ++k)
            std::cout << (k ? "\n" : "") << "# " << tables[k].name << '\n' << tables[k].to_csv();
        return ok;
    }
    for (const auto& t : tables) {
        Sink sink(g, t.name + ".csv");
        *sink.os << t.to_csv();
    }
    return ok;
}

int cmd_check(const Global& g, const std::string& config_dir, const std::vector<int>& only) {
    AcceptanceOptions opts;
    opts.config_dir = config_dir;
    opts.workers = worker_count();
    opts.only = only;
    Sink sink(g, "acceptance.txt");
    bool all = true;
    run_acceptance(opts, [&](const CriterionResult& r) {
        const auto line = format_result(r);
        *sink.os << line << '\n';
        if (sink.os != &std::cout) std::cout << line << '\n';
        sink.os->flush();
        all = all && r.pass;
    });
    return all ? ok : other;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"closed geodesic finder, Bott iteration reports and level ring tables"};
    app.require_subcommand(1);
    Global g;
    app.add_option("--config", g.config, "campaign config file");
    app.add_option("--out", g.out, "output directory (default: stdout)");
    app.add_option("--seed", g.seed, "override the config seed");
    app.add_option("--coeff", g.coeff, "ring coefficients")->check(CLI::IsMember({"z2", "z"}));

    auto* find = app.add_subcommand("find", "run a solver campaign and write orbits.jsonl");
    find->fallthrough();

    auto* bott = app.add_subcommand("bott", "Bott iteration report for an orbit database");
    bott->fallthrough();
    std::string db_path;
    std::optional<int> depth;
    bott->add_option("db", db_path, "orbit database")->required();
    bott->add_option("-M,--iterates", depth, "iterate depth (default: config iterates, else 8)");

    auto* ring = app.add_subcommand("ring", "level ring CSV tables");
    ring->fallthrough();
    std::string model_name;
    int max_t = 4, max_degree = 12;
    ring->add_option("--model", model_name, "s2, s3, rp2 or a .model file");
    ring->add_option("--max-t", max_t, "largest T power")->check(CLI::PositiveNumber);
    ring->add_option("--max-degree", max_degree, "Betti series up to this degree")->check(CLI::NonNegativeNumber);

    auto* check = app.add_subcommand("check", "run the acceptance suite");
    check->fallthrough();
    std::string config_dir = CLOSEDGEO_CONFIG_DIR;
    std::vector<int> only;
    check->add_option("--configs", config_dir, "directory with the suite campaign configs");
    check->add_option("--only", only, "criterion numbers to run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*find) return cmd_find(g);
        if (*bott) return cmd_bott(g, db_path, depth);
        if (*ring) return cmd_ring(g, model_name, max_t, max_degree);
        if (*check) return cmd_check(g, config_dir, only);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return usage;
    } catch (const ParseError& e) {
        std::cerr << e.what() << '\n';
        return usage;
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return other;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return other;
    }
    return other;
}

}  // namespace closedgeo
