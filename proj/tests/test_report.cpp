#include "closedgeo/cli.hpp"
#include "closedgeo/errors.hpp"
#include "closedgeo/report.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace closedgeo;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("closedgeo_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args) {
    args.insert(args.begin(), "closedgeo");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    CliRun r;
    r.code = run_cli(int(argv.size()), argv.data());
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

CampaignConfig small_sphere_campaign() {
    return campaign_from(parse_key_values("kind = sphere\nseed = 4\nseed_count = 5\nsegments = 32\n"));
}

std::string dump(const OrbitDatabase& db) {
    std::ostringstream ss;
    write_orbit_db(ss, db);
    return ss.str();
}

const std::string kConfigDir = std::string(CLOSEDGEO_SOURCE_DIR) + "/data/configs";

}  // namespace

TEST_CASE("number and field formatting") {
    CHECK(fmt_real(2 * kPi) == "6.28318530718");
    CHECK(fmt_real(1e-13) == "1e-13");
    CHECK(fmt_real(3.0) == "3");
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
    CsvTable t{"t", {"x", "y"}, {{"1", "a,b"}}};
    CHECK(t.to_csv() == "x,y\n1,\"a,b\"\n");
}

TEST_CASE("campaign config") {
    const auto c = campaign_from(parse_key_values("kind = sphere\n"));
    CHECK(c.seeds == "great_circle_grid");
    CHECK(c.segments == 64);
    CHECK(c.iterates == 8);
    auto names_key = [](const std::string& text, const std::string& key) {
        try {
            campaign_from(parse_key_values(text));
        } catch (const ConfigError& e) {
            return std::string(e.what()).find("'" + key + "'") != std::string::npos;
        }
        return false;
    };
    CHECK(names_key("kind = sphere\nsegments = 4\n", "segments"));
    CHECK(names_key("kind = sphere\niterates = 0\n", "iterates"));
    CHECK(names_key("kind = sphere\nseeds = everywhere\n", "seeds"));
    CHECK(names_key("kind = sphere\nseeds = file\n", "seed_file"));
    CHECK(names_key("kind = sphere\nseed_noise = -1\n", "seed_noise"));
    CHECK(names_key("kind = sphere\nseed_cuont = 3\n", "seed_cuont"));
    for (const char* name : {"sphere", "torus", "ellipsoid", "perturbed", "sphere3"})
        CHECK_NOTHROW(load_campaign(kConfigDir + "/" + name + ".cfg"));
}

TEST_CASE("seed strategies") {
    SUBCASE("sphere grid starts with the coordinate great circles") {
        auto cfg = small_sphere_campaign();
        cfg.seed_noise = 0.0;
        const auto m = make_model(cfg.model);
        const auto seeds = make_seeds(cfg, m);
        REQUIRE(seeds.size() == 5);
        // plane (0, 1): third coordinate vanishes on every vertex
        for (int i = 0; i < seeds[0].N(); ++i) CHECK(std::abs(seeds[0].ambient(i)(2)) < 1e-15);
        for (int i = 0; i < seeds[2].N(); ++i) CHECK(std::abs(seeds[2].ambient(i)(0)) < 1e-15);
        for (const auto& s : seeds) CHECK(metrics(s).root_energy == doctest::Approx(2 * kPi).epsilon(1e-12));
    }
    SUBCASE("torus grid walks lattice classes by length") {
        auto cfg = campaign_from(parse_key_values("kind = flat_torus\nperiods = 1, 1.3\nseed_count = 4\nseed_noise = 0\nsegments = 16\n"));
        const auto seeds = make_seeds(cfg, make_model(cfg.model));
        const double want[] = {1.0, 1.3, std::hypot(1.0, 1.3), std::hypot(1.0, 1.3)};
        for (int k = 0; k < 4; ++k) CHECK(metrics(seeds[std::size_t(k)]).length == doctest::Approx(want[k]).epsilon(1e-12));
    }
    SUBCASE("file seeds") {
        const auto dir = fresh_dir("seed_file");
        auto cfg = small_sphere_campaign();
        const auto m = make_model(cfg.model);
        const auto grid = make_seeds(cfg, m);
        write_file(dir / "seeds.txt", loop_to_string(grid[0]) + loop_to_string(grid[3]));
        cfg.seeds = "file";
        cfg.seed_file = (dir / "seeds.txt").string();
        const auto seeds = make_seeds(cfg, m);
        REQUIRE(seeds.size() == 2);
        CHECK(loop_to_string(seeds[1]) == loop_to_string(grid[3]));
    }
}

TEST_CASE("campaigns are deterministic and deduplicated") {
    const auto cfg = small_sphere_campaign();
    const auto one = run_campaign(cfg, 1);
    const auto three = run_campaign(cfg, 3);
    CHECK(dump(one) == dump(three));
    CHECK(one.failures.empty());
    REQUIRE(one.orbits.size() == 5);
    for (const auto& o : one.orbits) {
        CHECK(std::abs(o.length - 2 * kPi) < 1e-10);
        CHECK(o.iterates.at(1).lambda == 1);
    }

    // the same great circle seeded twice, once relabelled
    const auto dir = fresh_dir("dedupe");
    const auto seeds = make_seeds(cfg, one.model);
    write_file(dir / "seeds.txt", loop_to_string(seeds[0]) + loop_to_string(rotate(seeds[0], 5)) + loop_to_string(seeds[1]));
    auto file_cfg = cfg;
    file_cfg.seeds = "file";
    file_cfg.seed_file = (dir / "seeds.txt").string();
    CHECK(run_campaign(file_cfg, 2).orbits.size() == 2);
}

TEST_CASE("torus campaign finds the shortest lattice geodesics") {
    const auto db = run_campaign(load_campaign(kConfigDir + "/torus.cfg"), 1);
    REQUIRE(db.orbits.size() == 2);
    CHECK(std::abs(db.orbits[0].length - 1.0) < 1e-10);
    CHECK(std::abs(db.orbits[1].length - 1.3) < 1e-10);
}

TEST_CASE("orbit database round-trip") {
    const auto db = run_campaign(small_sphere_campaign(), 1);
    const std::string text = dump(db);
    std::istringstream in(text);
    const auto back = read_orbit_db(in);
    CHECK(dump(back) == text);
    REQUIRE(back.orbits.size() == db.orbits.size());
    for (std::size_t k = 0; k < db.orbits.size(); ++k) CHECK(loop_to_string(back.orbits[k].loop) == loop_to_string(db.orbits[k].loop));

    std::string tampered = text;
    tampered.replace(tampered.find("radius=1"), 8, "radius=2");
    std::istringstream t1(tampered);
    CHECK_THROWS_AS(read_orbit_db(t1), ModelMismatch);
    std::istringstream t2(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(read_orbit_db(t2), ParseError);
    std::istringstream t3("");
    CHECK_THROWS_AS(read_orbit_db(t3), ParseError);
}

TEST_CASE("Bott rows") {
    auto db = run_campaign(load_campaign(kConfigDir + "/torus.cfg"), 1);
    const auto row = bott_row(db.orbits[0], 0, 4);
    CHECK(row.round_trip == "exact");
    CHECK(row.lambda == std::vector<int>{0, 0, 0, 0});
    CHECK(row.nu == std::vector<int>{1, 1, 1, 1});
    CHECK(row.omega->kind == "shear");
    CHECK(row.report.all_hold());
    const auto json = bott_row_json(row);
    CHECK(json.find("\"round_trip\":\"exact\"") != std::string::npos);
    CHECK_THROWS_AS(bott_row(db.orbits[0], 0, 0), PreconditionViolated);
}

TEST_CASE("ring tables") {
    const auto tables = ring_tables(builtin_model("s2"), 4, 12, Coeff::z2);
    std::map<std::string, CsvTable> by;
    for (const auto& t : tables) by[t.name] = t;
    REQUIRE(by.count("betti"));
    CHECK(by["betti"].to_csv().starts_with("degree,betti\n0,1\n1,1\n2,2\n3,2\n4,2\n"));
    CHECK(by["betti"].rows.size() == 13);
    for (const auto& r : by["eliashberg"].rows) CHECK(r.back() == "yes");
    CHECK(by["eliashberg"].rows.size() == 6);
    // Phi(f T) = Theta has degree lambda_1 + 2n - 1
    bool seen = false;
    for (const auto& r : by["phi_degrees"].rows)
        if (r[0] == "f" && r[2] == "1") {
            seen = true;
            CHECK(r[3] == "4");
            CHECK(r[4] == "1*ell");
        }
    CHECK(seen);

    // lowest cohomology generator degree on S^3 against the Hessian index of a great circle
    const auto s3 = ring_tables(builtin_model("s3"), 2, 8, Coeff::z2);
    int lowest = 1 << 20;
    for (const auto& t : s3)
        if (t.name == "psi_degrees")
            for (const auto& r : t.rows)
                if (r[2] == "1") lowest = std::min(lowest, std::stoi(r[3]));
    auto cfg = load_campaign(kConfigDir + "/sphere3.cfg");
    auto db = run_campaign(cfg, 1);
    REQUIRE_FALSE(db.orbits.empty());
    CHECK(lowest == hessian_index(db.orbits[0], 1).lambda);
    CHECK(lowest == 2);
}

TEST_CASE("command line") {
    const auto dir = fresh_dir("cli");
    const std::string sphere = kConfigDir + "/sphere.cfg";

    SUBCASE("bad config exits 2 and names the key") {
        write_file(dir / "bad.cfg", "kind = sphere\nradious = 2\n");
        const auto r = cli({"--config", (dir / "bad.cfg").string(), "find"});
        CHECK(r.code == 2);
        CHECK(r.err.find("radious") != std::string::npos);
        CHECK(cli({"find"}).code == 2);
        CHECK(cli({"frobnicate"}).code == 2);
    }
    SUBCASE("find is byte-deterministic across worker counts") {
        setenv("CLOSEDGEO_WORKERS", "1", 1);
        CHECK(cli({"--config", sphere, "--out", (dir / "a").string(), "find"}).code == 0);
        setenv("CLOSEDGEO_WORKERS", "3", 1);
        CHECK(cli({"--config", sphere, "--out", (dir / "b").string(), "find"}).code == 0);
        unsetenv("CLOSEDGEO_WORKERS");
        const auto a = slurp(dir / "a" / "orbits.jsonl");
        CHECK(!a.empty());
        CHECK(a == slurp(dir / "b" / "orbits.jsonl"));
        CHECK(cli({"--config", sphere, "--seed", "9", "--out", (dir / "c").string(), "find"}).code == 0);
        CHECK(slurp(dir / "c" / "orbits.jsonl") != a);

        const auto b = cli({"--out", (dir / "a").string(), "bott", (dir / "a" / "orbits.jsonl").string(), "-M", "4"});
        CHECK(b.code == 0);
        const auto report = slurp(dir / "a" / "bott.jsonl");
        CHECK(report.find("\"lambda\":[1,3,5,7]") != std::string::npos);
        CHECK(report.find("\"round_trip\":\"mismatch\"") == std::string::npos);
    }
    SUBCASE("no orbit exits 3") {
        const auto m = make_sphere(2);
        std::vector<Vec> small;
        for (int i = 0; i < 16; ++i) {
            Vec x(3);
            x << 0.05 * std::cos(2 * kPi * i / 16), 0.05 * std::sin(2 * kPi * i / 16), 1.0;
            small.push_back(x.normalized());
        }
        write_file(dir / "small.txt", loop_to_string(DiscreteLoop::from_ambient(m, small)));
        write_file(dir / "collapse.cfg", "kind = sphere\nseeds = file\nseed_file = " + (dir / "small.txt").string() + "\n");
        const auto r = cli({"--config", (dir / "collapse.cfg").string(), "--out", (dir / "x").string(), "find"});
        CHECK(r.code == 3);
        CHECK(r.err.find("seed 0: CollapsedToConstant") != std::string::npos);
    }
    SUBCASE("empty database gives an empty report") {
        OrbitDatabase db;
        db.model = make_sphere(2);
        write_file(dir / "empty.jsonl", dump(db));
        const auto r = cli({"--out", (dir / "e").string(), "bott", (dir / "empty.jsonl").string()});
        CHECK(r.code == 0);
        CHECK(slurp(dir / "e" / "bott.jsonl").empty());
        CHECK(cli({"bott", (dir / "missing.jsonl").string()}).code == 2);
    }
    SUBCASE("ring tables and ring data errors") {
        const auto r = cli({"--out", (dir / "ring").string(), "ring", "--model", "s2", "--max-t", "3"});
        CHECK(r.code == 0);
        CHECK(slurp(dir / "ring" / "betti.csv").starts_with("degree,betti\n0,1\n1,1\n2,2\n"));
        CHECK(fs::exists(dir / "ring" / "products.csv"));
        CHECK(cli({"--config", sphere, "ring"}).code == 0);

        write_file(dir / "broken.ring", "name: broken\ncoeff: z2\nshift: 0\nbasis: a 0\nbasis: b 0\n"
                                        "product: a a -> b:1\nproduct: a b -> a:1\nproduct: b a -> a:1\n");
        write_file(dir / "broken.model", "name: broken\ndim: 2\nlambda1: 1\nell: 1\nbase_betti: 1 0 1\n"
                                         "homology: broken.ring\ncohomology: broken.ring\norientable: yes\n");
        CHECK(cli({"ring", "--model", (dir / "broken.model").string()}).code == 5);
        write_file(dir / "garbled.ring", "name: g\ncoeff: z7\n");
        write_file(dir / "garbled.model", "name: g\ndim: 2\nlambda1: 1\nell: 1\nbase_betti: 1 0 1\n"
                                          "homology: garbled.ring\ncohomology: garbled.ring\norientable: yes\n");
        CHECK(cli({"ring", "--model", (dir / "garbled.model").string()}).code == 5);
        CHECK(cli({"--coeff", "z3", "ring", "--model", "s2"}).code == 2);
        // not every geodesic of an ellipsoid is closed
        CHECK(cli({"--config", kConfigDir + "/ellipsoid.cfg", "ring"}).code == 1);
    }
    SUBCASE("check runs selected criteria") {
        const auto r = cli({"--out", (dir / "acc").string(), "check", "--only", "8", "11"});
        CHECK(r.code == 0);
        const auto text = slurp(dir / "acc" / "acceptance.txt");
        CHECK(text.starts_with("PASS criterion  8"));
        CHECK(text.find("PASS criterion 11") != std::string::npos);
    }
}
