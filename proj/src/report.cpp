#include "closedgeo/report.hpp"

#include "closedgeo/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace closedgeo {

using Json = nlohmann::ordered_json;

namespace {

constexpr double kPi = std::numbers::pi;

// doubles go through the 12-digit text form so dumps carry at most 12 digits
double r12(double x) { return std::strtod(fmt_real(x).c_str(), nullptr); }

Json reals(const std::vector<double>& xs) {
    Json a = Json::array();
    for (double x : xs) a.push_back(r12(x));
    return a;
}

int parse_int_key(const KeyValue& kv, int lo) {
    char* end = nullptr;
    const long v = std::strtol(kv.value.c_str(), &end, 10);
    if (kv.value.empty() || *end != '\0' || v < lo)
        throw ConfigError(fmt::format("key '{}' (line {}): expected an integer >= {}, got '{}'", kv.key, kv.line, lo, kv.value));
    return int(v);
}

bool sphere_like(ModelKind k) { return k != ModelKind::flat_torus; }

Vec random_unit(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> g;
    Vec v(dim);
    for (int k = 0; k < dim; ++k) v(k) = g(rng);
    return v.normalized();
}

DiscreteLoop circle_seed(const ModelPtr& model, const Vec& u, const Vec& v, int N, double noise, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<Vec> pts;
    for (int i = 0; i < N; ++i) {
        const double t = 2 * kPi * i / N;
        Vec b = std::cos(t) * u + std::sin(t) * v;
        for (int k = 0; k < b.size(); ++k) b(k) += noise * g(rng);
        pts.push_back(model->embed_unit_sphere(b.normalized()));
    }
    return DiscreteLoop::from_ambient(model, pts);
}

DiscreteLoop line_seed(const ModelPtr& model, const std::vector<int>& cls, int N, double noise, std::mt19937_64& rng) {
    const auto& P = model->config().periods;
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec base(int(P.size()));
    for (std::size_t k = 0; k < P.size(); ++k) base(int(k)) = unif(rng) * P[k];
    std::vector<Vec> pts;
    for (int i = 0; i < N; ++i) {
        Vec x = base;
        for (std::size_t k = 0; k < P.size(); ++k) x(int(k)) += double(i) / N * cls[k] * P[k] + noise * P[k] * g(rng);
        pts.push_back(x);
    }
    return DiscreteLoop::from_ambient(model, pts);
}

// primitive integer vectors with entries in [-3, 3], first nonzero entry positive,
// ordered by the length of the translation they represent
std::vector<std::vector<int>> lattice_classes(const std::vector<double>& P) {
    const int d = int(P.size());
    std::vector<std::vector<int>> out;
    std::vector<int> c(std::size_t(d), -3);
    while (true) {
        int g = 0;
        for (int x : c) g = std::gcd(g, std::abs(x));
        const auto first = std::find_if(c.begin(), c.end(), [](int x) { return x != 0; });
        if (g == 1 && first != c.end() && *first > 0) out.push_back(c);
        int k = 0;
        while (k < d && ++c[std::size_t(k)] > 3) c[std::size_t(k++)] = -3;
        if (k == d) break;
    }
    auto len = [&](const std::vector<int>& v) {
        double s = 0;
        for (int k = 0; k < d; ++k) s += std::pow(v[std::size_t(k)] * P[std::size_t(k)], 2);
        return s;
    };
    std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
        const double la = len(a), lb = len(b);
        if (std::abs(la - lb) > 1e-12 * std::max(la, lb)) return la < lb;
        return a > b;
    });
    return out;
}

bool same_orbit(const CriticalOrbit& a, const CriticalOrbit& b) {
    if (a.multiplicity != b.multiplicity) return false;
    if (std::abs(a.length - b.length) > 1e-7 * std::max(a.length, b.length)) return false;
    const auto& m = *a.loop.model();
    const double reach = 0.5 * b.length / b.loop.N() * (1 + 1e-6) + 1e-8;
    for (int i = 0; i < a.loop.N(); ++i) {
        const Vec p = a.loop.ambient(i);
        double best = 1e300;
        for (int j = 0; j < b.loop.N(); ++j) best = std::min(best, m.distance_lower_bound(p, b.loop.ambient(j)));
        if (best > reach) return false;
    }
    return true;
}

std::string hexf(double x) { return fmt::format("{:a}", x); }

double parse_hexf(const std::string& s, int line) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw ParseError(fmt::format("orbit db line {}: bad coordinate '{}'", line, s));
    return v;
}

Json omega_json(const OmegaIndex& w) {
    Json j;
    j["kind"] = w.kind;
    j["excluded"] = w.excluded;
    j["breaks"] = reals(w.breaks);
    j["point_values"] = w.point_values;
    j["arc_values"] = w.arc_values;
    j["nullity"] = w.nullity;
    return j;
}

}  // namespace

std::string fmt_real(double x) { return fmt::format("{:.12g}", x); }

std::string csv_field(const std::string& s) {
    const bool quote = s.find_first_of(",\"\r\n") != std::string::npos || (!s.empty() && (s.front() == ' ' || s.back() == ' '));
    if (!quote) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

CampaignConfig campaign_from(const KeyValues& kv) {
    static const std::vector<std::string> extra = {"seeds", "seed_count", "segments", "iterates", "seed_noise", "seed_file"};
    CampaignConfig c;
    c.model = model_config_from(kv, extra);
    for (const auto& e : kv) {
        if (e.key == "seeds") {
            if (e.value != "great_circle_grid" && e.value != "random" && e.value != "file")
                throw ConfigError(fmt::format("key 'seeds' (line {}): expected great_circle_grid, random or file", e.line));
            c.seeds = e.value;
        } else if (e.key == "seed_count") c.seed_count = parse_int_key(e, 1);
        else if (e.key == "segments") c.segments = parse_int_key(e, 8);
        else if (e.key == "iterates") c.iterates = parse_int_key(e, 1);
        else if (e.key == "seed_noise") {
            char* end = nullptr;
            c.seed_noise = std::strtod(e.value.c_str(), &end);
            if (e.value.empty() || *end != '\0' || !(c.seed_noise >= 0))
                throw ConfigError(fmt::format("key 'seed_noise' (line {}): expected a nonnegative number", e.line));
        } else if (e.key == "seed_file") c.seed_file = e.value;
    }
    if (c.seeds == "file" && c.seed_file.empty()) throw ConfigError("key 'seed_file': missing for seeds = file");
    return c;
}

CampaignConfig load_campaign(const std::string& path) { return campaign_from(parse_key_values(read_text_file(path))); }

std::vector<DiscreteLoop> make_seeds(const CampaignConfig& cfg, const ModelPtr& model) {
    std::vector<DiscreteLoop> seeds;
    std::mt19937_64 rng(cfg.model.seed);
    if (cfg.seeds == "file") {
        std::istringstream in(read_text_file(cfg.seed_file));
        while (in >> std::ws && in.peek() != EOF) seeds.push_back(read_loop(in, model));
        return seeds;
    }
    const int N = cfg.segments;
    if (sphere_like(model->kind())) {
        const int d = model->ambient_dim();
        std::vector<std::pair<int, int>> planes;
        if (cfg.seeds == "great_circle_grid")
            for (int a = 0; a < d; ++a)
                for (int b = a + 1; b < d; ++b) planes.push_back({a, b});
        for (int s = 0; s < cfg.seed_count; ++s) {
            Vec u = Vec::Zero(d), v = Vec::Zero(d);
            if (s < int(planes.size())) {
                u(planes[std::size_t(s)].first) = 1;
                v(planes[std::size_t(s)].second) = 1;
            } else {
                u = random_unit(rng, d);
                v = random_unit(rng, d);
                v = (v - v.dot(u) * u).normalized();
            }
            seeds.push_back(circle_seed(model, u, v, N, cfg.seed_noise, rng));
        }
    } else {
        const auto& P = model->config().periods;
        const auto classes = lattice_classes(P);
        std::uniform_int_distribution<std::size_t> pick(0, classes.size() - 1);
        for (int s = 0; s < cfg.seed_count; ++s) {
            const auto& cls = cfg.seeds == "random" ? classes[pick(rng)] : classes[std::size_t(s) % classes.size()];
            seeds.push_back(line_seed(model, cls, N, cfg.seed_noise, rng));
        }
    }
    return seeds;
}

int worker_count() {
    if (const char* env = std::getenv("CLOSEDGEO_WORKERS")) {
        char* end = nullptr;
        const long w = std::strtol(env, &end, 10);
        if (*env && *end == '\0' && w >= 1) return int(w);
        throw ConfigError(fmt::format("CLOSEDGEO_WORKERS: expected a positive integer, got '{}'", env));
    }
    return int(std::max(1u, std::thread::hardware_concurrency()));
}

OrbitDatabase run_campaign(const CampaignConfig& cfg, int workers) {
    OrbitDatabase db;
    db.model = make_model(cfg.model);
    const auto seeds = make_seeds(cfg, db.model);
    std::vector<std::optional<CriticalOrbit>> found(seeds.size());
    std::vector<std::string> failed(seeds.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < seeds.size(); k = next++) {
            try {
                CriticalOrbit o = find_critical(seeds[k]);
                hessian_index(o, 1);
                found[k] = std::move(o);
            } catch (const Error& e) {
                failed[k] = fmt::format("seed {}: {}", k, e.what());
            }
        }
    };
    const int nt = std::max(1, std::min<int>(workers, int(seeds.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    std::vector<CriticalOrbit> all;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        if (found[k]) all.push_back(std::move(*found[k]));
        if (!failed[k].empty()) db.failures.push_back(failed[k]);
    }
    std::stable_sort(all.begin(), all.end(), orbit_less);
    for (auto& o : all)
        if (std::none_of(db.orbits.begin(), db.orbits.end(), [&](const CriticalOrbit& q) { return same_orbit(o, q); }))
            db.orbits.push_back(std::move(o));
    return db;
}

void write_orbit_db(std::ostream& out, const OrbitDatabase& db) {
    Json h;
    h["type"] = "closedgeo-orbits";
    h["version"] = 1;
    h["model"] = db.model->config().canonical();
    h["model_hash"] = db.model->hash_hex();
    h["orbits"] = db.orbits.size();
    h["failures"] = db.failures;
    out << h.dump() << '\n';
    for (std::size_t i = 0; i < db.orbits.size(); ++i) {
        const auto& o = db.orbits[i];
        Json j;
        j["type"] = "orbit";
        j["index"] = i;
        j["length"] = r12(o.length);
        j["N"] = o.loop.N();
        j["prime"] = o.prime;
        j["multiplicity"] = o.multiplicity;
        if (o.iterates.count(1)) {
            j["lambda1"] = o.iterates.at(1).lambda;
            j["nu1"] = o.iterates.at(1).nu;
        }
        j["gradient_norm"] = r12(o.convergence.gradient_norm);
        Json verts = Json::array();
        for (int k = 0; k < o.loop.N(); ++k) {
            const Point& p = o.loop.vertex(k);
            Json v = Json::array({p.chart});
            for (int c = 0; c < p.coords.size(); ++c) v.push_back(hexf(p.coords(c)));
            verts.push_back(v);
        }
        j["vertices"] = verts;
        out << j.dump() << '\n';
    }
}

OrbitDatabase read_orbit_db(std::istream& in) {
    OrbitDatabase db;
    std::string line;
    int line_no = 0;
    std::size_t expected = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(fmt::format("orbit db line {}: {}", line_no, e.what()));
        }
        try {
            if (!db.model) {
                if (j.value("type", "") != "closedgeo-orbits") throw ParseError(fmt::format("orbit db line {}: missing header", line_no));
                db.model = make_model(model_config_from_canonical(j.at("model").get<std::string>()));
                if (db.model->hash_hex() != j.at("model_hash").get<std::string>())
                    throw ModelMismatch(fmt::format("orbit db line {}: model hash does not match the model string", line_no));
                expected = j.at("orbits").get<std::size_t>();
                db.failures = j.value("failures", std::vector<std::string>{});
                continue;
            }
            if (j.value("type", "") != "orbit") throw ParseError(fmt::format("orbit db line {}: expected an orbit record", line_no));
            std::vector<Point> pts;
            for (const auto& v : j.at("vertices")) {
                Point p;
                p.chart = v.at(0).get<int>();
                p.coords.resize(int(v.size()) - 1);
                for (std::size_t c = 1; c < v.size(); ++c) p.coords(int(c - 1)) = parse_hexf(v.at(c).get<std::string>(), line_no);
                if (p.coords.size() != db.model->dim())
                    throw ParseError(fmt::format("orbit db line {}: vertex has {} coordinates", line_no, p.coords.size()));
                pts.push_back(p);
            }
            CriticalOrbit o{DiscreteLoop(db.model, pts), j.at("length").get<double>(), j.at("prime").get<bool>(),
                            j.at("multiplicity").get<int>(), {}, std::nullopt, {}, false, {}};
            o.convergence.gradient_norm = j.value("gradient_norm", 0.0);
            if (j.contains("lambda1")) {
                IndexResult r1;
                r1.lambda = j.at("lambda1").get<int>();
                r1.nu = j.at("nu1").get<int>();
                r1.N = o.loop.N();
                o.iterates[1] = r1;
            }
            db.orbits.push_back(std::move(o));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(fmt::format("orbit db line {}: {}", line_no, e.what()));
        }
    }
    if (!db.model) throw ParseError("orbit db: empty file");
    if (db.orbits.size() != expected)
        throw ParseError(fmt::format("orbit db: header announces {} orbits, found {}", expected, db.orbits.size()));
    return db;
}

BottRow bott_row(CriticalOrbit& orbit, int index, int M) {
    if (M < 1) throw PreconditionViolated(fmt::format("iterate depth must be >= 1, got {}", M));
    BottRow row;
    row.orbit = index;
    row.length = orbit.length;
    row.M = M;
    const int n = orbit.loop.model()->dim();
    for (int m = 1; m <= M; ++m) {
        const IndexResult r = hessian_index(orbit, m);
        row.lambda.push_back(r.lambda);
        row.nu.push_back(r.nu);
        row.segments.push_back(r.N);
    }
    try {
        const Eigen::MatrixXd P = poincare_map(orbit);
        row.omega = omega_from_poincare(P, row.lambda[0], n);
    } catch (const EigenvalueOnGridAmbiguous& e) {
        row.note = e.what();
    } catch (const PreconditionViolated& e) {
        row.note = e.what();
    }
    if (!row.omega) {
        row.round_trip = "undecided";
    } else {
        for (int m = 1; m <= M; ++m) {
            row.bott.push_back(bott_sum(*row.omega, m));
            row.upsilon.push_back(upsilon_sum(*row.omega, m));
        }
        if (row.omega->excluded) {
            row.round_trip = "excluded";
        } else {
            bool ok = true;
            for (int m = 0; m < M; ++m)
                ok = ok && row.bott[std::size_t(m)] == row.lambda[std::size_t(m)] &&
                     row.upsilon[std::size_t(m)] == row.lambda[std::size_t(m)] + row.nu[std::size_t(m)];
            row.round_trip = ok ? "exact" : "mismatch";
        }
    }
    const bool exact = row.round_trip == "exact";
    row.report = check_iteration(row.lambda, row.nu, n, exact ? &*row.omega : nullptr);
    return row;
}

std::string bott_row_json(const BottRow& row) {
    Json j;
    j["type"] = "bott";
    j["orbit"] = row.orbit;
    j["length"] = r12(row.length);
    j["M"] = row.M;
    j["lambda"] = row.lambda;
    j["nu"] = row.nu;
    j["segments"] = row.segments;
    j["omega"] = row.omega ? omega_json(*row.omega) : Json(nullptr);
    j["bott"] = row.bott;
    j["upsilon"] = row.upsilon;
    j["round_trip"] = row.round_trip;
    if (!row.note.empty()) j["note"] = row.note;
    const auto& r = row.report;
    j["lambda_av"] = r12(r.lambda_av);
    j["lambda_av_error"] = r12(r.lambda_av_error);
    j["lambda_av_exact"] = r.lambda_av_exact;
    j["lambda_av_richardson"] = r12(r.lambda_av_richardson);
    std::vector<int> at_min, at_max;
    for (std::size_t m = 0; m < r.at_min.size(); ++m) {
        at_min.push_back(r.at_min[m]);
        at_max.push_back(r.at_max[m]);
    }
    j["at_min"] = at_min;
    j["at_max"] = at_max;
    j["inequalities_hold"] = r.all_hold();
    j["violations"] = r.violations();
    return j.dump();
}

std::string CsvTable::to_csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i]);
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

std::vector<CsvTable> ring_tables(const ClosedModelPtr& model, int max_t, int max_degree, Coeff coeff) {
    if (max_t < 1) throw PreconditionViolated("max T power must be >= 1");
    std::vector<CsvTable> out;
    auto s = [](long v) { return std::to_string(v); };
    for (const bool hom : {true, false}) {
        const GradedRing& R = hom ? model->homology : model->cohomology;
        CsvTable t{hom ? "phi_degrees" : "psi_degrees", {"element", "element_degree", "m", "degree", "level"}, {}};
        for (int a = 0; a < R.size(); ++a)
            for (int m = 1; m <= max_t; ++m) {
                const auto c = hom ? phi_iso(model, R.element(a), m) : psi_iso(model, R.element(a), m);
                t.rows.push_back({R.basis[std::size_t(a)].name, s(R.basis[std::size_t(a)].degree), s(m), s(c.degree), c.level.format()});
            }
        out.push_back(std::move(t));
    }
    CsvTable betti{"betti", {"degree", "betti"}, {}};
    const auto b = betti_series(*model, max_degree, coeff);
    for (std::size_t k = 0; k < b.size(); ++k) betti.rows.push_back({s(long(k)), s(b[k])});
    out.push_back(std::move(betti));

    CsvTable prod{"products", {"variant", "x", "y", "degree", "level", "payload"}, {}};
    for (const bool hom : {true, false}) {
        const GradedRing& R = hom ? model->homology : model->cohomology;
        for (int a = 0; a < R.size(); ++a)
            for (int c = 0; c < R.size(); ++c)
                for (int i = 1; i < max_t; ++i)
                    for (int j = 1; i + j <= max_t; ++j) {
                        const auto x = hom ? phi_iso(model, R.element(a), i) : psi_iso(model, R.element(a), i);
                        const auto y = hom ? phi_iso(model, R.element(c), j) : psi_iso(model, R.element(c), j);
                        const auto z = hom ? cs_product(x, y) : co_product(x, y);
                        const std::string payload = R.is_zero(z.payload->element)
                                                        ? "0"
                                                        : fmt::format("({}) T^{}", R.format(z.payload->element), z.payload->t_power);
                        prod.rows.push_back({to_string(x.variant), x.label, y.label, s(z.degree), z.level.format(), payload});
                    }
    }
    out.push_back(std::move(prod));

    CsvTable el{"eliashberg", {"r1", "r2", "d_r1", "d_r2", "d_sum", "bound", "holds"}, {}};
    for (const auto& row : eliashberg_check(*model, std::max(2, max_t)))
        el.rows.push_back({s(row.r1), s(row.r2), s(level_degree(*model, row.r1)), s(level_degree(*model, row.r2)), s(row.d_sum),
                           s(row.bound), row.holds ? "yes" : "no"});
    out.push_back(std::move(el));
    return out;
}

}  // namespace closedgeo
