#include "closedgeo/level_ring.hpp"

#include "closedgeo/bott.hpp"
#include "closedgeo/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <sstream>

#ifndef CLOSEDGEO_RING_DIR
#define CLOSEDGEO_RING_DIR "data/rings"
#endif

namespace closedgeo {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

GradedRing ring_in(const GradedRing& r, Coeff coeff, const std::string& model) {
    if (r.coeff == coeff) return r;
    if (coeff == Coeff::z2) return r.reduce_mod2();
    throw PreconditionViolated(fmt::format("model '{}': ring {} is stored over Z/2 only", model, r.name));
}

void same_setting(const LevelClass& x, const LevelClass& y, Variant want, const char* op) {
    if (x.variant != want || y.variant != want)
        throw VariantMismatch(fmt::format("{} needs two {} classes", op, to_string(want)));
    if (x.n != y.n) throw ModelMismatch(fmt::format("{} of classes on manifolds of dimension {} and {}", op, x.n, y.n));
    if (x.model != y.model && !(x.model && y.model && x.model->name == y.model->name))
        throw ModelMismatch(fmt::format("{} of classes from different models", op));
}

LevelClass combine(const LevelClass& x, const LevelClass& y, int degree, const GradedRing* ring) {
    LevelClass z;
    z.variant = x.variant;
    z.n = x.n;
    z.degree = degree;
    z.level = x.level + y.level;
    if (x.filtration && y.filtration) z.filtration = *x.filtration + *y.filtration;
    z.model = x.model ? x.model : y.model;
    if (x.payload && y.payload) {
        if (!ring) throw PreconditionViolated("payload product needs a ring model");
        z.payload = Payload{ring->product(x.payload->element, y.payload->element), x.payload->t_power + y.payload->t_power};
    }
    z.label = fmt::format("({})({})", x.label, y.label);
    return z;
}

LevelClass iso_class(const ClosedModelPtr& model, const GradedRing& ring, Variant v, const GradedRing::Element& a, int m,
                     const char* what) {
    if (m < 1) throw PreconditionViolated(fmt::format("{} needs m >= 1, got {}", what, m));
    if (int(a.size()) != ring.size()) throw PreconditionViolated(fmt::format("{}: element has the wrong size", what));
    const auto d = ring.degree_of(ring.normalize(a));
    if (!d) throw PreconditionViolated(fmt::format("{} needs a nonzero homogeneous element", what));
    LevelClass c;
    c.variant = v;
    c.n = model->n;
    c.degree = *d + model->lambda1 + (m - 1) * model->b();
    c.level = Level::multiple(m);
    c.filtration = m;
    c.payload = Payload{ring.normalize(a), m};
    c.model = model;
    c.label = fmt::format("{}({} T^{})", what, ring.format(a), m);
    return c;
}

}  // namespace

std::string ring_data_dir() {
    if (const char* env = std::getenv("CLOSEDGEO_DATA_DIR")) return env;
    return CLOSEDGEO_RING_DIR;
}

ClosedModelPtr load_closed_model(const std::string& path, Coeff coeff) {
    auto m = std::make_shared<ClosedGeodesicModel>();
    const std::string text = read_text_file(path);
    const std::filesystem::path dir = std::filesystem::path(path).parent_path();
    std::istringstream in(text);
    std::string raw, hom, coh;
    int line_no = 0;
    bool have_dim = false, have_lambda = false, have_ell = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto colon = line.find(':');
        const std::string where = fmt::format("{}:{}", path, line_no);
        if (colon == std::string::npos) throw ParseError(fmt::format("{}: expected 'key: value'", where));
        const std::string key = trim(line.substr(0, colon)), value = trim(line.substr(colon + 1));
        try {
            if (key == "name") m->name = value;
            else if (key == "dim") m->n = std::stoi(value), have_dim = true;
            else if (key == "lambda1") m->lambda1 = std::stoi(value), have_lambda = true;
            else if (key == "ell") m->ell = std::stod(value), have_ell = true;
            else if (key == "base_betti") {
                std::istringstream f(value);
                int b;
                while (f >> b) m->base_betti.push_back(b);
            } else if (key == "homology") hom = value;
            else if (key == "cohomology") coh = value;
            else if (key == "orientable") m->orientable = value == "yes" || value == "true";
            else throw ParseError(fmt::format("{}: unknown key '{}'", where, key));
        } catch (const std::logic_error&) {
            throw ParseError(fmt::format("{}: bad value '{}' for '{}'", where, value, key));
        }
    }
    if (!have_dim || !have_lambda || !have_ell || hom.empty() || coh.empty())
        throw ParseError(fmt::format("{}: model needs dim, lambda1, ell, homology and cohomology", path));
    if (m->n < 1 || m->ell <= 0) throw ParseError(fmt::format("{}: dim and ell must be positive", path));
    if (int(m->base_betti.size()) != m->n + 1)
        throw ParseError(fmt::format("{}: base_betti needs {} entries", path, m->n + 1));
    if (coeff == Coeff::z && !m->orientable)
        throw PreconditionViolated(fmt::format("model '{}' is not declared orientable; use Z/2", m->name));
    m->homology = ring_in(load_ring((dir / hom).string()), coeff, m->name);
    m->cohomology = ring_in(load_ring((dir / coh).string()), coeff, m->name);
    const int d = 2 * m->n - 1;
    if (m->homology.shift != -d || m->cohomology.shift != 0 || m->homology.top_degree() > d ||
        m->cohomology.top_degree() > d)
        throw AxiomViolation(fmt::format("model '{}': rings do not fit a {}-dimensional unit sphere bundle", m->name, d));
    return m;
}

ClosedModelPtr builtin_model(const std::string& name, Coeff coeff) {
    const auto path = std::filesystem::path(ring_data_dir()) / (name + ".model");
    if (!std::filesystem::exists(path)) throw ConfigError(fmt::format("no built-in model '{}' in {}", name, ring_data_dir()));
    return load_closed_model(path.string(), coeff);
}

ClosedModelPtr closed_model_for(const ManifoldModel& m, Coeff coeff) {
    const auto& c = m.config();
    if (!m.all_geodesics_closed() || c.kind != ModelKind::sphere || (c.dim != 2 && c.dim != 3))
        throw NotAllGeodesicsClosed(fmt::format("{} model in dimension {} has no closed-geodesic ring data",
                                                to_string(c.kind), c.dim));
    auto base = builtin_model(c.dim == 2 ? "s2" : "s3", coeff);
    auto scaled = std::make_shared<ClosedGeodesicModel>(*base);
    scaled->ell = 2 * std::numbers::pi * c.radius;
    return scaled;
}

std::string to_string(Variant v) { return v == Variant::homology ? "homology" : "cohomology"; }

Level Level::operator+(const Level& o) const {
    if (symbolic != o.symbolic) throw PreconditionViolated("cannot add a symbolic level to a numeric one");
    if (symbolic) return Level{true, units + o.units, 0.0};
    return Level::value(real + o.real);
}

bool Level::operator==(const Level& o) const {
    return symbolic == o.symbolic && (symbolic ? units == o.units : real == o.real);
}

bool Level::operator<=(const Level& o) const {
    if (symbolic != o.symbolic) throw PreconditionViolated("cannot compare a symbolic level with a numeric one");
    return symbolic ? units <= o.units : real <= o.real;
}

double Level::numeric(double ell) const {
    return symbolic ? boost::rational_cast<double>(units) * ell : real;
}

std::string Level::format() const {
    if (!symbolic) return fmt::format("{:.12g}", real);
    if (units.denominator() == 1) return fmt::format("{}*ell", units.numerator());
    return fmt::format("{}/{}*ell", units.numerator(), units.denominator());
}

LevelClass cs_product(const LevelClass& x, const LevelClass& y) {
    same_setting(x, y, Variant::homology, "cs_product");
    const GradedRing* ring = x.model ? &x.model->homology : nullptr;
    return combine(x, y, x.degree + y.degree - x.n, ring);
}

LevelClass co_product(const LevelClass& x, const LevelClass& y) {
    same_setting(x, y, Variant::cohomology, "co_product");
    const GradedRing* ring = x.model ? &x.model->cohomology : nullptr;
    return combine(x, y, x.degree + y.degree + x.n - 1, ring);
}

LevelClass power(const LevelClass& x, int m) {
    if (m < 1) throw PreconditionViolated(fmt::format("power needs m >= 1, got {}", m));
    LevelClass p = x;
    for (int k = 2; k <= m; ++k) p = x.variant == Variant::homology ? cs_product(p, x) : co_product(p, x);
    return p;
}

LevelClass phi_iso(const ClosedModelPtr& model, const GradedRing::Element& a, int m) {
    return iso_class(model, model->homology, Variant::homology, a, m, "Phi");
}

LevelClass psi_iso(const ClosedModelPtr& model, const GradedRing::Element& a, int m) {
    return iso_class(model, model->cohomology, Variant::cohomology, a, m, "Psi");
}

LevelClass theta_class(const ClosedModelPtr& model) {
    const auto& R = model->homology;
    if (!R.unit) throw PreconditionViolated("homology ring has no fundamental class");
    LevelClass c = phi_iso(model, R.element(*R.unit), 1);
    c.label = "Theta";
    return c;
}

LevelClass omega_class(const ClosedModelPtr& model) {
    const auto& R = model->cohomology;
    if (!R.unit) throw PreconditionViolated("cohomology ring has no unit");
    LevelClass c = psi_iso(model, R.element(*R.unit), 1);
    c.label = "Omega";
    return c;
}

std::vector<long> betti_series(const ClosedGeodesicModel& model, int max_degree, Coeff coeff) {
    if (coeff == Coeff::z && (!model.orientable || model.homology.coeff != Coeff::z))
        throw PreconditionViolated(fmt::format("model '{}' has no Z ring data", model.name));
    std::vector<long> out;
    if (max_degree < 0) return out;
    const std::vector<int> sm = model.homology.betti();
    if (model.b() < 1) throw PreconditionViolated("index growth must be positive");
    for (int k = 0; k <= max_degree; ++k) {
        long bk = k < int(model.base_betti.size()) ? model.base_betti[std::size_t(k)] : 0;
        for (int r = 1; model.lambda(r) <= k; ++r) {
            const int j = k - model.lambda(r);
            if (j < int(sm.size())) bk += sm[std::size_t(j)];
        }
        out.push_back(bk);
    }
    return out;
}

long betti_number(const ClosedGeodesicModel& model, int k, Coeff coeff) {
    if (k < 0) return 0;
    return betti_series(model, k, coeff).back();
}

NondegenerateTable nondegenerate_table(const std::vector<int>& lambda, int n, int lambda1, int r) {
    if (r < 2) throw PreconditionViolated(fmt::format("nondegenerate_table needs r >= 2, got {}", r));
    if (lambda.empty() || lambda[0] != lambda1)
        throw PreconditionViolated("lambda sequence must start with lambda_1");
    if (int(lambda.size()) < r * n)
        throw InsufficientSequence(fmt::format("need lambda_m for m <= {}, got {}", r * n, lambda.size()));
    auto at = [&](int m) { return lambda[std::size_t(m - 1)]; };
    const int lr = at(r);
    const bool r_min = lr == growth_bounds(lambda1, n, r).min;
    const bool r_max = lr == growth_bounds(lambda1, n, r).max;
    const bool n_min = at(n) == growth_bounds(lambda1, n, n).min;
    const bool rn_max = at(r * n) == growth_bounds(lambda1, n, r * n).max;
    const bool parity_even = (n - lambda1) % 2 == 0;

    auto local = [&](Variant v, int degree, const char* label) {
        LevelClass c;
        c.variant = v;
        c.n = n;
        c.degree = degree;
        c.level = Level::multiple(1);
        c.filtration = 1;
        c.label = label;
        return c;
    };
    const LevelClass sigma = local(Variant::homology, lambda1, "sigma_1");
    const LevelClass sigma_bar = local(Variant::homology, lambda1 + 1, "sigma_bar_1");
    const LevelClass tau_bar = local(Variant::cohomology, lambda1, "tau_bar_1");
    const LevelClass tau = local(Variant::cohomology, lambda1 + 1, "tau_1");

    NondegenerateTable t;
    t.r = r;
    t.n = n;
    t.lambda1 = lambda1;
    t.lambda_r = lr;
    auto add = [&](std::string name, const LevelClass& c, const char* target, bool nonzero, bool decided,
                   std::string rule) {
        TableEntry e;
        e.product = std::move(name);
        e.variant = c.variant;
        e.degree = c.degree;
        e.nonzero = nonzero;
        e.decided = decided;
        e.value = nonzero ? fmt::format("{}_{}", target, r) : decided ? "0" : "undetermined";
        e.rule = std::move(rule);
        if (nonzero && e.degree != lr && e.degree != lr + 1)
            throw PreconditionViolated(fmt::format("{} lands in degree {} outside the level groups", e.product, e.degree));
        t.entries.push_back(std::move(e));
    };

    add(fmt::format("sigma_1^{{*{}}}", r), power(sigma, r), "sigma", false, true, "support meets Sigma_1 in one point");
    add(fmt::format("tau_1^{{(*){}}}", r), power(tau, r), "tau", false, true, "support meets Sigma_1 in one point");

    const LevelClass sb_sigma = cs_product(power(sigma_bar, r - 1), sigma);
    if (r_min && n_min) add(fmt::format("sigma_bar_1^{{*{}}}*sigma_1", r - 1), sb_sigma, "sigma", true, true, "lambda_r and lambda_n minimal");
    else if (!r_min) add(fmt::format("sigma_bar_1^{{*{}}}*sigma_1", r - 1), sb_sigma, "sigma", false, true, "lambda_r not minimal");
    else add(fmt::format("sigma_bar_1^{{*{}}}*sigma_1", r - 1), sb_sigma, "sigma", false, false, "lambda_r minimal, lambda_n not minimal");

    const LevelClass sb_pow = power(sigma_bar, r);
    const std::string sb_name = fmt::format("sigma_bar_1^{{*{}}}", r);
    if (parity_even) add(sb_name, sb_pow, "sigma_bar", false, true, "n - lambda_1 even");
    else if (r_min && n_min) add(sb_name, sb_pow, "sigma_bar", true, true, "lambda_r and lambda_n minimal");
    else if (!r_min) add(sb_name, sb_pow, "sigma_bar", false, true, "lambda_r not minimal");
    else add(sb_name, sb_pow, "sigma_bar", false, false, "lambda_r minimal, lambda_n not minimal");

    const LevelClass tb_tau = co_product(power(tau_bar, r - 1), tau);
    const std::string tt_name = fmt::format("tau_bar_1^{{(*){}}}(*)tau_1", r - 1);
    if (!r_max) add(tt_name, tb_tau, "tau", false, true, "lambda_r not maximal");
    else if (rn_max) add(tt_name, tb_tau, "tau", true, true, "lambda_rn maximal");
    else add(tt_name, tb_tau, "tau", false, false, "lambda_r maximal, lambda_rn not maximal");

    const LevelClass tb_pow = power(tau_bar, r);
    const std::string tb_name = fmt::format("tau_bar_1^{{(*){}}}", r);
    if (parity_even) add(tb_name, tb_pow, "tau_bar", false, true, "n - lambda_1 even");
    else if (!r_max) add(tb_name, tb_pow, "tau_bar", false, true, "lambda_r not maximal");
    else if (rn_max) add(tb_name, tb_pow, "tau_bar", true, true, "lambda_rn maximal");
    else add(tb_name, tb_pow, "tau_bar", false, false, "lambda_r maximal, lambda_rn not maximal");
    return t;
}

int power_degree(Variant v, int i, int n, int m) {
    return v == Variant::homology ? m * i - (m - 1) * n : m * i + (m - 1) * (n - 1);
}

int printed_power_degree(int i, int n, int m) { return m * i - (m - 1) * (n - 1); }

NilpotenceResult nilpotence_check(const std::vector<int>& lambda, int degree, int n, Variant v) {
    if (lambda.empty()) throw SequenceTooShort("empty index sequence");
    NilpotenceResult res;
    res.variant = v;
    res.degree = degree;
    auto outside = [&](int m, int b) {
        const int l = lambda[std::size_t(m - 1)];
        return l != b - 1 && l != b;
    };
    if (outside(1, degree)) {
        res.vanishing_power = 1;
        if (v == Variant::homology) res.printed_vanishing_power = 1;
        res.checked_through = 1;
        return res;
    }
    if (lambda.size() < 2) throw SequenceTooShort("need lambda_2 to test the second power");
    const int M = int(lambda.size());
    for (int m = 2; m <= M; ++m) {
        if (!res.vanishing_power && outside(m, power_degree(v, degree, n, m))) res.vanishing_power = m;
        if (v == Variant::homology && !res.printed_vanishing_power && outside(m, printed_power_degree(degree, n, m)))
            res.printed_vanishing_power = m;
    }
    res.checked_through = M;
    res.discrepancy = v == Variant::homology && res.vanishing_power != res.printed_vanishing_power;
    return res;
}

int eliashberg_bound(int d1, int d2, int n, int g) {
    if (d1 < 0 || d2 < 0 || n < 0 || g < 0) throw PreconditionViolated("eliashberg_bound takes nonnegative integers");
    return d1 + d2 + 2 * n + g - 2;
}

int level_degree(const ClosedGeodesicModel& model, int r) {
    int d = -1;
    for (int k = int(model.base_betti.size()) - 1; k >= 0; --k)
        if (model.base_betti[std::size_t(k)] > 0) {
            d = k;
            break;
        }
    for (const auto& e : model.homology.basis)
        for (int m = 1; m <= r; ++m) d = std::max(d, e.degree + model.lambda1 + (m - 1) * model.b());
    return d;
}

int generator_degree(const ClosedGeodesicModel& model) {
    int g = 0;
    for (const auto& e : model.cohomology.basis) g = std::max(g, e.degree + model.lambda1);
    return g;
}

std::vector<EliashbergRow> eliashberg_check(const ClosedGeodesicModel& model, int max_total) {
    const int g = generator_degree(model);
    std::vector<EliashbergRow> rows;
    for (int r1 = 1; r1 < max_total; ++r1)
        for (int r2 = 1; r1 + r2 <= max_total; ++r2) {
            EliashbergRow row{r1, r2, level_degree(model, r1 + r2), 0, false};
            row.bound = eliashberg_bound(level_degree(model, r1), level_degree(model, r2), model.n, g);
            row.holds = row.d_sum <= row.bound;
            rows.push_back(row);
        }
    return rows;
}

}  // namespace closedgeo
