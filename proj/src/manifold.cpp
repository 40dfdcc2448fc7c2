#include "closedgeo/manifold.hpp"

#include "closedgeo/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace closedgeo {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const KeyValue& kv, const std::string& token) {
    try {
        std::size_t used = 0;
        double v = std::stod(token, &used);
        if (used != token.size() || !std::isfinite(v)) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("key '{}' (line {}): '{}' is not a real number", kv.key, kv.line, token));
    }
}

std::vector<double> parse_reals(const KeyValue& kv) {
    std::string v = kv.value;
    std::replace(v.begin(), v.end(), ',', ' ');
    std::istringstream in(v);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_real(kv, tok));
    if (out.empty()) throw ConfigError(fmt::format("key '{}' (line {}): empty list", kv.key, kv.line));
    return out;
}

std::string join_reals(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ',';
        s += fmt::format("{:.17g}", xs[i]);
    }
    return s;
}

// ---------------------------------------------------------------------------
// unit-sphere based models share stereographic charts; the ambient point is
// scale ⊙ x for x on the unit sphere

class SphereLike : public ManifoldModel {
public:
    SphereLike(ModelConfig cfg, Vec scale) : ManifoldModel(std::move(cfg)), scale_(std::move(scale)) {}

    int ambient_dim() const override { return dim() + 1; }
    int chart_count() const override { return 2; }

    Vec embed_unit_sphere(const Vec& x) const override {
        if (x.size() != scale_.size())
            throw PreconditionViolated(fmt::format("expected a {}-vector, got size {}", scale_.size(), x.size()));
        return scale_.cwiseProduct(x);
    }
    Vec unembed(const Vec& p) const {
        Vec x = p.cwiseQuotient(scale_);
        return x / x.norm();
    }

    Vec to_ambient(const Point& x) const override {
        return scale_.cwiseProduct(stereo_to_sphere(x.coords, x.chart));
    }
    Point from_ambient(const Vec& p) const override {
        const Vec x = unembed(p);
        const int c = stereo_canonical_chart(x);
        return Point{c, sphere_to_stereo(x, c)};
    }
    Point rechart(const Point& pt, int chart) const override {
        if (chart < 0 || chart > 1) throw PreconditionViolated(fmt::format("no chart {}", chart));
        if (chart == pt.chart) return pt;
        return Point{chart, sphere_to_stereo(stereo_to_sphere(pt.coords, pt.chart), chart)};
    }
    Frame chart_jacobian(const Point& pt) const override {
        Frame j = stereo_jacobian(pt.coords, pt.chart);
        for (int r = 0; r < j.rows(); ++r) j.row(r) *= scale_(r);
        return j;
    }

protected:
    Vec log_guess(const Vec& p, const Vec& q) const override {
        return scale_.cwiseProduct(unit_sphere_log(unembed(p), unembed(q)));
    }

    Vec scale_;
};

class RoundSphere final : public SphereLike {
public:
    RoundSphere(ModelConfig cfg)
        : SphereLike(cfg, Vec::Constant(cfg.dim + 1, cfg.radius)), R_(cfg.radius) {
        set_rho(std::numbers::pi * R_);
    }
    bool closed_form() const override { return true; }
    bool all_geodesics_closed() const override { return true; }

    double inner(const Vec&, const Vec& v, const Vec& w) const override { return v.dot(w); }
    Vec project_tangent(const Vec& p, const Vec& v) const override {
        return v - (v.dot(p) / p.squaredNorm()) * p;
    }
    Vec acceleration(const Vec& p, const Vec& v) const override {
        return -(v.squaredNorm() / p.squaredNorm()) * p;
    }
    void exp_map(const Vec& p, const Vec& v, Vec& p1, Vec& v1) const override {
        const double s = v.norm();
        if (s == 0.0) {
            p1 = p;
            v1 = v;
            return;
        }
        const Vec u = v / s;
        const double a = s / R_;
        p1 = std::cos(a) * p + (R_ * std::sin(a)) * u;
        v1 = (-s * std::sin(a) / R_) * p + (s * std::cos(a)) * u;
    }
    Vec log_map(const Vec& p, const Vec& q, const Vec*) const override {
        return R_ * unit_sphere_log(p / p.norm(), q / q.norm());
    }
    double distance_lower_bound(const Vec& p, const Vec& q) const override {
        return R_ * unit_sphere_log(p / p.norm(), q / q.norm()).norm();
    }
    double gaussian_curvature(const Vec&) const override { return 1.0 / (R_ * R_); }

private:
    double R_;
};

class Ellipsoid final : public SphereLike {
public:
    Ellipsoid(ModelConfig cfg) : SphereLike(cfg, Vec(Eigen::Vector3d(cfg.axes[0], cfg.axes[1], cfg.axes[2]))) {
        double kmax = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double ai = scale_(i), aj = scale_((i + 1) % 3), ak = scale_((i + 2) % 3);
            kmax = std::max(kmax, ai * ai / (aj * aj * ak * ak));
        }
        set_rho(std::numbers::pi / std::sqrt(kmax));
        inv2_ = scale_.cwiseProduct(scale_).cwiseInverse();
    }
    bool closed_form() const override { return false; }

    double inner(const Vec&, const Vec& v, const Vec& w) const override { return v.dot(w); }
    Vec project_tangent(const Vec& p, const Vec& v) const override {
        const Vec nrm = p.cwiseProduct(inv2_).normalized();
        return v - v.dot(nrm) * nrm;
    }
    Vec acceleration(const Vec& p, const Vec& v) const override {
        // level set phi = sum p_i^2/a_i^2 - 1: p'' = -(v^T H v / |grad|^2) grad
        const Vec grad = 2.0 * p.cwiseProduct(inv2_);
        const double vhv = 2.0 * v.cwiseProduct(v).dot(inv2_);
        return -(vhv / grad.squaredNorm()) * grad;
    }
    double distance_lower_bound(const Vec& p, const Vec& q) const override { return (p - q).norm(); }
    double gaussian_curvature(const Vec& p) const override {
        const double a2 = scale_(0) * scale_(0), b2 = scale_(1) * scale_(1), c2 = scale_(2) * scale_(2);
        const double s = p(0) * p(0) / (a2 * a2) + p(1) * p(1) / (b2 * b2) + p(2) * p(2) / (c2 * c2);
        return 1.0 / (a2 * b2 * c2 * s * s);
    }

private:
    Vec inv2_;
};

// metric R^2 exp(2 eps f) g_round on the unit sphere S^2,
// f = sum_i c_i x_i^2 + sum_k p_k x3^k
class ConformalSphere final : public SphereLike {
public:
    ConformalSphere(ModelConfig cfg, std::array<double, 3> quad, std::vector<double> profile, double eps)
        : SphereLike(cfg, Vec::Ones(3)), R_(cfg.radius), eps_(eps), quad_(quad), profile_(std::move(profile)) {
        double f_lo = 0.0, lap = 0.0, qsum = 0.0, qmax = 0.0;
        for (double c : quad_) {
            f_lo += std::min(c, 0.0);
            qsum += c;
            qmax = std::max(qmax, std::abs(c));
        }
        lap = 2.0 * std::abs(qsum) + 6.0 * qmax;
        for (std::size_t k = 0; k < profile_.size(); ++k) {
            f_lo -= std::abs(profile_[k]);
            lap += std::abs(profile_[k]) * double(k * (k - 1) + 2 * k);
        }
        f_lo_ = f_lo;
        if (eps_ * lap >= 1.0)
            throw ConfigError(fmt::format("key 'perturbation_eps': {} is too large for a positively curved metric", eps_));
        const double kmax = std::exp(-2.0 * eps_ * f_lo) * (1.0 + eps_ * lap) / (R_ * R_);
        set_rho(std::numbers::pi / std::sqrt(kmax));
    }
    bool closed_form() const override { return false; }

    double f(const Vec& x) const {
        double v = quad_[0] * x(0) * x(0) + quad_[1] * x(1) * x(1) + quad_[2] * x(2) * x(2);
        double zk = 1.0;
        for (double pk : profile_) {
            v += pk * zk;
            zk *= x(2);
        }
        return v;
    }
    Vec grad_f(const Vec& x) const {
        Vec g(3);
        g << 2.0 * quad_[0] * x(0), 2.0 * quad_[1] * x(1), 2.0 * quad_[2] * x(2);
        double zk = 1.0;
        for (std::size_t k = 1; k < profile_.size(); ++k) {
            g(2) += double(k) * profile_[k] * zk;
            zk *= x(2);
        }
        return g;
    }
    // Laplace-Beltrami of the restriction of f to the unit sphere
    double sphere_laplacian_f(const Vec& x) const {
        Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
        for (int i = 0; i < 3; ++i) h(i, i) = 2.0 * quad_[i];
        double zk = 1.0;
        for (std::size_t k = 2; k < profile_.size(); ++k) {
            h(2, 2) += double(k * (k - 1)) * profile_[k] * zk;
            zk *= x(2);
        }
        const Eigen::Vector3d xv = x;
        return h.trace() - 2.0 * xv.dot(Eigen::Vector3d(grad_f(x))) - xv.dot(h * xv);
    }

    double inner(const Vec& p, const Vec& v, const Vec& w) const override {
        return R_ * R_ * std::exp(2.0 * eps_ * f(p)) * v.dot(w);
    }
    Vec project_tangent(const Vec& p, const Vec& v) const override {
        return v - (v.dot(p) / p.squaredNorm()) * p;
    }
    Vec acceleration(const Vec& p, const Vec& v) const override {
        const Vec g = eps_ * grad_f(p);
        const double v2 = v.squaredNorm();
        const Vec gt = g - (g.dot(p) / p.squaredNorm()) * p;
        return -(v2 / p.squaredNorm()) * p - 2.0 * g.dot(v) * v + v2 * gt;
    }
    double distance_lower_bound(const Vec& p, const Vec& q) const override {
        return R_ * std::exp(eps_ * f_lo_) * unit_sphere_log(p / p.norm(), q / q.norm()).norm();
    }
    double gaussian_curvature(const Vec& p) const override {
        return std::exp(-2.0 * eps_ * f(p)) * (1.0 - eps_ * sphere_laplacian_f(p)) / (R_ * R_);
    }

private:
    double R_, eps_;
    std::array<double, 3> quad_;
    std::vector<double> profile_;
    double f_lo_ = 0.0;
};

class FlatTorus final : public ManifoldModel {
public:
    FlatTorus(ModelConfig cfg) : ManifoldModel(cfg) {
        periods_ = Vec(cfg.dim);
        for (int i = 0; i < cfg.dim; ++i) periods_(i) = cfg.periods[i];
        set_rho(0.5 * periods_.minCoeff());
    }
    int ambient_dim() const override { return dim(); }
    int chart_count() const override { return 1; }
    bool closed_form() const override { return true; }

    Vec to_ambient(const Point& x) const override { return x.coords; }
    Point from_ambient(const Vec& p) const override {
        Vec u(p.size());
        for (int i = 0; i < p.size(); ++i) {
            double w = std::fmod(p(i), periods_(i));
            if (w < 0) w += periods_(i);
            if (w >= periods_(i)) w = 0.0;
            u(i) = w;
        }
        return Point{0, u};
    }
    Point rechart(const Point& x, int chart) const override {
        if (chart != 0) throw PreconditionViolated(fmt::format("no chart {}", chart));
        return x;
    }
    Frame chart_jacobian(const Point&) const override { return Frame::Identity(dim(), dim()); }
    double inner(const Vec&, const Vec& v, const Vec& w) const override { return v.dot(w); }
    Vec project_tangent(const Vec&, const Vec& v) const override { return v; }
    Vec acceleration(const Vec&, const Vec& v) const override { return Vec::Zero(v.size()); }
    void exp_map(const Vec& p, const Vec& v, Vec& p1, Vec& v1) const override {
        p1 = p + v;
        v1 = v;
    }
    Vec log_map(const Vec& p, const Vec& q, const Vec*) const override { return wrap(q - p); }
    double distance_lower_bound(const Vec& p, const Vec& q) const override { return wrap(q - p).norm(); }
    double gaussian_curvature(const Vec&) const override { return 0.0; }

protected:
    Vec log_guess(const Vec& p, const Vec& q) const override { return wrap(q - p); }

private:
    Vec wrap(Vec d) const {
        for (int i = 0; i < d.size(); ++i) {
            const double L = periods_(i);
            d(i) -= L * std::round(d(i) / L);
        }
        return d;
    }
    Vec periods_;
};

}  // namespace

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::sphere: return "sphere";
        case ModelKind::ellipsoid: return "ellipsoid";
        case ModelKind::flat_torus: return "flat_torus";
        case ModelKind::revolution_surface: return "revolution_surface";
    }
    return "?";
}

std::string ModelConfig::canonical() const {
    std::string s = fmt::format("kind={};dim={}", to_string(kind), dim);
    switch (kind) {
        case ModelKind::sphere:
            s += fmt::format(";radius={:.17g};perturbation_eps={:.17g}", radius, perturbation_eps);
            break;
        case ModelKind::ellipsoid: s += ";axes=" + join_reals(axes); break;
        case ModelKind::flat_torus: s += ";periods=" + join_reals(periods); break;
        case ModelKind::revolution_surface:
            s += fmt::format(";radius={:.17g};perturbation_eps={:.17g};profile={}", radius, perturbation_eps, join_reals(profile));
            break;
    }
    return s;
}

KeyValues parse_key_values(const std::string& text) {
    KeyValues out;
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected 'key = value'", no));
        KeyValue kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), no};
        if (kv.key.empty()) throw ConfigError(fmt::format("line {}: empty key", no));
        for (const auto& prev : out)
            if (prev.key == kv.key) throw ConfigError(fmt::format("key '{}' (line {}): duplicate", kv.key, no));
        out.push_back(std::move(kv));
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot read '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ModelConfig model_config_from(const KeyValues& kvs, const std::vector<std::string>& extra_keys) {
    ModelConfig cfg;
    bool have_kind = false, have_dim = false;
    const KeyValue* radius = nullptr;
    const KeyValue* axes = nullptr;
    const KeyValue* periods = nullptr;
    const KeyValue* profile = nullptr;
    const KeyValue* eps = nullptr;
    for (const auto& kv : kvs) {
        if (kv.key == "kind") {
            have_kind = true;
            if (kv.value == "sphere") cfg.kind = ModelKind::sphere;
            else if (kv.value == "ellipsoid") cfg.kind = ModelKind::ellipsoid;
            else if (kv.value == "flat_torus" || kv.value == "torus") cfg.kind = ModelKind::flat_torus;
            else if (kv.value == "revolution_surface") cfg.kind = ModelKind::revolution_surface;
            else throw ConfigError(fmt::format("key 'kind' (line {}): unknown model '{}'", kv.line, kv.value));
        } else if (kv.key == "dim") {
            have_dim = true;
            const double d = parse_real(kv, kv.value);
            if (d != std::floor(d) || d < 2)
                throw ConfigError(fmt::format("key 'dim' (line {}): must be an integer >= 2", kv.line));
            cfg.dim = int(d);
        } else if (kv.key == "radius") radius = &kv;
        else if (kv.key == "axes") axes = &kv;
        else if (kv.key == "periods") periods = &kv;
        else if (kv.key == "profile") profile = &kv;
        else if (kv.key == "perturbation_eps") eps = &kv;
        else if (kv.key == "seed") {
            const double s = parse_real(kv, kv.value);
            if (s < 0 || s != std::floor(s)) throw ConfigError(fmt::format("key 'seed' (line {}): must be a nonnegative integer", kv.line));
            cfg.seed = std::uint64_t(s);
        } else if (std::find(extra_keys.begin(), extra_keys.end(), kv.key) == extra_keys.end()) {
            throw ConfigError(fmt::format("key '{}' (line {}): unknown key", kv.key, kv.line));
        }
    }
    if (!have_kind) throw ConfigError("key 'kind': missing");
    auto positive = [](const KeyValue* kv, const std::vector<double>& xs) {
        for (double x : xs)
            if (!(x > 0)) throw ConfigError(fmt::format("key '{}' (line {}): values must be positive", kv->key, kv->line));
    };
    auto forbid = [&](const KeyValue* kv) {
        if (kv) throw ConfigError(fmt::format("key '{}' (line {}): not used by kind {}", kv->key, kv->line, to_string(cfg.kind)));
    };
    if (radius) {
        cfg.radius = parse_real(*radius, radius->value);
        positive(radius, {cfg.radius});
    }
    if (eps) cfg.perturbation_eps = parse_real(*eps, eps->value);
    switch (cfg.kind) {
        case ModelKind::sphere:
            forbid(axes);
            forbid(periods);
            forbid(profile);
            if (cfg.perturbation_eps != 0.0 && cfg.dim != 2)
                throw ConfigError(fmt::format("key 'perturbation_eps' (line {}): only supported for dim = 2", eps->line));
            break;
        case ModelKind::ellipsoid:
            forbid(radius);
            forbid(periods);
            forbid(profile);
            forbid(eps);
            if (!axes) throw ConfigError("key 'axes': missing for kind ellipsoid");
            cfg.axes = parse_reals(*axes);
            if (cfg.axes.size() != 3) throw ConfigError(fmt::format("key 'axes' (line {}): need three semi-axes", axes->line));
            positive(axes, cfg.axes);
            if (have_dim && cfg.dim != 2) throw ConfigError("key 'dim': ellipsoids are surfaces (dim = 2)");
            cfg.dim = 2;
            break;
        case ModelKind::flat_torus:
            forbid(radius);
            forbid(axes);
            forbid(profile);
            forbid(eps);
            if (!periods) throw ConfigError("key 'periods': missing for kind flat_torus");
            cfg.periods = parse_reals(*periods);
            positive(periods, cfg.periods);
            if (have_dim && cfg.dim != int(cfg.periods.size()))
                throw ConfigError(fmt::format("key 'periods' (line {}): {} periods for dim {}", periods->line, cfg.periods.size(), cfg.dim));
            cfg.dim = int(cfg.periods.size());
            if (cfg.dim < 2 || cfg.dim > 3) throw ConfigError(fmt::format("key 'periods' (line {}): need 2 or 3 periods", periods->line));
            break;
        case ModelKind::revolution_surface:
            forbid(axes);
            forbid(periods);
            if (!profile) throw ConfigError("key 'profile': missing for kind revolution_surface");
            cfg.profile = parse_reals(*profile);
            if (!eps) cfg.perturbation_eps = 1.0;
            if (have_dim && cfg.dim != 2) throw ConfigError("key 'dim': revolution surfaces have dim = 2");
            cfg.dim = 2;
            break;
    }
    if (cfg.kind == ModelKind::sphere && cfg.dim > 3)
        throw ConfigError(fmt::format("key 'dim': numerical models support dim <= 3, got {}", cfg.dim));
    return cfg;
}

ModelConfig load_model_config(const std::string& path) { return model_config_from(parse_key_values(read_text_file(path))); }

ModelConfig model_config_from_canonical(const std::string& canonical) {
    std::string text = canonical;
    std::replace(text.begin(), text.end(), ';', '\n');
    return model_config_from(parse_key_values(text));
}

ManifoldModel::ManifoldModel(ModelConfig cfg) : cfg_(std::move(cfg)), hash_(fnv1a(cfg_.canonical())) {}

std::string ManifoldModel::hash_hex() const { return fmt::format("{:016x}", hash_); }

double ManifoldModel::norm(const Vec& p, const Vec& v) const { return std::sqrt(std::max(0.0, inner(p, v, v))); }

Vec ManifoldModel::embed_unit_sphere(const Vec&) const {
    throw PreconditionViolated(fmt::format("{} is not a sphere-type model", to_string(kind())));
}

Frame ManifoldModel::tangent_frame(const Vec& p) const {
    const Point b = from_ambient(p);
    Frame j = chart_jacobian(b);
    const Vec base = to_ambient(b);
    for (int k = 0; k < j.cols(); ++k) {
        Vec col = j.col(k);
        for (int l = 0; l < k; ++l) col -= inner(base, col, Vec(j.col(l))) * Vec(j.col(l));
        j.col(k) = col / norm(base, col);
    }
    return j;
}

void ManifoldModel::rk4_flow(Vec& p, Vec& v, double t, int steps) const {
    const double h = t / steps;
    for (int s = 0; s < steps; ++s) {
        const Vec k1p = v, k1v = acceleration(p, v);
        const Vec p2 = p + 0.5 * h * k1p, v2 = v + 0.5 * h * k1v;
        const Vec k2p = v2, k2v = acceleration(p2, v2);
        const Vec p3 = p + 0.5 * h * k2p, v3 = v + 0.5 * h * k2v;
        const Vec k3p = v3, k3v = acceleration(p3, v3);
        const Vec p4 = p + h * k3p, v4 = v + h * k3v;
        const Vec k4p = v4, k4v = acceleration(p4, v4);
        p += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
}

void ManifoldModel::exp_map(const Vec& p, const Vec& v, Vec& p1, Vec& v1) const {
    p1 = p;
    v1 = v;
    rk4_flow(p1, v1, 1.0, shooting_steps_);
}

Vec ManifoldModel::log_map(const Vec& p, const Vec& q, const Vec* guess) const {
    if ((q - p).norm() == 0.0) return Vec::Zero(p.size());
    const Frame B = tangent_frame(p);
    const int n = int(B.cols());
    const Vec v0 = guess ? *guess : log_guess(p, q);
    Vec c(n);
    for (int k = 0; k < n; ++k) c(k) = inner(p, Vec(B.col(k)), v0);

    Vec p1, v1, pk, vk;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 3> J(p.size(), n);
    bool settled = false;
    for (int it = 0; it < 50; ++it) {
        exp_map(p, B * c, p1, v1);
        const Vec r = q - p1;
        const double h = 1e-7 * std::max(1.0, c.norm());
        for (int k = 0; k < n; ++k) {
            Vec ck = c;
            ck(k) += h;
            exp_map(p, B * ck, pk, vk);
            J.col(k) = (pk - p1) / h;
        }
        const Vec d = J.colPivHouseholderQr().solve(r);
        c += d;
        if (d.norm() <= 1e-13 * (1.0 + c.norm())) {
            if (settled) break;
            settled = true;
        }
    }
    exp_map(p, B * c, p1, v1);
    const double resid = project_tangent(q, q - p1).norm();
    if (!(resid <= 1e-12 * std::max(1.0, c.norm())))
        throw NoConvergence(fmt::format("geodesic shooting residual {:.3g}", resid));
    return B * c;
}

ModelPtr make_model(const ModelConfig& cfg) {
    switch (cfg.kind) {
        case ModelKind::sphere:
            if (cfg.perturbation_eps != 0.0) {
                return std::make_shared<ConformalSphere>(
                    cfg, std::array<double, 3>{kPerturbationQuadratic[0], kPerturbationQuadratic[1], kPerturbationQuadratic[2]},
                    std::vector<double>{}, cfg.perturbation_eps);
            }
            return std::make_shared<RoundSphere>(cfg);
        case ModelKind::ellipsoid: return std::make_shared<Ellipsoid>(cfg);
        case ModelKind::flat_torus: return std::make_shared<FlatTorus>(cfg);
        case ModelKind::revolution_surface:
            return std::make_shared<ConformalSphere>(cfg, std::array<double, 3>{0.0, 0.0, 0.0}, cfg.profile,
                                                     cfg.perturbation_eps);
    }
    throw ConfigError("unknown model kind");
}

ModelPtr make_sphere(int n, double radius) {
    ModelConfig c;
    c.kind = ModelKind::sphere;
    c.dim = n;
    c.radius = radius;
    if (n < 2 || n > 3) throw ConfigError(fmt::format("key 'dim': numerical spheres need dim 2 or 3, got {}", n));
    return make_model(c);
}

ModelPtr make_ellipsoid(double a, double b, double c) {
    ModelConfig cfg;
    cfg.kind = ModelKind::ellipsoid;
    cfg.axes = {a, b, c};
    return make_model(cfg);
}

ModelPtr make_flat_torus(std::vector<double> periods) {
    ModelConfig cfg;
    cfg.kind = ModelKind::flat_torus;
    cfg.dim = int(periods.size());
    cfg.periods = std::move(periods);
    return make_model(cfg);
}

ModelPtr make_perturbed_sphere(double eps, double radius) {
    ModelConfig cfg;
    cfg.kind = ModelKind::sphere;
    cfg.radius = radius;
    cfg.perturbation_eps = eps;
    return make_model(cfg);
}

ModelPtr make_revolution_surface(std::vector<double> profile, double eps, double radius) {
    ModelConfig cfg;
    cfg.kind = ModelKind::revolution_surface;
    cfg.profile = std::move(profile);
    cfg.perturbation_eps = eps;
    cfg.radius = radius;
    return make_model(cfg);
}

Point point_on_unit_sphere(const ManifoldModel& m, const Vec& x) {
    return m.from_ambient(m.embed_unit_sphere(x / x.norm()));
}

double local_distance(const ManifoldModel& m, const Point& x, const Point& y) {
    const Vec p = m.to_ambient(x), q = m.to_ambient(y);
    const double slack = 1.0 + 1e-9;
    if (m.distance_lower_bound(p, q) > m.rho() * slack)
        throw PointsTooFar(fmt::format("points are farther apart than rho = {:.6g}", m.rho()));
    const double d = m.norm(p, m.log_map(p, q));
    if (d > m.rho() * slack) throw PointsTooFar(fmt::format("distance {:.6g} exceeds rho = {:.6g}", d, m.rho()));
    return d;
}

std::vector<Point> short_geodesic(const ManifoldModel& m, const Point& x, const Point& y, int k) {
    if (k < 1) throw PreconditionViolated("short_geodesic needs k >= 1");
    const Vec p = m.to_ambient(x), q = m.to_ambient(y);
    if (m.distance_lower_bound(p, q) > m.rho() * (1.0 + 1e-9))
        throw PointsTooFar(fmt::format("points are farther apart than rho = {:.6g}", m.rho()));
    const Vec v = m.log_map(p, q);
    if (m.norm(p, v) > m.rho() * (1.0 + 1e-9)) throw PointsTooFar("segment longer than rho");
    std::vector<Point> out;
    out.reserve(std::size_t(k > 1 ? k - 1 : 0));
    if (v.norm() == 0.0) {
        for (int j = 1; j < k; ++j) out.push_back(x);
        return out;
    }
    Vec pj, vj;
    for (int j = 1; j < k; ++j) {
        m.exp_map(p, (double(j) / k) * v, pj, vj);
        out.push_back(m.from_ambient(pj));
    }
    return out;
}

TangentVector tangent_from_ambient(const ManifoldModel& m, const Vec& p, const Vec& v) {
    TangentVector t;
    t.base = m.from_ambient(p);
    const Frame j = m.chart_jacobian(t.base);
    t.components = j.colPivHouseholderQr().solve(m.project_tangent(m.to_ambient(t.base), v));
    return t;
}

Vec tangent_to_ambient(const ManifoldModel& m, const TangentVector& v) { return m.chart_jacobian(v.base) * v.components; }

TangentVector geodesic_flow(const ManifoldModel& m, const TangentVector& v, double t, int steps) {
    if (steps < 16) throw PreconditionViolated(fmt::format("geodesic_flow needs steps >= 16, got {}", steps));
    Vec p = m.to_ambient(v.base);
    Vec w = tangent_to_ambient(m, v);
    const double s0 = m.norm(p, w);
    if (!(s0 > 0)) throw PreconditionViolated("geodesic_flow needs a nonzero velocity");
    if (t != 0.0) m.rk4_flow(p, w, t, steps);
    const double s1 = m.norm(p, w);
    const double drift = std::abs(s1 - s0) / s0;
    if (drift > 1e-9 * std::max(1.0, std::abs(t)))
        throw StepTooCoarse(fmt::format("relative speed drift {:.3g} over time {:.6g} with {} steps", drift, t, steps));
    if (t == 0.0) return v;
    return tangent_from_ambient(m, p, w);
}

Vec stereo_to_sphere(const Vec& u, int chart) {
    const int n = int(u.size());
    const double s = u.squaredNorm();
    Vec x(n + 1);
    for (int i = 0; i < n; ++i) x(i) = 2.0 * u(i) / (1.0 + s);
    x(n) = chart == 0 ? (s - 1.0) / (s + 1.0) : (1.0 - s) / (1.0 + s);
    return x;
}

Vec sphere_to_stereo(const Vec& xin, int chart) {
    const Vec x = xin / xin.norm();
    const int n = int(x.size()) - 1;
    const double den = chart == 0 ? 1.0 - x(n) : 1.0 + x(n);
    if (den < 1e-12) throw PreconditionViolated(fmt::format("point is the projection pole of chart {}", chart));
    return x.head(n) / den;
}

Frame stereo_jacobian(const Vec& u, int chart) {
    const int n = int(u.size());
    const double s = u.squaredNorm();
    const double a = 1.0 + s;
    Frame j(n + 1, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) j(i, k) = (i == k ? 2.0 / a : 0.0) - 4.0 * u(i) * u(k) / (a * a);
    const double sgn = chart == 0 ? 1.0 : -1.0;
    for (int k = 0; k < n; ++k) j(n, k) = sgn * 4.0 * u(k) / (a * a);
    return j;
}

int stereo_canonical_chart(const Vec& x) { return x(x.size() - 1) > 0.0 ? 1 : 0; }

Vec unit_sphere_log(const Vec& x, const Vec& y) {
    const double c = x.dot(y);
    const Vec w = y - c * x;
    const double s = w.norm();
    if (s < 1e-300) {
        if (c < 0) throw PointsTooFar("antipodal points have no unique minimizing segment");
        return Vec::Zero(x.size());
    }
    return (std::atan2(s, c) / s) * w;
}

}  // namespace closedgeo
