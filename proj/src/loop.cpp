#include "closedgeo/loop.hpp"

#include "closedgeo/errors.hpp"

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace closedgeo {

namespace {

// piecewise-geodesic interpolation gamma(x) with cached segment logs
class Interpolant {
public:
    explicit Interpolant(const DiscreteLoop& loop) : m_(*loop.model()) {
        const int N = loop.N();
        p_.reserve(std::size_t(N) + 1);
        for (int i = 0; i <= N; ++i) p_.push_back(loop.ambient(i));
        logs_.reserve(std::size_t(N));
        len_.reserve(std::size_t(N));
        cum_.assign(1, 0.0);
        for (int i = 0; i < N; ++i) {
            logs_.push_back(m_.log_map(p_[i], p_[i + 1]));
            len_.push_back(m_.norm(p_[i], logs_.back()));
            cum_.push_back(cum_.back() + len_.back());
        }
    }
    int N() const { return int(logs_.size()); }
    double length() const { return cum_.back(); }

    Vec at_segment(int i, double f) const {
        if (f <= 0.0) return p_[i];
        if (f >= 1.0) return p_[i + 1];
        Vec q, w;
        m_.exp_map(p_[i], f * logs_[i], q, w);
        return q;
    }
    Vec at_parameter(double t) const {
        const double u = std::clamp(t, 0.0, 1.0) * N();
        int i = int(std::floor(u));
        if (i >= N()) return p_[N()];
        return at_segment(i, u - i);
    }
    // arclength position, taken cyclically
    Vec at_arclength(double tau) const {
        const double L = length();
        double t = std::fmod(tau, L);
        if (t < 0) t += L;
        int i = int(std::upper_bound(cum_.begin(), cum_.end(), t) - cum_.begin()) - 1;
        i = std::clamp(i, 0, N() - 1);
        while (i < N() - 1 && len_[i] == 0.0) ++i;
        if (len_[i] == 0.0) return p_[i];
        return at_segment(i, (t - cum_[i]) / len_[i]);
    }

private:
    const ManifoldModel& m_;
    std::vector<Vec> p_;
    std::vector<Vec> logs_;
    std::vector<double> len_;
    std::vector<double> cum_;
};

double geodesic_distance(const ManifoldModel& m, const Vec& p, const Vec& q) { return m.norm(p, m.log_map(p, q)); }

std::vector<Vec> sample_uniform(const Interpolant& g, int k) {
    std::vector<Vec> out;
    out.reserve(std::size_t(k));
    for (int j = 0; j < k; ++j) out.push_back(g.at_parameter(double(j) / k));
    return out;
}

DiscreteLoop with_basepoint(const DiscreteLoop& loop, const std::vector<Vec>& pts) {
    std::vector<Point> out;
    out.reserve(pts.size());
    out.push_back(loop.vertex(0));
    for (std::size_t i = 1; i < pts.size(); ++i) out.push_back(loop.model()->from_ambient(pts[i]));
    return DiscreteLoop(loop.model(), std::move(out));
}

bool is_constant(const DiscreteLoop& loop) {
    for (double c : loop.chords())
        if (c > 0.0) return false;
    return true;
}

}  // namespace

DiscreteLoop::DiscreteLoop(ModelPtr model, std::vector<Point> open_vertices)
    : model_(std::move(model)), v_(std::move(open_vertices)) {
    if (!model_) throw InvalidLoop("loop without a model");
    if (v_.empty()) throw InvalidLoop("loop without vertices");
    v_.push_back(v_.front());
    validate();
}

DiscreteLoop DiscreteLoop::from_ambient(ModelPtr model, const std::vector<Vec>& open_vertices) {
    std::vector<Point> pts;
    pts.reserve(open_vertices.size());
    for (const auto& p : open_vertices) pts.push_back(model->from_ambient(p));
    return DiscreteLoop(std::move(model), std::move(pts));
}

DiscreteLoop DiscreteLoop::constant(ModelPtr model, const Point& x, int N) {
    return DiscreteLoop(std::move(model), std::vector<Point>(std::size_t(N), x));
}

void DiscreteLoop::validate() const {
    const int n = N();
    if (n < kMinSegments) throw InvalidLoop(fmt::format("loop has {} segments, need at least {}", n, kMinSegments));
    for (const auto& p : v_) {
        if (p.coords.size() != model_->dim() || p.chart < 0 || p.chart >= model_->chart_count() || !p.coords.allFinite())
            throw InvalidLoop("vertex outside every chart");
    }
    for (int i = 1; i <= n; ++i) {
        try {
            local_distance(*model_, v_[std::size_t(i - 1)], v_[std::size_t(i)]);
        } catch (const PointsTooFar&) {
            throw InvalidLoop(fmt::format("chord {} exceeds rho = {:.6g}", i, model_->rho()));
        }
    }
}

std::vector<Vec> DiscreteLoop::ambient_open() const {
    std::vector<Vec> out;
    out.reserve(std::size_t(N()));
    for (int i = 0; i < N(); ++i) out.push_back(ambient(i));
    return out;
}

std::vector<double> DiscreteLoop::chords() const {
    std::vector<double> c;
    c.reserve(std::size_t(N()));
    for (int i = 1; i <= N(); ++i) c.push_back(geodesic_distance(*model_, ambient(i - 1), ambient(i)));
    return c;
}

LoopMetrics metrics_from_chords(const std::vector<double>& chords) {
    LoopMetrics m;
    double sq = 0.0;
    for (double c : chords) {
        m.length += c;
        sq += c * c;
    }
    m.energy = double(chords.size()) * sq;
    m.root_energy = std::sqrt(m.energy);
    m.is_ppal = m.root_energy == 0.0 || m.length / m.root_energy >= 1.0 - kPpalTolerance;
    return m;
}

LoopMetrics metrics(const DiscreteLoop& loop) { return metrics_from_chords(loop.chords()); }

Vec sample_parameter(const DiscreteLoop& loop, double t) { return Interpolant(loop).at_parameter(t); }

DiscreteLoop ppal_reparam(const DiscreteLoop& loop) {
    const Interpolant g(loop);
    const ManifoldModel& m = *loop.model();
    const double L = g.length();
    if (L < 1e-10) throw ZeroLengthLoop("ppal_reparam of a loop with zero length");
    const int N = loop.N();
    const Vec x0 = loop.ambient(0);
    boost::math::tools::eps_tolerance<double> tol(50);

    // place N points with consecutive distance c along the image, return the
    // arclength position of the N-th one
    auto walk = [&](double c, std::vector<Vec>* out) {
        double tau = 0.0;
        Vec cur = x0;
        if (out) {
            out->clear();
            out->push_back(x0);
        }
        for (int k = 1; k <= N; ++k) {
            auto f = [&](double t) { return geodesic_distance(m, cur, g.at_arclength(t)) - c; };
            double lo = tau + c, hi = lo;
            double flo = f(lo);
            if (flo >= 0.0) {
                hi = lo;
            } else {
                double fhi = flo;
                int guard = 0;
                while (fhi < 0.0) {
                    lo = hi;
                    flo = fhi;
                    hi += 0.25 * c;
                    fhi = f(hi);
                    if (++guard > 400) throw NoConvergence("ppal_reparam walk cannot reach the next chord");
                }
                std::uintmax_t it = 100;
                const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, it);
                hi = 0.5 * (r.first + r.second);
            }
            tau = hi;
            cur = g.at_arclength(tau);
            if (out && k < N) out->push_back(cur);
        }
        return tau - L;
    };

    const double c_hi = L / N;
    double g_hi = walk(c_hi, nullptr);
    std::vector<Vec> pts;
    if (std::abs(g_hi) <= 1e-14 * L) {
        walk(c_hi, &pts);
        return with_basepoint(loop, pts);
    }
    double c_lo = 0.5 * c_hi, g_lo = walk(c_lo, nullptr);
    for (int guard = 0; g_lo >= 0.0; ++guard) {
        if (guard > 30) throw NoConvergence("ppal_reparam cannot bracket the chord length");
        c_lo *= 0.5;
        g_lo = walk(c_lo, nullptr);
    }
    std::uintmax_t it = 200;
    const auto r = boost::math::tools::toms748_solve([&](double c) { return walk(c, nullptr); }, c_lo, c_hi, g_lo, g_hi, tol, it);
    walk(0.5 * (r.first + r.second), &pts);
    return with_basepoint(loop, pts);
}

ConcatResult concat_min(const DiscreteLoop& a, const DiscreteLoop& b) {
    if (a.model()->hash() != b.model()->hash()) throw ModelMismatch("concat_min of loops on different models");
    if ((a.ambient(0) - b.ambient(0)).norm() > 1e-10) throw BasepointMismatch("concat_min needs a(0) = b(0)");
    const bool ca = is_constant(a), cb = is_constant(b);
    if (ca && cb) return ConcatResult{0.0, b};
    const double Fa = metrics(a).root_energy, Fb = metrics(b).root_energy;
    const double s = Fa / (Fa + Fb);
    const int N = a.N() + b.N();
    int k = int(std::lround(s * N));
    if (s > 0.0 && s < 1.0) k = std::clamp(k, 1, N - 1);
    const Interpolant ga(a), gb(b);
    std::vector<Vec> pts = sample_uniform(ga, k);
    const auto tail = sample_uniform(gb, N - k);
    pts.insert(pts.end(), tail.begin(), tail.end());
    // keep the shared basepoint bit-identical to a's
    std::vector<Point> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back(a.model()->from_ambient(p));
    out[0] = k > 0 ? a.vertex(0) : b.vertex(0);
    return ConcatResult{s, DiscreteLoop(a.model(), std::move(out))};
}

namespace {

DiscreteLoop resample_by(const DiscreteLoop& loop, double (*theta)(double, double), double s) {
    const Interpolant g(loop);
    const int N = loop.N();
    std::vector<Point> out;
    out.reserve(std::size_t(N));
    out.push_back(loop.vertex(0));
    for (int j = 1; j < N; ++j) {
        const double u = theta(double(j) / N, s) * N;
        const double r = std::round(u);
        // land exactly on stored vertices when theta hits the grid
        if (std::abs(u - r) < 1e-12 && r < N) out.push_back(loop.vertex(int(r)));
        else out.push_back(loop.model()->from_ambient(g.at_parameter(u / N)));
    }
    return DiscreteLoop(loop.model(), std::move(out));
}

double theta_half_to(double t, double s) { return t <= 0.5 ? 2.0 * s * t : s + 2.0 * (1.0 - s) * (t - 0.5); }
double theta_to_half(double t, double s) { return t <= s ? 0.5 * t / s : 0.5 + 0.5 * (t - s) / (1.0 - s); }

}  // namespace

DiscreteLoop reparam_J(const DiscreteLoop& loop, double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw PreconditionViolated(fmt::format("reparam_J needs s in [0, 1], got {}", s));
    return resample_by(loop, theta_half_to, s);
}

DiscreteLoop reparam_J_inverse(const DiscreteLoop& loop, double s) {
    if (!(s > 0.0 && s < 1.0)) throw PreconditionViolated(fmt::format("theta_(s -> 1/2) needs s in (0, 1), got {}", s));
    return resample_by(loop, theta_to_half, s);
}

DiscreteLoop rotate(const DiscreteLoop& loop, int k) {
    const int N = loop.N();
    const int shift = ((k % N) + N) % N;
    std::vector<Point> out;
    out.reserve(std::size_t(N));
    for (int i = 0; i < N; ++i) out.push_back(loop.vertex((i + shift) % N));
    return DiscreteLoop(loop.model(), std::move(out));
}

DiscreteLoop iterate(const DiscreteLoop& loop, int m) {
    if (m < 1) throw PreconditionViolated(fmt::format("iterate needs m >= 1, got {}", m));
    std::vector<Point> out;
    out.reserve(std::size_t(loop.N() * m));
    for (int r = 0; r < m; ++r)
        for (int i = 0; i < loop.N(); ++i) out.push_back(loop.vertex(i));
    return DiscreteLoop(loop.model(), std::move(out));
}

void write_loop(std::ostream& out, const DiscreteLoop& loop) {
    out << "closedgeo-loop 1\n";
    out << "model " << loop.model()->hash_hex() << '\n';
    out << "N " << loop.N() << '\n';
    for (int i = 0; i < loop.N(); ++i) {
        const Point& p = loop.vertex(i);
        std::string line = fmt::format("v {}", p.chart);
        for (int k = 0; k < p.coords.size(); ++k) line += fmt::format(" {:a}", p.coords(k));
        out << line << '\n';
    }
}

DiscreteLoop read_loop(std::istream& in, ModelPtr model) {
    std::string line, tag;
    auto next = [&](const char* what) {
        do {
            if (!std::getline(in, line)) throw ParseError(fmt::format("loop file: missing {}", what));
        } while (line.empty());
    };
    next("header");
    if (line != "closedgeo-loop 1") throw ParseError(fmt::format("loop file: bad header '{}'", line));
    next("model line");
    std::istringstream ms(line);
    std::string hash;
    if (!(ms >> tag >> hash) || tag != "model") throw ParseError("loop file: expected 'model <hash>'");
    if (hash != model->hash_hex()) throw ModelMismatch(fmt::format("loop file was written for model {}, not {}", hash, model->hash_hex()));
    next("N line");
    std::istringstream ns(line);
    int N = 0;
    if (!(ns >> tag >> N) || tag != "N" || N < 1) throw ParseError("loop file: expected 'N <segments>'");
    std::vector<Point> pts;
    pts.reserve(std::size_t(N));
    for (int i = 0; i < N; ++i) {
        next("vertex");
        std::istringstream vs(line);
        Point p;
        if (!(vs >> tag >> p.chart) || tag != "v") throw ParseError(fmt::format("loop file: bad vertex line '{}'", line));
        p.coords.resize(model->dim());
        for (int k = 0; k < model->dim(); ++k) {
            std::string tok;
            if (!(vs >> tok)) throw ParseError(fmt::format("loop file: vertex {} has too few coordinates", i));
            char* end = nullptr;
            p.coords(k) = std::strtod(tok.c_str(), &end);
            if (end != tok.c_str() + tok.size()) throw ParseError(fmt::format("loop file: bad number '{}'", tok));
        }
        std::string extra;
        if (vs >> extra) throw ParseError(fmt::format("loop file: vertex {} has too many coordinates", i));
        pts.push_back(std::move(p));
    }
    try {
        return DiscreteLoop(std::move(model), std::move(pts));
    } catch (const InvalidLoop& e) {
        throw ParseError(fmt::format("loop file: {}", e.what()));
    }
}

std::string loop_to_string(const DiscreteLoop& loop) {
    std::ostringstream s;
    write_loop(s, loop);
    return s.str();
}

DiscreteLoop loop_from_string(const std::string& text, ModelPtr model) {
    std::istringstream s(text);
    return read_loop(s, std::move(model));
}

}  // namespace closedgeo
