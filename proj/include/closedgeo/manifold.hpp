#pragma once
#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace closedgeo {

// Ambient vectors never exceed R^4 (S^3), so keep them on the stack.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using Frame = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 3>;

struct Point {
    int chart = 0;
    Vec coords;
};

// components are taken in the coordinate basis of base's chart
struct TangentVector {
    Point base;
    Vec components;
};

enum class ModelKind { sphere, ellipsoid, flat_torus, revolution_surface };

std::string to_string(ModelKind k);

struct ModelConfig {
    ModelKind kind = ModelKind::sphere;
    int dim = 2;
    double radius = 1.0;
    std::vector<double> axes;
    std::vector<double> periods;
    double perturbation_eps = 0.0;
    std::vector<double> profile;
    std::uint64_t seed = 1;

    std::string canonical() const;
};

// Ordered key/value pairs from "key = value" text; '#' starts a comment.
struct KeyValue {
    std::string key;
    std::string value;
    int line = 0;
};
using KeyValues = std::vector<KeyValue>;

KeyValues parse_key_values(const std::string& text);
std::string read_text_file(const std::string& path);

// Keys outside the model vocabulary are rejected unless listed in extra_keys.
ModelConfig model_config_from(const KeyValues& kv, const std::vector<std::string>& extra_keys = {});
ModelConfig load_model_config(const std::string& path);
// inverse of ModelConfig::canonical()
ModelConfig model_config_from_canonical(const std::string& canonical);

class ManifoldModel {
public:
    explicit ManifoldModel(ModelConfig cfg);
    virtual ~ManifoldModel() = default;

    const ModelConfig& config() const { return cfg_; }
    ModelKind kind() const { return cfg_.kind; }
    int dim() const { return cfg_.dim; }
    double rho() const { return rho_; }
    std::uint64_t hash() const { return hash_; }
    std::string hash_hex() const;

    virtual int ambient_dim() const = 0;
    virtual int chart_count() const = 0;
    // true when exp/log are closed form rather than integrated
    virtual bool closed_form() const = 0;
    // true when every geodesic is closed with a common prime period
    virtual bool all_geodesics_closed() const { return false; }

    virtual Vec to_ambient(const Point& x) const = 0;
    virtual Point from_ambient(const Vec& p) const = 0;
    virtual Point rechart(const Point& x, int chart) const = 0;
    virtual Frame chart_jacobian(const Point& x) const = 0;
    Point canonical(const Point& x) const { return from_ambient(to_ambient(x)); }

    virtual double inner(const Vec& p, const Vec& v, const Vec& w) const = 0;
    double norm(const Vec& p, const Vec& v) const;
    virtual Vec project_tangent(const Vec& p, const Vec& v) const = 0;
    virtual Vec acceleration(const Vec& p, const Vec& v) const = 0;

    // time-one geodesic flow, (p, v) -> (p1, v1)
    virtual void exp_map(const Vec& p, const Vec& v, Vec& p1, Vec& v1) const;
    // initial velocity of the minimizing segment from p to q; guess may be empty
    virtual Vec log_map(const Vec& p, const Vec& q, const Vec* guess = nullptr) const;
    // cheap bound with distance(p, q) >= bound
    virtual double distance_lower_bound(const Vec& p, const Vec& q) const = 0;
    virtual double gaussian_curvature(const Vec& p) const = 0;
    // sphere-type models: ambient image of a point of the unit sphere S^n
    virtual Vec embed_unit_sphere(const Vec& x) const;

    // metric-orthonormal tangent frame at p (ambient x n)
    Frame tangent_frame(const Vec& p) const;

    void rk4_flow(Vec& p, Vec& v, double t, int steps) const;

    int shooting_steps() const { return shooting_steps_; }

protected:
    virtual Vec log_guess(const Vec& p, const Vec& q) const = 0;
    void set_rho(double r) { rho_ = r; }

    ModelConfig cfg_;
    double rho_ = 0.0;
    std::uint64_t hash_ = 0;
    int shooting_steps_ = 48;
};

using ModelPtr = std::shared_ptr<const ManifoldModel>;

ModelPtr make_model(const ModelConfig& cfg);
ModelPtr make_sphere(int n = 2, double radius = 1.0);
ModelPtr make_ellipsoid(double a, double b, double c);
ModelPtr make_flat_torus(std::vector<double> periods);
ModelPtr make_perturbed_sphere(double eps, double radius = 1.0);
ModelPtr make_revolution_surface(std::vector<double> profile, double eps = 1.0, double radius = 1.0);

// default perturbation polynomial f = sum_i c_i x_i^2
inline const double kPerturbationQuadratic[3] = {1.0, -0.6, 0.25};

Point point_on_unit_sphere(const ManifoldModel& m, const Vec& x);

double local_distance(const ManifoldModel& m, const Point& x, const Point& y);
std::vector<Point> short_geodesic(const ManifoldModel& m, const Point& x, const Point& y, int k);
TangentVector geodesic_flow(const ManifoldModel& m, const TangentVector& v, double t, int steps);

TangentVector tangent_from_ambient(const ManifoldModel& m, const Vec& p, const Vec& v);
Vec tangent_to_ambient(const ManifoldModel& m, const TangentVector& v);

// stereographic charts on the unit sphere S^n in R^{n+1}:
// chart 0 projects from the north pole, chart 1 from the south pole
Vec stereo_to_sphere(const Vec& u, int chart);
Vec sphere_to_stereo(const Vec& x, int chart);
Frame stereo_jacobian(const Vec& u, int chart);
int stereo_canonical_chart(const Vec& x);

// great-circle log on the unit sphere, zero for coincident points
Vec unit_sphere_log(const Vec& x, const Vec& y);

}  // namespace closedgeo
