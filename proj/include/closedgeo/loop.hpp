#pragma once
#include "closedgeo/manifold.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace closedgeo {

// Element of M_N: N+1 vertices joined by minimizing segments, last vertex
// stored as an exact copy of the first.
class DiscreteLoop {
public:
    // closes the polygon itself; pass the N distinct vertices x_0..x_{N-1}
    DiscreteLoop(ModelPtr model, std::vector<Point> open_vertices);
    static DiscreteLoop from_ambient(ModelPtr model, const std::vector<Vec>& open_vertices);
    static DiscreteLoop constant(ModelPtr model, const Point& x, int N);

    const ModelPtr& model() const { return model_; }
    int N() const { return int(v_.size()) - 1; }
    const Point& vertex(int i) const { return v_[std::size_t(i)]; }
    const std::vector<Point>& vertices() const { return v_; }
    Vec ambient(int i) const { return model_->to_ambient(v_[std::size_t(i)]); }
    std::vector<Vec> ambient_open() const;

    // |x_i - x_{i-1}| for i = 1..N
    std::vector<double> chords() const;

private:
    DiscreteLoop() = default;
    void validate() const;

    ModelPtr model_;
    std::vector<Point> v_;
};

struct LoopMetrics {
    double energy = 0.0;
    double length = 0.0;
    double root_energy = 0.0;
    bool is_ppal = false;
};

constexpr double kPpalTolerance = 1e-6;
constexpr int kMinSegments = 8;

LoopMetrics metrics(const DiscreteLoop& loop);
LoopMetrics metrics_from_chords(const std::vector<double>& chords);

// point of the piecewise-geodesic interpolation at loop parameter t in [0, 1]
Vec sample_parameter(const DiscreteLoop& loop, double t);

DiscreteLoop ppal_reparam(const DiscreteLoop& loop);

struct ConcatResult {
    double s = 0.0;
    DiscreteLoop loop;
};
ConcatResult concat_min(const DiscreteLoop& a, const DiscreteLoop& b);

// vertices sampled at theta_{1/2 -> s}(j/N), and the inverse family theta_{s -> 1/2}
DiscreteLoop reparam_J(const DiscreteLoop& loop, double s);
DiscreteLoop reparam_J_inverse(const DiscreteLoop& loop, double s);

// x_i -> x_{i+k mod N}
DiscreteLoop rotate(const DiscreteLoop& loop, int k);
DiscreteLoop iterate(const DiscreteLoop& loop, int m);

// line format: header, model hash, N, then one "chart c_1 .. c_n" line per vertex
// with hex-float coordinates
void write_loop(std::ostream& out, const DiscreteLoop& loop);
DiscreteLoop read_loop(std::istream& in, ModelPtr model);
std::string loop_to_string(const DiscreteLoop& loop);
DiscreteLoop loop_from_string(const std::string& text, ModelPtr model);

}  // namespace closedgeo
