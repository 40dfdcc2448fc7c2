#pragma once
#include "closedgeo/loop.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <vector>

namespace closedgeo {

// Discrete energy E = N sum d^2 and its derivatives with respect to the chart
// coordinates of the N open vertices (vertex-major, n entries per vertex).
struct EnergyDerivatives {
    double energy = 0.0;
    Eigen::VectorXd gradient;
    // metric-orthonormal version of the gradient; its norm is the dual norm
    Eigen::VectorXd gradient_ortho;
    double gradient_norm = 0.0;
};

EnergyDerivatives energy_gradient(const DiscreteLoop& loop);

// Hessian of the energy of the m-fold iterate, congruence-transformed to
// metric-orthonormal vertex frames
Eigen::MatrixXd energy_hessian(const DiscreteLoop& loop, int m = 1);

struct IndexResult {
    int m = 1;
    int lambda = 0;
    int nu = 0;
    int raw_kernel = 0;
    int N = 0;  // segments of the base loop used, mN for the iterate
    double eps_cut = 0.0;
    double max_abs = 0.0;
    // |e| closest to eps_cut from below and from above, for gap reporting
    double below_cut = 0.0;
    double above_cut = 0.0;
};

// classify the spectrum of the iterate Hessian of this critical loop as is
IndexResult index_at(const DiscreteLoop& critical_loop, int m);

struct ConvergenceReport {
    double gradient_norm = 0.0;
    int descent_steps = 0;
    int newton_steps = 0;
};

struct CriticalOrbit {
    DiscreteLoop loop;  // gauge-fixed PPAL representative
    double length = 0.0;
    bool prime = true;
    int multiplicity = 1;
    std::map<int, IndexResult> iterates;
    std::optional<Eigen::MatrixXd> poincare;
    ConvergenceReport convergence;
    // user-declared, never inferred
    bool bott_nondegenerate = false;
    // refined representatives, keyed by N
    std::map<int, DiscreteLoop> refined;
};

struct FindOptions {
    int descent_steps = 30;
    int max_newton = 60;
    double target_gradient = 1e-11;
    double accept_gradient = 1e-9;
};

constexpr double kCollapseThreshold = 1e-6;

CriticalOrbit find_critical(const DiscreteLoop& seed, const FindOptions& opts = {});

// Newton polish of a loop that is already close to a critical point
DiscreteLoop polish_critical(const DiscreteLoop& loop, ConvergenceReport* report = nullptr, const FindOptions& opts = {});

// smallest N' = N 2^k with m-fold iterate inside the approximation bound
int segments_for_iterate(const CriticalOrbit& orbit, int m);

// loop with twice the segments: geodesic midpoints, then a Newton polish
DiscreteLoop refine_double(const DiscreteLoop& critical_loop);

// (lambda_m, nu_m); refines N as needed and records the result in orbit
IndexResult hessian_index(CriticalOrbit& orbit, int m);

// n = 2 models by Jacobi integration, closed form on round spheres and flat tori
Eigen::MatrixXd poincare_map(const CriticalOrbit& orbit, int steps = 4000);
Eigen::MatrixXd poincare_map(const DiscreteLoop& critical_loop, int steps = 4000);

// rotate labels so that x_0 has minimal ambient coordinates (first, then second)
DiscreteLoop fix_gauge(const DiscreteLoop& loop);

// deterministic order: length, then lambda_1, then gauge basepoint
bool orbit_less(const CriticalOrbit& a, const CriticalOrbit& b);

}  // namespace closedgeo
