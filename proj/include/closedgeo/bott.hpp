#pragma once
#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace closedgeo {

// Piecewise-constant integer function on the unit circle, symmetric under
// conjugation, stored on [0, pi]. breaks always starts at 0 and ends at pi;
// arc k is the open interval (breaks[k], breaks[k+1]).
struct OmegaIndex {
    std::vector<double> breaks;
    std::vector<int> point_values;
    std::vector<int> arc_values;
    // dim ker(P - omega I) at each break, zero elsewhere
    std::vector<int> nullity;
    // parabolic at -1: jump data is not determined, value kept for diagnostics
    bool excluded = false;
    std::string kind;

    // value at e^{i angle}
    int operator()(double angle) const;
    int nullity_at(double angle) const;
    // one-sided splitting numbers S^-(break k) and S^+(break k)
    std::pair<int, int> splitting(std::size_t k) const;

    static OmegaIndex constant(int value);
};

constexpr double kAngleMatch = 1e-9;
constexpr double kAngleMerge = 1e-6;

// fold an angle into [0, pi]
double fold_angle(double angle);

int bott_sum(const OmegaIndex& omega, int m);
// sum of dim ker(P - omega I) over m-th roots of unity
int nullity_sum(const OmegaIndex& omega, int m);
// index-plus-nullity, summing Omega + N_P over m-th roots of unity
int upsilon_sum(const OmegaIndex& omega, int m);
// (1/2pi) integral of Omega over the circle
double average_index(const OmegaIndex& omega);
bool same_function(const OmegaIndex& a, const OmegaIndex& b);
// |Omega(w) - Omega(t)| <= n-1 and 0 <= S^{+-} <= n-1
bool satisfies_bounds(const OmegaIndex& omega, int n);

// Krein value i <Jv, conj v> of the unit eigenvector of e^{i theta}
double krein_value(const Eigen::Matrix2d& P);

OmegaIndex omega_from_poincare(const Eigen::MatrixXd& P, int lambda1, int n = 2);

// jump candidates are eigenvalue angles in [0, pi]; 0 allows a jump at 1
OmegaIndex omega_from_iterates(const std::vector<int>& lambda, const std::vector<double>& candidates);

struct GrowthBounds {
    int min = 0;
    int max = 0;
    // min raised to 0, the floor for index data of minimizers
    int clamped_min = 0;
    bool clamped = false;
};
GrowthBounds growth_bounds(int lambda1, int n, int m);

struct IterationReport {
    int n = 2;
    std::vector<int> lambda;
    std::vector<int> nu;
    double lambda_av = 0.0;
    double lambda_av_error = 0.0;
    bool lambda_av_exact = false;
    // 2 lambda_M / M - lambda_{M/2} / (M/2), diagnostic only
    double lambda_av_richardson = 0.0;

    // per m = 1..M, index m-1
    std::vector<bool> index_bound;           // |lambda_m - m lambda| <= (m-1)(n-1)
    std::vector<bool> index_nullity_bound;   // same for lambda + nu
    std::vector<bool> nullity_bound;         // nu_m <= 2(n-1)
    std::vector<bool> at_min;
    std::vector<bool> at_max;
    std::vector<bool> above_min_propagates;  // lambda_m > min => lambda_j > min for j > m
    std::vector<bool> below_max_propagates;  // lambda_m < max => lambda_j < max for j > m
    bool average_bound = false;              // |lambda - lambda_av| <= n-1
    bool average_nullity_bound = false;      // |lambda + nu - lambda_av| <= n-1

    bool all_hold() const;
    std::vector<std::string> violations() const;
};

IterationReport check_iteration(const std::vector<int>& lambda, const std::vector<int>& nu, int n,
                                const OmegaIndex* omega = nullptr);

enum class Growth { max, min };

int based_index(int lambda1, int lambda_n, int n, Growth growth);

}  // namespace closedgeo
