#pragma once
#include "closedgeo/graded_ring.hpp"
#include "closedgeo/manifold.hpp"

#include <boost/rational.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace closedgeo {

// Manifold all of whose geodesics are closed with common prime length ell and
// maximal index growth lambda_r = r lambda_1 + (r-1)(n-1).
struct ClosedGeodesicModel {
    std::string name;
    int n = 2;
    int lambda1 = 0;
    double ell = 0.0;
    std::vector<int> base_betti;  // Betti numbers of M
    GradedRing homology;          // intersection ring H_*(SM)
    GradedRing cohomology;        // cup ring H^*(SM)
    bool orientable = false;

    int lambda(int r) const { return r * lambda1 + (r - 1) * (n - 1); }
    int b() const { return lambda1 + n - 1; }
    int h() const { return lambda1 + 2 * n - 1; }
};
using ClosedModelPtr = std::shared_ptr<const ClosedGeodesicModel>;

// reads a .model file; ring paths are relative to it. Z mode needs an
// orientable model whose rings are stored over Z.
ClosedModelPtr load_closed_model(const std::string& path, Coeff coeff = Coeff::z2);
// s2, s3, rp2 from the shipped data directory
ClosedModelPtr builtin_model(const std::string& name, Coeff coeff = Coeff::z2);
// round spheres only; anything else throws NotAllGeodesicsClosed
ClosedModelPtr closed_model_for(const ManifoldModel& m, Coeff coeff = Coeff::z2);
std::string ring_data_dir();

enum class Variant { homology, cohomology };
std::string to_string(Variant v);

// Level value, either a rational multiple of the prime length or a real number.
struct Level {
    bool symbolic = true;
    boost::rational<long> units{0};
    double real = 0.0;

    static Level multiple(long num, long den = 1) { return {true, boost::rational<long>(num, den), 0.0}; }
    static Level value(double v) { return {false, 0, v}; }
    Level operator+(const Level& o) const;
    bool operator==(const Level& o) const;
    bool operator<=(const Level& o) const;
    double numeric(double ell) const;
    std::string format() const;
};

struct Payload {
    GradedRing::Element element;
    int t_power = 0;
};

// A (co)homology class with its level. Homology levels are upper bounds for
// the critical value, cohomology levels lower bounds.
struct LevelClass {
    Variant variant = Variant::homology;
    int n = 2;
    int degree = 0;
    Level level;
    std::optional<int> filtration;
    std::optional<Payload> payload;
    ClosedModelPtr model;
    std::string label;
};

LevelClass cs_product(const LevelClass& x, const LevelClass& y);
LevelClass co_product(const LevelClass& x, const LevelClass& y);
// x^{*m} or x^{(circledast) m} depending on variant
LevelClass power(const LevelClass& x, int m);

LevelClass phi_iso(const ClosedModelPtr& model, const GradedRing::Element& a, int m);
LevelClass psi_iso(const ClosedModelPtr& model, const GradedRing::Element& a, int m);
LevelClass theta_class(const ClosedModelPtr& model);
LevelClass omega_class(const ClosedModelPtr& model);

// b_k(Lambda) for k = 0..max_degree from perfectness of the energy
std::vector<long> betti_series(const ClosedGeodesicModel& model, int max_degree, Coeff coeff);
long betti_number(const ClosedGeodesicModel& model, int k, Coeff coeff);

struct TableEntry {
    std::string product;
    Variant variant = Variant::homology;
    int degree = 0;
    bool nonzero = false;
    bool decided = true;
    std::string value;  // target class, "0", or "undetermined"
    std::string rule;
};

struct NondegenerateTable {
    int r = 2;
    int n = 2;
    int lambda1 = 0;
    int lambda_r = 0;
    std::vector<TableEntry> entries;
};

// level products of the local classes sigma_1, sigma_bar_1, tau_bar_1, tau_1
// of a nondegenerate orbit; lambda[m-1] is the index of the m-th iterate
NondegenerateTable nondegenerate_table(const std::vector<int>& lambda, int n, int lambda1, int r);

struct NilpotenceResult {
    Variant variant = Variant::homology;
    int degree = 0;
    int checked_through = 0;
    // least m with lambda_m outside {b-1, b}; empty when not decided
    std::optional<int> vanishing_power;
    // same predicate with b = m i - (m-1)(n-1)
    std::optional<int> printed_vanishing_power;
    bool discrepancy = false;
};

// degree law b(m) = m i - (m-1) n for homology, m i + (m-1)(n-1) for cohomology
int power_degree(Variant v, int i, int n, int m);
int printed_power_degree(int i, int n, int m);
NilpotenceResult nilpotence_check(const std::vector<int>& lambda, int degree, int n, Variant v);

int eliashberg_bound(int d1, int d2, int n, int g);
// maximal degree of an essential homology class at level r ell
int level_degree(const ClosedGeodesicModel& model, int r);
// maximal degree of the ring generators Psi(a T)
int generator_degree(const ClosedGeodesicModel& model);

struct EliashbergRow {
    int r1 = 0;
    int r2 = 0;
    int d_sum = 0;
    int bound = 0;
    bool holds = false;
};
std::vector<EliashbergRow> eliashberg_check(const ClosedGeodesicModel& model, int max_total);

}  // namespace closedgeo
