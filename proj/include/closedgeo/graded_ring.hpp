#pragma once
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace closedgeo {

enum class Coeff { z2, z };

std::string to_string(Coeff c);
Coeff parse_coeff(const std::string& s);

struct BasisElement {
    std::string name;
    int degree = 0;
};

// Finite graded ring given by structure constants on a basis. The product of
// basis elements i and j lives in degree deg_i + deg_j + shift, and
//   e_j e_i = (-1)^{(deg_i + shift)(deg_j + shift)} e_i e_j,
// which covers cup rings (shift 0) and intersection rings of a closed
// d-manifold (shift -d) with one rule.
class GradedRing {
public:
    using Element = std::vector<long>;

    std::string name;
    Coeff coeff = Coeff::z2;
    int shift = 0;
    std::vector<BasisElement> basis;
    std::optional<int> unit;
    // (i, j) -> list of (k, coefficient)
    std::map<std::pair<int, int>, std::vector<std::pair<int, long>>> table;

    int size() const { return int(basis.size()); }
    int index_of(const std::string& element_name) const;
    int top_degree() const;
    // Betti numbers by degree, 0..top_degree
    std::vector<int> betti() const;

    Element zero() const { return Element(basis.size(), 0); }
    Element element(int i) const;
    Element normalize(Element e) const;
    Element add(const Element& a, const Element& b) const;
    Element scale(const Element& a, long c) const;
    Element product(const Element& a, const Element& b) const;
    bool is_zero(const Element& a) const;
    // common degree of the nonzero components; empty for 0 or mixed degrees
    std::optional<int> degree_of(const Element& a) const;
    int commutation_sign(int deg_i, int deg_j) const;
    std::string format(const Element& a) const;

    // degree law, unit, associativity and graded commutativity on all basis
    // tuples; throws AxiomViolation naming the failing tuple
    void validate() const;
    // same ring read with Z/2 coefficients
    GradedRing reduce_mod2() const;
};

GradedRing parse_ring(const std::string& text, const std::string& origin = "<string>");
// parse and validate
GradedRing load_ring(const std::string& path);

}  // namespace closedgeo
