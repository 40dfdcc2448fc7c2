#include "closedgeo/graded_ring.hpp"

#include "closedgeo/errors.hpp"
#include "closedgeo/manifold.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>
#include <sstream>

namespace closedgeo {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

long parse_long(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(fmt::format("{}: expected an integer, got '{}'", where, s));
    }
}

}  // namespace

std::string to_string(Coeff c) { return c == Coeff::z2 ? "z2" : "z"; }

Coeff parse_coeff(const std::string& s) {
    if (s == "z2" || s == "Z2" || s == "Z/2") return Coeff::z2;
    if (s == "z" || s == "Z") return Coeff::z;
    throw ParseError(fmt::format("unknown coefficient mode '{}'", s));
}

int GradedRing::index_of(const std::string& element_name) const {
    for (int i = 0; i < size(); ++i)
        if (basis[std::size_t(i)].name == element_name) return i;
    return -1;
}

int GradedRing::top_degree() const {
    int t = 0;
    for (const auto& b : basis) t = std::max(t, b.degree);
    return t;
}

std::vector<int> GradedRing::betti() const {
    std::vector<int> b(std::size_t(top_degree() + 1), 0);
    for (const auto& e : basis)
        if (e.degree >= 0) ++b[std::size_t(e.degree)];
    return b;
}

GradedRing::Element GradedRing::element(int i) const {
    Element e = zero();
    e[std::size_t(i)] = 1;
    return e;
}

GradedRing::Element GradedRing::normalize(Element e) const {
    if (coeff == Coeff::z2)
        for (auto& c : e) c = ((c % 2) + 2) % 2;
    return e;
}

GradedRing::Element GradedRing::add(const Element& a, const Element& b) const {
    Element r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return normalize(std::move(r));
}

GradedRing::Element GradedRing::scale(const Element& a, long c) const {
    Element r = a;
    for (auto& x : r) x *= c;
    return normalize(std::move(r));
}

GradedRing::Element GradedRing::product(const Element& a, const Element& b) const {
    Element r = zero();
    for (int i = 0; i < size(); ++i) {
        if (a[std::size_t(i)] == 0) continue;
        for (int j = 0; j < size(); ++j) {
            if (b[std::size_t(j)] == 0) continue;
            const auto it = table.find({i, j});
            if (it == table.end()) continue;
            for (const auto& [k, c] : it->second) r[std::size_t(k)] += a[std::size_t(i)] * b[std::size_t(j)] * c;
        }
    }
    return normalize(std::move(r));
}

bool GradedRing::is_zero(const Element& a) const {
    return std::all_of(a.begin(), a.end(), [](long c) { return c == 0; });
}

std::optional<int> GradedRing::degree_of(const Element& a) const {
    std::optional<int> d;
    for (int i = 0; i < size(); ++i) {
        if (a[std::size_t(i)] == 0) continue;
        if (d && *d != basis[std::size_t(i)].degree) return std::nullopt;
        d = basis[std::size_t(i)].degree;
    }
    return d;
}

int GradedRing::commutation_sign(int deg_i, int deg_j) const {
    if (coeff == Coeff::z2) return 1;
    return ((deg_i + shift) * (deg_j + shift)) % 2 == 0 ? 1 : -1;
}

std::string GradedRing::format(const Element& a) const {
    std::string out;
    for (int i = 0; i < size(); ++i) {
        const long c = a[std::size_t(i)];
        if (c == 0) continue;
        if (!out.empty()) out += c < 0 ? " - " : " + ";
        else if (c < 0) out += "-";
        if (std::abs(c) != 1) out += fmt::format("{}*", std::abs(c));
        out += basis[std::size_t(i)].name;
    }
    return out.empty() ? "0" : out;
}

void GradedRing::validate() const {
    if (basis.empty()) throw ParseError(fmt::format("ring '{}' has an empty basis", name));
    const int n = size();
    auto nm = [&](int i) { return basis[std::size_t(i)].name; };
    for (const auto& [ij, terms] : table)
        for (const auto& [k, c] : terms) {
            if (normalize(Element{c})[0] == 0) continue;
            const int want = basis[std::size_t(ij.first)].degree + basis[std::size_t(ij.second)].degree + shift;
            if (basis[std::size_t(k)].degree != want)
                throw AxiomViolation(fmt::format("ring '{}': {}*{} -> {} breaks the degree law (degree {} expected)", name,
                                                 nm(ij.first), nm(ij.second), nm(k), want));
        }
    if (unit) {
        const Element u = element(*unit);
        if (basis[std::size_t(*unit)].degree + shift != 0)
            throw AxiomViolation(fmt::format("ring '{}': unit {} has the wrong degree", name, nm(*unit)));
        for (int i = 0; i < n; ++i) {
            const Element e = element(i);
            if (product(u, e) != e || product(e, u) != e)
                throw AxiomViolation(fmt::format("ring '{}': unit {} fails on {}", name, nm(*unit), nm(i)));
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Element ei = element(i), ej = element(j);
            const Element ij = product(ei, ej);
            const Element ji = product(ej, ei);
            if (ji != scale(ij, commutation_sign(basis[std::size_t(i)].degree, basis[std::size_t(j)].degree)))
                throw AxiomViolation(fmt::format("ring '{}': graded commutativity fails for ({}, {})", name, nm(i), nm(j)));
            for (int k = 0; k < n; ++k) {
                const Element ek = element(k);
                if (product(ij, ek) != product(ei, product(ej, ek)))
                    throw AxiomViolation(
                        fmt::format("ring '{}': associativity fails for ({}, {}, {})", name, nm(i), nm(j), nm(k)));
            }
        }
}

GradedRing GradedRing::reduce_mod2() const {
    GradedRing r = *this;
    r.coeff = Coeff::z2;
    for (auto& [ij, terms] : r.table) {
        std::vector<std::pair<int, long>> kept;
        for (const auto& [k, c] : terms)
            if (c % 2 != 0) kept.push_back({k, 1});
        terms = kept;
    }
    return r;
}

GradedRing parse_ring(const std::string& text, const std::string& origin) {
    GradedRing ring;
    std::vector<std::pair<std::string, int>> product_lines;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    bool have_coeff = false;
    std::string unit_name;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto colon = line.find(':');
        const std::string where = fmt::format("{}:{}", origin, line_no);
        if (colon == std::string::npos) throw ParseError(fmt::format("{}: expected 'key: value'", where));
        const std::string key = trim(line.substr(0, colon)), value = trim(line.substr(colon + 1));
        if (key == "name") {
            ring.name = value;
        } else if (key == "coeff") {
            try {
                ring.coeff = parse_coeff(value);
            } catch (const ParseError&) {
                throw ParseError(fmt::format("{}: unknown coefficient mode '{}'", where, value));
            }
            have_coeff = true;
        } else if (key == "shift") {
            ring.shift = int(parse_long(value, where));
        } else if (key == "basis") {
            std::istringstream f(value);
            std::string nm, deg, extra;
            if (!(f >> nm >> deg) || (f >> extra)) throw ParseError(fmt::format("{}: expected 'basis: name degree'", where));
            if (ring.index_of(nm) >= 0) throw ParseError(fmt::format("{}: duplicate basis element '{}'", where, nm));
            ring.basis.push_back({nm, int(parse_long(deg, where))});
        } else if (key == "unit") {
            unit_name = value;
        } else if (key == "product") {
            product_lines.push_back({value, line_no});
        } else {
            throw ParseError(fmt::format("{}: unknown key '{}'", where, key));
        }
    }
    if (ring.basis.empty()) throw ParseError(fmt::format("{}: ring has an empty basis", origin));
    if (!have_coeff) throw ParseError(fmt::format("{}: missing 'coeff'", origin));
    if (!unit_name.empty()) {
        const int u = ring.index_of(unit_name);
        if (u < 0) throw ParseError(fmt::format("{}: unit '{}' is not a basis element", origin, unit_name));
        ring.unit = u;
    }
    for (const auto& [value, ln] : product_lines) {
        const std::string where = fmt::format("{}:{}", origin, ln);
        const auto arrow = value.find("->");
        if (arrow == std::string::npos) throw ParseError(fmt::format("{}: expected 'product: a b -> k:c ...'", where));
        std::istringstream lhs(value.substr(0, arrow)), rhs(value.substr(arrow + 2));
        std::string a, b, extra;
        if (!(lhs >> a >> b) || (lhs >> extra)) throw ParseError(fmt::format("{}: expected two factors", where));
        const int i = ring.index_of(a), j = ring.index_of(b);
        if (i < 0 || j < 0) throw ParseError(fmt::format("{}: unknown basis element in '{} {}'", where, a, b));
        if (ring.table.count({i, j})) throw ParseError(fmt::format("{}: product {} {} given twice", where, a, b));
        std::vector<std::pair<int, long>> terms;
        std::string term;
        while (rhs >> term) {
            if (term == "0") continue;
            const auto c = term.find(':');
            const std::string kn = term.substr(0, c);
            const int k = ring.index_of(kn);
            if (k < 0) throw ParseError(fmt::format("{}: unknown basis element '{}'", where, kn));
            const long coeff = c == std::string::npos ? 1 : parse_long(term.substr(c + 1), where);
            terms.push_back({k, coeff});
        }
        ring.table[{i, j}] = terms;
    }
    return ring;
}

GradedRing load_ring(const std::string& path) {
    GradedRing r = parse_ring(read_text_file(path), path);
    r.validate();
    return r;
}

}  // namespace closedgeo
