#pragma once

#include <optional>

#include "bvqft/report.hpp"
#include "bvqft/series.hpp"

namespace bvqft {

// Functional on the complex with values in scalars, one coefficient vector
// per power of the deformation parameter; zero outside a single ghost degree.
struct CycleSpec {
    int dimension = 0;                  // functional carries ghost -dimension
    std::vector<CVec> levels;           // level l coefficients
    Rat pair(int level, const CVec& v) const {
        Rat s(0);
        if (level < 0 || level >= static_cast<int>(levels.size())) return s;
        for (auto& [i, x] : levels[static_cast<size_t>(level)].c) {
            auto it = v.c.find(i);
            if (it != v.c.end()) s += x * it->second;
        }
        return s;
    }
    int top_level() const { return static_cast<int>(levels.size()) - 1; }
};

using IntegralSpec = CycleSpec;

// A finite-dimensional BV QFT algebra instance: graded basis with unit,
// structure constants of a graded-commutative product, and a differential
// given as finitely many matrices per power of the deformation parameter.
struct AlgebraSpec {
    std::string name;
    GradedBasis basis;
    std::map<std::pair<int, int>, CVec> product;
    std::vector<LinearMap> K;  // levels 0..L, each of ghost +1
    std::optional<CycleSpec> cycle;
    std::optional<IntegralSpec> integral;
    Truncation trunc;

    // level l of the induced odd bracket on basis pairs, built from level l+1
    // of the differential; filled once by finalize().
    std::vector<std::map<std::pair<int, int>, CVec>> bracket_cache;

    int dim() const { return basis.dim(); }
    int k_levels() const { return static_cast<int>(K.size()); }
    int bracket_levels() const { return static_cast<int>(bracket_cache.size()); }

    CVec mul_basis(int i, int j) const {
        auto it = product.find({i, j});
        return it == product.end() ? CVec{} : it->second;
    }
    CVec mul_vec(const CVec& a, const CVec& b) const {
        CVec out;
        for (auto& [i, x] : a.c)
            for (auto& [j, y] : b.c) {
                auto it = product.find({i, j});
                if (it == product.end()) continue;
                out += (x * y) * it->second;
            }
        return out;
    }
    CVec apply_K_level(int level, const CVec& v) const {
        if (level < 0 || level >= k_levels()) return CVec{};
        return K[static_cast<size_t>(level)].apply(v);
    }
    CVec bracket_basis(int level, int i, int j) const {
        if (level < 0 || level >= bracket_levels()) return CVec{};
        auto it = bracket_cache[static_cast<size_t>(level)].find({i, j});
        return it == bracket_cache[static_cast<size_t>(level)].end() ? CVec{} : it->second;
    }

    // Precomputes the bracket tables. Requires the level-0 derivation law to
    // hold; validate_algebra reports the precise failure otherwise.
    void finalize();
};

// Exhaustive axiom validation over basis tuples: product laws, unit laws,
// square-zero differential, derivation law at level zero, bracket laws, and
// the cycle/integral axioms when present.
Ledger validate_algebra(const AlgebraSpec& spec);

// Separate entry point for the integral axioms (also run by validate_algebra
// when an integral is present). Flags the semi-classical case, where every
// level of the differential is individually skew to the pairing.
Ledger validate_integral(const AlgebraSpec& spec, const IntegralSpec& integral, bool* semi_classical = nullptr);

// ---- operations on series-valued elements -------------------------------

// Element words live over the class basis of the cohomology (the coordinate
// letters), while values live over the algebra basis; the context carries
// both sides.
struct ElemCtx {
    const AlgebraSpec* spec = nullptr;
    std::vector<int> hghosts;
    std::vector<std::string> hlabels;

    const AlgebraSpec& alg() const { return *spec; }
};

// Graded product of two elements (values multiplied through the structure
// constants, letters merged with Koszul signs).
Element mul(const ElemCtx& cx, const Element& a, const Element& b);

// Scalar-series times element.
Element mul(const ElemCtx& cx, const ScalarSeries& a, const Element& b);

// Differential acting on an element; letters are passed with the parity sign
// of the monomial.
Element apply_K(const ElemCtx& cx, const Element& e);
Element apply_Q(const ElemCtx& cx, const Element& e);

// Odd bracket extended to elements through the cached basis tables.
Element bv_bracket(const ElemCtx& cx, const Element& a, const Element& b);
// Level-zero part only (classical bracket), for classical elements.
Element bv_bracket_classical(const ElemCtx& cx, const Element& a, const Element& b);

// Twisted differentials along a solution element.
Element apply_K_theta(const ElemCtx& cx, const Element& theta, const Element& e);
Element apply_Q_theta(const ElemCtx& cx, const Element& theta_cl, const Element& e);

// Functional applied coefficient-wise to the values of an element.
ScalarSeries apply_cycle(const CycleSpec& cyc, const Element& e);

// Finite exponential sum for exp(-theta/hbar); theta must vanish at the
// origin and be a power series in the deformation parameter.
Element exp_neg_theta_over_hbar(const ElemCtx& cx, const Element& theta, int t_order);

// Unit of the algebra as an element.
Element unit_element(const AlgebraSpec& spec);

}  // namespace bvqft
