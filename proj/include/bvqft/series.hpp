#pragma once

#include <climits>
#include <compare>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bvqft/graded.hpp"

namespace bvqft {

inline int par(int g) { return ((g % 2) + 2) % 2; }

struct DivisibilityError : std::runtime_error {
    explicit DivisibilityError(const std::string& what) : std::runtime_error(what) {}
};
struct GhostError : std::logic_error {
    explicit GhostError(const std::string& what) : std::logic_error(what) {}
};

// Monomial in the affine coordinates dual to the cohomology basis, stored
// sorted by basis index. Coordinates dual to odd classes square to zero.
struct Word {
    std::vector<int> a;

    size_t len() const { return a.size(); }
    auto operator<=>(const Word& o) const {
        if (a.size() != o.a.size()) return a.size() <=> o.a.size();
        return a <=> o.a;
    }
    bool operator==(const Word& o) const = default;
    std::string str(const std::vector<std::string>& labels) const {
        if (a.empty()) return "1";
        std::string s;
        for (int i : a) {
            if (!s.empty()) s += "*";
            s += "t^" + labels[static_cast<size_t>(i)];
        }
        return s;
    }
};

// Normalizes a letter sequence into (sorted word, Koszul sign); a repeated
// odd letter kills the monomial.
struct NormWord {
    Word w;
    int sign = 1;
    bool zero = false;
};

inline NormWord normalize_word(std::vector<int> seq, const std::vector<int>& hghosts) {
    NormWord out;
    int sign = 1;
    // insertion sort tracking parity swaps
    for (size_t i = 1; i < seq.size(); ++i) {
        for (size_t j = i; j > 0 && seq[j] < seq[j - 1]; --j) {
            if (par(hghosts[static_cast<size_t>(seq[j])]) && par(hghosts[static_cast<size_t>(seq[j - 1])]))
                sign = -sign;
            std::swap(seq[j], seq[j - 1]);
        }
    }
    for (size_t i = 1; i < seq.size(); ++i)
        if (seq[i] == seq[i - 1] && par(hghosts[static_cast<size_t>(seq[i])])) {
            out.zero = true;
            return out;
        }
    out.w.a = std::move(seq);
    out.sign = sign;
    return out;
}

// Merge of two sorted words; sign counts odd-odd transpositions needed to
// interleave w into u from the right.
inline NormWord merge_words(const Word& u, const Word& w, const std::vector<int>& hghosts) {
    std::vector<int> seq = u.a;
    seq.insert(seq.end(), w.a.begin(), w.a.end());
    return normalize_word(std::move(seq), hghosts);
}

// Sum of ghost numbers of the classes behind the letters; the ghost of the
// monomial itself is the negative of this.
inline int word_class_ghost(const Word& w, const std::vector<int>& hghosts) {
    int s = 0;
    for (int i : w.a) s += hghosts[static_cast<size_t>(i)];
    return s;
}
inline int word_par(const Word& w, const std::vector<int>& hghosts) {
    return par(word_class_ghost(w, hghosts));
}

struct TKey {
    Word w;
    int h = 0;  // power of the formal deformation parameter
    auto operator<=>(const TKey&) const = default;
};

constexpr int kNoCap = INT_MAX;

// Truncation window: words of length > t_order and powers above hbar_cap are
// discarded; a nonzero coefficient produced below hbar_min is an error at the
// point of use, never silently dropped.
struct Truncation {
    int t_order = kNoCap;
    int hbar_min = INT_MIN;
    int hbar_cap = kNoCap;

    static Truncation meet(const Truncation& a, const Truncation& b) {
        Truncation t;
        t.t_order = std::min(a.t_order, b.t_order);
        t.hbar_cap = std::min(a.hbar_cap, b.hbar_cap);
        t.hbar_min = std::max(a.hbar_min, b.hbar_min);
        return t;
    }
};

// Series with graded-coordinate words and integer powers of the deformation
// parameter; Coef is CVec (values in the underlying complex) or Rat.
template <class Coef>
struct Series {
    int ghost = 0;
    int tmax = kNoCap;  // retained word length
    int hmax = kNoCap;  // retained hbar power (kNoCap when exact)
    std::map<TKey, Coef> terms;

    bool zero() const { return terms.empty(); }
    void add_term(const TKey& k, const Coef& v) {
        if (coef_zero(v)) return;
        if (static_cast<int>(k.w.len()) > tmax || k.h > hmax) return;
        auto [it, fresh] = terms.try_emplace(k, v);
        if (!fresh) {
            coef_add(it->second, v);
            if (coef_zero(it->second)) terms.erase(it);
        }
    }
    int hmin_present() const {
        int m = kNoCap;
        for (auto& [k, v] : terms) m = std::min(m, k.h);
        return m;
    }
    int hmax_present() const {
        int m = INT_MIN;
        for (auto& [k, v] : terms) m = std::max(m, k.h);
        return m;
    }

    static bool coef_zero(const CVec& v) { return v.zero(); }
    static bool coef_zero(const Rat& v) { return v == 0; }
    static void coef_add(CVec& a, const CVec& b) { a += b; }
    static void coef_add(Rat& a, const Rat& b) { a += b; }
};

using Element = Series<CVec>;
using ScalarSeries = Series<Rat>;

template <class Coef>
Series<Coef> series_zero(int ghost, int tmax = kNoCap, int hmax = kNoCap) {
    Series<Coef> s;
    s.ghost = ghost;
    s.tmax = tmax;
    s.hmax = hmax;
    return s;
}

template <class Coef>
Series<Coef> operator*(const Rat& s, Series<Coef> e) {
    if (s == 0) {
        e.terms.clear();
        return e;
    }
    for (auto& [k, v] : e.terms) v = s * v;
    return e;
}

namespace detail {
inline Rat scale_coef(const Rat& s, const Rat& v) { return s * v; }
inline CVec scale_coef(const Rat& s, const CVec& v) { return s * v; }
}  // namespace detail

template <class Coef>
Series<Coef> operator+(const Series<Coef>& a, const Series<Coef>& b) {
    if (a.zero() && b.zero()) {
        Series<Coef> r = a;
        r.tmax = std::min(a.tmax, b.tmax);
        r.hmax = std::min(a.hmax, b.hmax);
        return r;
    }
    if (!a.zero() && !b.zero() && a.ghost != b.ghost) throw GhostError("series addition: ghost mismatch");
    Series<Coef> r = series_zero<Coef>(a.zero() ? b.ghost : a.ghost, std::min(a.tmax, b.tmax),
                                       std::min(a.hmax, b.hmax));
    for (auto& [k, v] : a.terms) r.add_term(k, v);
    for (auto& [k, v] : b.terms) r.add_term(k, v);
    return r;
}

template <class Coef>
Series<Coef> operator-(const Series<Coef>& a, const Series<Coef>& b) {
    return a + Rat(-1) * b;
}

template <class Coef>
bool operator==(const Series<Coef>& a, const Series<Coef>& b) {
    return a.terms == b.terms;
}

// Multiplies by an integer power of the deformation parameter.
template <class Coef>
Series<Coef> hbar_shift(const Series<Coef>& e, int k) {
    Series<Coef> r = series_zero<Coef>(e.ghost, e.tmax, e.hmax == kNoCap ? kNoCap : e.hmax + k);
    for (auto& [key, v] : e.terms) r.add_term({key.w, key.h + k}, v);
    return r;
}

// Exact division: every retained coefficient must sit at power >= 1.
template <class Coef>
Series<Coef> hbar_divide(const Series<Coef>& e, const std::vector<std::string>& labels) {
    for (auto& [key, v] : e.terms)
        if (key.h < 1)
            throw DivisibilityError("not divisible: nonzero coefficient at hbar^" + std::to_string(key.h) +
                                    " on monomial " + key.w.str(labels));
    return hbar_shift(e, -1);
}

template <class Coef>
Series<Coef> truncate_t(const Series<Coef>& e, int len) {
    Series<Coef> r = series_zero<Coef>(e.ghost, std::min(e.tmax, len), e.hmax);
    for (auto& [key, v] : e.terms)
        if (static_cast<int>(key.w.len()) <= len) r.add_term(key, v);
    return r;
}

// Part of fixed word length (the series stays a series; only terms kept).
template <class Coef>
Series<Coef> word_part(const Series<Coef>& e, int len) {
    Series<Coef> r = series_zero<Coef>(e.ghost, e.tmax, e.hmax);
    for (auto& [key, v] : e.terms)
        if (static_cast<int>(key.w.len()) == len) r.add_term(key, v);
    return r;
}

template <class Coef>
Series<Coef> classical_part(const Series<Coef>& e) {
    Series<Coef> r = series_zero<Coef>(e.ghost, e.tmax, 0);
    for (auto& [key, v] : e.terms)
        if (key.h == 0) r.add_term(key, v);
    r.hmax = e.hmax;
    return r;
}

// Coefficient at the empty word, as a map from hbar power to coefficient.
template <class Coef>
std::map<int, Coef> eval_t0(const Series<Coef>& e) {
    std::map<int, Coef> out;
    for (auto& [key, v] : e.terms)
        if (key.w.len() == 0) out[key.h] = v;
    return out;
}

template <class Coef>
std::map<int, Coef> word_coeff(const Series<Coef>& e, const Word& w) {
    std::map<int, Coef> out;
    for (auto& [key, v] : e.terms)
        if (key.w == w) out[key.h] = v;
    return out;
}

// Left derivative with respect to the coordinate dual to class alpha.
template <class Coef>
Series<Coef> partial(int alpha, const Series<Coef>& e, const std::vector<int>& hghosts) {
    Series<Coef> r = series_zero<Coef>(e.ghost + hghosts[static_cast<size_t>(alpha)],
                                       e.tmax == kNoCap ? kNoCap : e.tmax - 1, e.hmax);
    const bool alpha_odd = par(hghosts[static_cast<size_t>(alpha)]) != 0;
    for (auto& [key, v] : e.terms) {
        int sgn = 1;
        for (size_t i = 0; i < key.w.a.size(); ++i) {
            int letter = key.w.a[i];
            if (letter == alpha) {
                Word rest;
                rest.a = key.w.a;
                rest.a.erase(rest.a.begin() + static_cast<long>(i));
                r.add_term({rest, key.h}, detail::scale_coef(Rat(sgn), v));
            }
            if (alpha_odd && par(hghosts[static_cast<size_t>(letter)])) sgn = -sgn;
        }
    }
    return r;
}

// Derivative twisted by the ghost parity of the direction.
template <class Coef>
Series<Coef> partial_bar(int alpha, const Series<Coef>& e, const std::vector<int>& hghosts) {
    Series<Coef> d = partial(alpha, e, hghosts);
    return par(hghosts[static_cast<size_t>(alpha)]) ? Rat(-1) * d : d;
}

// Euler grading operator sum_rho |e_rho| t^rho d/dt^rho; each monomial is an
// eigenvector with eigenvalue word_class_ghost.
template <class Coef>
Series<Coef> euler_apply(const Series<Coef>& e, const std::vector<int>& hghosts) {
    Series<Coef> r = series_zero<Coef>(e.ghost, e.tmax, e.hmax);
    for (auto& [key, v] : e.terms) {
        int wgt = word_class_ghost(key.w, hghosts);
        if (wgt != 0) r.add_term(key, detail::scale_coef(Rat(wgt), v));
    }
    return r;
}

// Product of scalar series (graded-commutative in the coordinate letters).
ScalarSeries mul(const ScalarSeries& a, const ScalarSeries& b, const std::vector<int>& hghosts);

// Left multiplication of a series by a single coordinate letter.
template <class Coef>
Series<Coef> mul_t_left(int alpha, const Series<Coef>& e, const std::vector<int>& hghosts) {
    Series<Coef> r = series_zero<Coef>(e.ghost - hghosts[static_cast<size_t>(alpha)], e.tmax, e.hmax);
    Word single;
    single.a = {alpha};
    for (auto& [key, v] : e.terms) {
        if (static_cast<int>(key.w.len()) + 1 > r.tmax) continue;
        NormWord m = merge_words(single, key.w, hghosts);
        if (m.zero) continue;
        r.add_term({m.w, key.h}, detail::scale_coef(Rat(m.sign), v));
    }
    return r;
}

// Graded-symmetric pair-indexed family with canonical storage on i <= j.
enum class Sym2 { Symmetric, Antisymmetric };

template <class T>
class PairFam {
public:
    PairFam() = default;
    PairFam(Sym2 sym, std::vector<int> hghosts) : sym_(sym), gh_(std::move(hghosts)) {}

    // extra indices (if any) are carried verbatim after the symmetric pair
    void set(std::vector<int> key, const T& value) {
        int s = canon(key);
        if (s == 0) {
            if (!is_zero(value)) throw GhostError("forced-zero diagonal entry set to nonzero");
            return;
        }
        if (is_zero(value))
            v_.erase(key);
        else
            v_[key] = s < 0 ? Rat(-1) * value : value;
    }
    T get(std::vector<int> key) const {
        int s = canon(key);
        if (s == 0) return T{};
        auto it = v_.find(key);
        if (it == v_.end()) return T{};
        return s < 0 ? Rat(-1) * it->second : it->second;
    }
    const std::map<std::vector<int>, T>& raw() const { return v_; }

private:
    static bool is_zero(const Rat& r) { return r == 0; }
    template <class S>
    static bool is_zero(const Series<S>& s) {
        return s.zero();
    }
    // returns 0 when the diagonal is forced to vanish, else the sign picked up
    int canon(std::vector<int>& key) const {
        int i = key[0], j = key[1];
        int gij = par(gh_[static_cast<size_t>(i)]) & par(gh_[static_cast<size_t>(j)]);
        if (i == j) {
            bool forced = (sym_ == Sym2::Symmetric) ? gij != 0 : gij == 0;
            return forced ? 0 : 1;
        }
        if (i <= j) return 1;
        std::swap(key[0], key[1]);
        int s = gij ? -1 : 1;
        if (sym_ == Sym2::Antisymmetric) s = -s;
        return s;
    }

    Sym2 sym_ = Sym2::Symmetric;
    std::vector<int> gh_;
    std::map<std::vector<int>, T> v_;
};

}  // namespace bvqft
