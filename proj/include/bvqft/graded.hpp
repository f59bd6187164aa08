#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bvqft/rational.hpp"

namespace bvqft {

// Ordered homogeneous basis of a Z-graded vector space. The ordering is fixed
// at construction and anchors every deterministic choice downstream.
struct GradedBasis {
    std::vector<std::string> labels;
    std::vector<int> ghosts;
    int unit = -1;  // position of the algebra unit, -1 when not applicable
    std::map<std::string, int> index;

    int dim() const { return static_cast<int>(labels.size()); }
    int ghost(int i) const { return ghosts.at(static_cast<size_t>(i)); }

    int add(const std::string& label, int ghost_number) {
        if (index.count(label)) throw std::invalid_argument("duplicate basis label: " + label);
        int pos = dim();
        labels.push_back(label);
        ghosts.push_back(ghost_number);
        index[label] = pos;
        return pos;
    }
    int at(const std::string& label) const {
        auto it = index.find(label);
        if (it == index.end()) throw std::invalid_argument("unknown basis label: " + label);
        return it->second;
    }
};

// Sign of a permutation acting on symbols of the given ghost parities:
// product over inverted pairs (i<j with perm[i]>perm[j]) of (-1)^{g_i g_j}.
inline int koszul_sign(const std::vector<int>& perm, const std::vector<int>& ghosts) {
    int sign = 1;
    const size_t k = perm.size();
    for (size_t i = 0; i < k; ++i)
        for (size_t j = i + 1; j < k; ++j)
            if (perm[i] > perm[j] && (ghosts[i] & 1) && (ghosts[j] & 1)) sign = -sign;
    return sign;
}

// Sparse vector over a fixed basis.
struct CVec {
    std::map<int, Rat> c;

    bool zero() const { return c.empty(); }
    void set(int i, const Rat& v) {
        if (v == 0)
            c.erase(i);
        else
            c[i] = v;
    }
    Rat get(int i) const {
        auto it = c.find(i);
        return it == c.end() ? Rat(0) : it->second;
    }
    void add(int i, const Rat& v) {
        if (v == 0) return;
        Rat& slot = c[i];
        slot += v;
        if (slot == 0) c.erase(i);
    }
    CVec& operator+=(const CVec& o) {
        for (auto& [i, v] : o.c) add(i, v);
        return *this;
    }
    CVec& operator-=(const CVec& o) {
        for (auto& [i, v] : o.c) add(i, -v);
        return *this;
    }
    CVec& operator*=(const Rat& s) {
        if (s == 0) {
            c.clear();
            return *this;
        }
        for (auto& [i, v] : c) v *= s;
        return *this;
    }
    friend CVec operator+(CVec a, const CVec& b) { return a += b; }
    friend CVec operator-(CVec a, const CVec& b) { return a -= b; }
    friend CVec operator*(const Rat& s, CVec a) { return a *= s; }
    friend bool operator==(const CVec& a, const CVec& b) { return a.c == b.c; }
    friend bool operator<(const CVec& a, const CVec& b) { return a.c < b.c; }

    static CVec unit(int i, const Rat& v = Rat(1)) {
        CVec r;
        r.set(i, v);
        return r;
    }
    // Ghost number of a homogeneous vector; throws if components mix degrees.
    int ghost(const GradedBasis& basis) const {
        if (c.empty()) throw std::logic_error("ghost of zero vector");
        int g = basis.ghost(c.begin()->first);
        for (auto& [i, v] : c)
            if (basis.ghost(i) != g) throw std::logic_error("inhomogeneous vector");
        return g;
    }
};

// Sparse matrix with a ghost shift; entry (r,c) maps source c to target r.
struct LinearMap {
    int rows = 0;
    int cols = 0;
    int ghost_shift = 0;
    std::map<std::pair<int, int>, Rat> a;

    bool zero() const { return a.empty(); }
    void set(int r, int c, const Rat& v) {
        if (v == 0)
            a.erase({r, c});
        else
            a[{r, c}] = v;
    }
    void add(int r, int c, const Rat& v) {
        if (v == 0) return;
        Rat& slot = a[{r, c}];
        slot += v;
        if (slot == 0) a.erase({r, c});
    }
    Rat get(int r, int c) const {
        auto it = a.find({r, c});
        return it == a.end() ? Rat(0) : it->second;
    }
    CVec apply(const CVec& v) const {
        CVec out;
        for (auto& [rc, x] : a) {
            auto it = v.c.find(rc.second);
            if (it != v.c.end()) out.add(rc.first, x * it->second);
        }
        return out;
    }
    CVec column(int c) const {
        CVec out;
        for (auto& [rc, x] : a)
            if (rc.second == c) out.set(rc.first, x);
        return out;
    }
    friend bool operator==(const LinearMap& x, const LinearMap& y) { return x.a == y.a; }
};

}  // namespace bvqft
