#pragma once

#include <optional>
#include <vector>

#include "bvqft/graded.hpp"

namespace bvqft {

// Dense exact matrix used by the elimination routines. Desk-scale dimensions
// keep dense Gaussian elimination cheap; pivoting is by first nonzero column
// in the fixed order, never by magnitude, so results are deterministic.
struct DenseMat {
    int rows = 0, cols = 0;
    std::vector<Rat> a;  // row-major

    DenseMat() = default;
    DenseMat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, Rat(0)) {}
    Rat& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    const Rat& at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
};

// Row-reduced echelon form with recorded pivot columns.
struct Rref {
    DenseMat m;
    std::vector<int> pivot_cols;
    int rank() const { return static_cast<int>(pivot_cols.size()); }
};

inline Rref rref(DenseMat m) {
    Rref out;
    int r = 0;
    for (int c = 0; c < m.cols && r < m.rows; ++c) {
        int piv = -1;
        for (int i = r; i < m.rows; ++i)
            if (m.at(i, c) != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        if (piv != r)
            for (int j = 0; j < m.cols; ++j) std::swap(m.at(piv, j), m.at(r, j));
        Rat inv = 1 / m.at(r, c);
        for (int j = c; j < m.cols; ++j) m.at(r, j) *= inv;
        for (int i = 0; i < m.rows; ++i) {
            if (i == r || m.at(i, c) == 0) continue;
            Rat f = m.at(i, c);
            for (int j = c; j < m.cols; ++j) m.at(i, j) -= f * m.at(r, j);
        }
        out.pivot_cols.push_back(c);
        ++r;
    }
    out.m = std::move(m);
    return out;
}

// Solver for A x = b with canonical solutions: echelon back-substitution with
// every free variable set to zero. Also provides the canonical kernel basis.
class LinSolve {
public:
    explicit LinSolve(DenseMat A) : A_(std::move(A)), red_(rref(A_)) {}

    int rank() const { return red_.rank(); }
    int cols() const { return A_.cols; }

    // Canonical preimage, or nullopt (with residual) when b is outside the image.
    std::optional<std::vector<Rat>> solve(const std::vector<Rat>& b) const {
        // Reduce b by the recorded row operations: redo elimination on [A|b]
        // against the stored echelon form would lose determinism bookkeeping,
        // so run a fresh reduction of the augmented system instead.
        DenseMat aug(A_.rows, A_.cols + 1);
        for (int i = 0; i < A_.rows; ++i) {
            for (int j = 0; j < A_.cols; ++j) aug.at(i, j) = A_.at(i, j);
            aug.at(i, A_.cols) = b[static_cast<size_t>(i)];
        }
        Rref r = rref(std::move(aug));
        std::vector<Rat> x(static_cast<size_t>(A_.cols), Rat(0));
        for (size_t k = 0; k < r.pivot_cols.size(); ++k) {
            if (r.pivot_cols[k] == A_.cols) return std::nullopt;  // pivot in b column
            x[static_cast<size_t>(r.pivot_cols[k])] = r.m.at(static_cast<int>(k), A_.cols);
        }
        return x;
    }

    // Canonical kernel basis (one vector per free column of the echelon form).
    std::vector<std::vector<Rat>> kernel_basis() const {
        std::vector<std::vector<Rat>> out;
        std::vector<bool> is_pivot(static_cast<size_t>(A_.cols), false);
        for (int c : red_.pivot_cols) is_pivot[static_cast<size_t>(c)] = true;
        for (int c = 0; c < A_.cols; ++c) {
            if (is_pivot[static_cast<size_t>(c)]) continue;
            std::vector<Rat> v(static_cast<size_t>(A_.cols), Rat(0));
            v[static_cast<size_t>(c)] = 1;
            for (size_t k = 0; k < red_.pivot_cols.size(); ++k)
                v[static_cast<size_t>(red_.pivot_cols[k])] = -red_.m.at(static_cast<int>(k), c);
            out.push_back(std::move(v));
        }
        return out;
    }

private:
    DenseMat A_;
    Rref red_;
};

// Canonical echelon basis of the span of the given vectors (ambient dim n).
inline std::vector<CVec> span_basis(const std::vector<CVec>& vecs, int n) {
    DenseMat m(static_cast<int>(vecs.size()), n);
    for (size_t i = 0; i < vecs.size(); ++i)
        for (auto& [j, v] : vecs[i].c) m.at(static_cast<int>(i), j) = v;
    Rref r = rref(std::move(m));
    std::vector<CVec> out;
    for (int i = 0; i < r.rank(); ++i) {
        CVec v;
        for (int j = 0; j < n; ++j)
            if (r.m.at(i, j) != 0) v.set(j, r.m.at(i, j));
        out.push_back(std::move(v));
    }
    return out;
}

inline int span_rank(const std::vector<CVec>& vecs, int n) {
    DenseMat m(static_cast<int>(vecs.size()), n);
    for (size_t i = 0; i < vecs.size(); ++i)
        for (auto& [j, v] : vecs[i].c) m.at(static_cast<int>(i), j) = v;
    return rref(std::move(m)).rank();
}

}  // namespace bvqft
