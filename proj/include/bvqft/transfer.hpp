#pragma once

#include <memory>

#include "bvqft/algebra.hpp"
#include "bvqft/linalg.hpp"
#include "bvqft/util.hpp"

namespace bvqft {

// Finite series over the deformation parameter with vector coefficients;
// used for both complex-valued and class-valued series.
struct HbarVec {
    std::map<int, CVec> lv;

    bool zero() const {
        for (auto& [l, v] : lv)
            if (!v.zero()) return false;
        return true;
    }
    CVec level(int l) const {
        auto it = lv.find(l);
        return it == lv.end() ? CVec{} : it->second;
    }
    void add(int l, const CVec& v) {
        if (v.zero()) return;
        auto [it, fresh] = lv.try_emplace(l, v);
        if (!fresh) {
            it->second += v;
            if (it->second.zero()) lv.erase(it);
        }
    }
    HbarVec& operator+=(const HbarVec& o) {
        for (auto& [l, v] : o.lv) add(l, v);
        return *this;
    }
    HbarVec& operator-=(const HbarVec& o) {
        for (auto& [l, v] : o.lv) add(l, Rat(-1) * v);
        return *this;
    }
    int top() const {
        int m = -1;
        for (auto& [l, v] : lv) m = std::max(m, l);
        return m;
    }
    HbarVec truncated(int cap) const {
        HbarVec r;
        for (auto& [l, v] : lv)
            if (l <= cap) r.add(l, v);
        return r;
    }
    friend bool operator==(const HbarVec& a, const HbarVec& b) { return a.lv == b.lv; }
};

// Cohomology of the classical differential with deterministic representative
// choices and the canonical decomposition v = f(class) + Q y. The section
// behind y can be perturbed linearly by kernel-valued terms via a seed, used
// to probe how downstream output depends on these choices.
class CohomologyData {
public:
    GradedBasis H;
    std::vector<CVec> reps;  // representative of each class, in complex coordinates

    static CohomologyData compute(const AlgebraSpec& spec);

    struct Dec {
        CVec cls;  // class coordinates
        CVec y;    // canonical preimage part
    };
    // v must be homogeneous and closed under the classical differential.
    Dec decompose(const AlgebraSpec& spec, const CVec& v) const;
    bool is_closed(const AlgebraSpec& spec, const CVec& v) const;

    CVec apply_reps(const CVec& h_coords) const {
        CVec out;
        for (auto& [i, x] : h_coords.c) out += x * reps[static_cast<size_t>(i)];
        return out;
    }

    void set_section_seed(const AlgebraSpec& spec, uint64_t seed);

private:
    struct DegreeData {
        std::vector<int> idx;        // complex basis positions in this degree
        std::vector<int> rep_cols;   // positions into H of the classes here
        std::vector<int> prev_idx;   // positions in the previous degree
        std::shared_ptr<LinSolve> solver;  // [reps | Q columns] system
        // section perturbation: functionals on this degree paired with kernel
        // vectors of the previous degree
        std::vector<std::pair<std::vector<Rat>, CVec>> pert;
    };
    std::map<int, DegreeData> degrees_;
};

// The quantization map as a finite tower of maps from classes into the
// complex, with the induced differential on classes alongside. `exact` marks
// towers whose higher levels are provably zero.
struct TransferData {
    CohomologyData coh;
    std::vector<LinearMap> f;      // level l: H -> C, level 0 = representatives
    std::vector<LinearMap> kappa;  // level l: H -> H, level 0 = 0
    bool exact = false;
    int levels = 0;  // levels computed: 0..levels

    int hbar_cap() const { return exact ? kNoCap : levels; }
    CVec apply_f_level(int l, const CVec& h) const {
        if (l < 0 || l > levels) return CVec{};
        return f[static_cast<size_t>(l)].apply(h);
    }
    CVec apply_kappa_level(int l, const CVec& h) const {
        if (l < 1 || l > levels) return CVec{};
        return kappa[static_cast<size_t>(l)].apply(h);
    }
    HbarVec apply_f(const HbarVec& x) const {
        HbarVec r;
        for (auto& [l, v] : x.lv)
            for (int j = 0; j <= levels; ++j) r.add(l + j, apply_f_level(j, v));
        return r;
    }
    HbarVec apply_kappa(const HbarVec& x) const {
        HbarVec r;
        for (auto& [l, v] : x.lv)
            for (int j = 1; j <= levels; ++j) r.add(l + j, apply_kappa_level(j, v));
        return r;
    }
};

// Builds the tower inductively up to hbar_max levels; the contract
// K f = f kappa is asserted exactly at every computed level.
TransferData build_quantization_map(const AlgebraSpec& spec, const CohomologyData& coh, int hbar_max);

struct AnomalyReport {
    bool anomaly_free = true;
    std::vector<std::string> invisibles;  // classes with nonzero induced differential
    int first_level = -1;
};
AnomalyReport check_anomaly_free(const TransferData& td);

// K applied to a finite series of complex vectors.
HbarVec apply_K_series(const AlgebraSpec& spec, const HbarVec& v);

// Canonical splitting of a K-closed series as f(x) + K(lambda) to the given
// level, with the induced-differential constraint on x verified along the way.
struct CocycleDec {
    HbarVec x;       // class coordinates
    HbarVec lambda;  // complex coordinates
};
CocycleDec decompose_cocycle(const AlgebraSpec& spec, const TransferData& td, const HbarVec& eta, int cap);

// Inverse direction: given f(x) = K(lambda) to the given level, produce
// (y, zeta) with x = kappa y and lambda = f(y) + K zeta.
struct ExactnessDec {
    HbarVec y;
    HbarVec zeta;
};
ExactnessDec solve_exactness(const AlgebraSpec& spec, const TransferData& td, const HbarVec& x,
                             const HbarVec& lambda, int cap);

// Expectation value of a class against a cycle; warns (via the flag) when the
// class is not an observable, in which case the value is homotopy-dependent.
std::map<int, Rat> expectation(const AlgebraSpec& spec, const TransferData& td, const CycleSpec& cycle,
                               const CVec& h_class, bool* invariant = nullptr);

}  // namespace bvqft
