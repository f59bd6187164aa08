#include "bvqft/transfer.hpp"

#include <memory>
#include <set>

namespace bvqft {

namespace {

std::vector<Rat> to_dense(const CVec& v, const std::vector<int>& idx) {
    std::vector<Rat> out(idx.size(), Rat(0));
    for (size_t k = 0; k < idx.size(); ++k) out[k] = v.get(idx[k]);
    return out;
}

CVec from_dense(const std::vector<Rat>& d, const std::vector<int>& idx) {
    CVec v;
    for (size_t k = 0; k < idx.size(); ++k) v.set(idx[k], d[k]);
    return v;
}

}  // namespace

CohomologyData CohomologyData::compute(const AlgebraSpec& spec) {
    CohomologyData out;
    const int n = spec.dim();
    std::set<int> degset;
    for (int i = 0; i < n; ++i) degset.insert(spec.basis.ghost(i));

    std::map<int, std::vector<int>> idx;
    for (int i = 0; i < n; ++i) idx[spec.basis.ghost(i)].push_back(i);

    auto q_image_in = [&](int g) {  // classical differential applied to the degree below
        std::vector<CVec> vecs;
        auto it = idx.find(g - 1);
        if (it == idx.end() || spec.k_levels() == 0) return vecs;
        for (int j : it->second) {
            CVec qj = spec.apply_K_level(0, CVec::unit(j));
            if (!qj.zero()) vecs.push_back(qj);
        }
        return vecs;
    };

    // choose representatives degree by degree; the unit class is pinned to the
    // unit vector itself and placed first in the class basis
    struct Pending {
        int degree;
        CVec rep;
    };
    std::vector<Pending> chosen;
    for (int g : degset) {
        std::vector<CVec> img = q_image_in(g);
        std::vector<CVec> span = img;
        int rank0 = span_rank(span, n);
        auto try_add = [&](const CVec& cand) {
            span.push_back(cand);
            int r = span_rank(span, n);
            if (r > rank0) {
                rank0 = r;
                return true;
            }
            span.pop_back();
            return false;
        };
        // kernel of the classical differential in this degree
        std::vector<CVec> kerv;
        {
            auto it = idx.find(g);
            if (it != idx.end()) {
                const auto& cols = it->second;
                std::vector<int> rows;
                auto itr = idx.find(g + 1);
                if (itr != idx.end()) rows = itr->second;
                DenseMat Q(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
                if (spec.k_levels() > 0)
                    for (size_t c = 0; c < cols.size(); ++c) {
                        CVec qc = spec.apply_K_level(0, CVec::unit(cols[c]));
                        for (size_t r = 0; r < rows.size(); ++r) Q.at(static_cast<int>(r), static_cast<int>(c)) = qc.get(rows[r]);
                    }
                LinSolve ls(std::move(Q));
                for (auto& kv : ls.kernel_basis()) kerv.push_back(from_dense(kv, cols));
            }
        }
        if (g == 0) {
            CVec one = CVec::unit(spec.basis.unit);
            if (try_add(one)) chosen.push_back({g, one});
        }
        for (auto& kv : kerv)
            if (try_add(kv)) chosen.push_back({g, kv});
    }

    // class basis order: unit class first, then by (degree, discovery order)
    std::vector<size_t> order;
    for (size_t i = 0; i < chosen.size(); ++i)
        if (chosen[i].degree == 0 && chosen[i].rep == CVec::unit(spec.basis.unit)) order.push_back(i);
    if (order.empty()) throw std::runtime_error("unit class vanishes in cohomology");
    for (size_t i = 0; i < chosen.size(); ++i)
        if (!(chosen[i].degree == 0 && chosen[i].rep == CVec::unit(spec.basis.unit))) order.push_back(i);

    for (size_t k = 0; k < order.size(); ++k) {
        const auto& p = chosen[order[k]];
        out.H.add("e" + std::to_string(k), p.degree);
        out.reps.push_back(p.rep);
    }
    out.H.unit = 0;

    // per-degree canonical decomposition systems
    for (int g : degset) {
        DegreeData dd;
        dd.idx = idx[g];
        auto itp = idx.find(g - 1);
        if (itp != idx.end()) dd.prev_idx = itp->second;
        for (int h = 0; h < out.H.dim(); ++h)
            if (out.H.ghost(h) == g) dd.rep_cols.push_back(h);
        DenseMat A(static_cast<int>(dd.idx.size()),
                   static_cast<int>(dd.rep_cols.size() + dd.prev_idx.size()));
        for (size_t c = 0; c < dd.rep_cols.size(); ++c) {
            const CVec& rep = out.reps[static_cast<size_t>(dd.rep_cols[c])];
            for (size_t r = 0; r < dd.idx.size(); ++r) A.at(static_cast<int>(r), static_cast<int>(c)) = rep.get(dd.idx[r]);
        }
        for (size_t c = 0; c < dd.prev_idx.size(); ++c) {
            CVec qc = spec.k_levels() ? spec.apply_K_level(0, CVec::unit(dd.prev_idx[c])) : CVec{};
            for (size_t r = 0; r < dd.idx.size(); ++r)
                A.at(static_cast<int>(r), static_cast<int>(dd.rep_cols.size() + c)) = qc.get(dd.idx[r]);
        }
        dd.solver = std::make_shared<LinSolve>(std::move(A));
        out.degrees_[g] = std::move(dd);
    }
    return out;
}

bool CohomologyData::is_closed(const AlgebraSpec& spec, const CVec& v) const {
    if (spec.k_levels() == 0) return true;
    return spec.apply_K_level(0, v).zero();
}

CohomologyData::Dec CohomologyData::decompose(const AlgebraSpec& spec, const CVec& v) const {
    Dec out;
    if (v.zero()) return out;
    if (!is_closed(spec, v)) throw std::runtime_error("decompose: vector is not closed");
    int g = v.ghost(spec.basis);
    auto it = degrees_.find(g);
    if (it == degrees_.end()) throw std::runtime_error("decompose: unknown degree");
    const DegreeData& dd = it->second;
    auto sol = dd.solver->solve(to_dense(v, dd.idx));
    if (!sol) throw std::runtime_error("decompose: closed vector outside span (corrupt cohomology)");
    for (size_t c = 0; c < dd.rep_cols.size(); ++c) out.cls.set(dd.rep_cols[c], (*sol)[c]);
    for (size_t c = 0; c < dd.prev_idx.size(); ++c) out.y.set(dd.prev_idx[c], (*sol)[dd.rep_cols.size() + c]);
    // seeded section perturbation: shift y by kernel vectors, linearly in v
    for (auto& [functional, kvec] : dd.pert) {
        Rat x(0);
        for (size_t r = 0; r < dd.idx.size(); ++r) x += functional[r] * v.get(dd.idx[r]);
        if (x != 0) out.y += x * kvec;
    }
    return out;
}

void CohomologyData::set_section_seed(const AlgebraSpec& spec, uint64_t seed) {
    for (auto& [g, dd] : degrees_) dd.pert.clear();
    if (seed == 0) return;
    Rng rng(seed);
    for (auto& [g, dd] : degrees_) {
        if (dd.prev_idx.empty()) continue;
        // kernel of the classical differential in the previous degree
        DenseMat Q(static_cast<int>(dd.idx.size()), static_cast<int>(dd.prev_idx.size()));
        if (spec.k_levels() > 0)
            for (size_t c = 0; c < dd.prev_idx.size(); ++c) {
                CVec qc = spec.apply_K_level(0, CVec::unit(dd.prev_idx[c]));
                for (size_t r = 0; r < dd.idx.size(); ++r) Q.at(static_cast<int>(r), static_cast<int>(c)) = qc.get(dd.idx[r]);
            }
        LinSolve ls(std::move(Q));
        std::vector<CVec> ker;
        for (auto& kv : ls.kernel_basis()) ker.push_back(from_dense(kv, dd.prev_idx));
        if (ker.empty()) continue;
        for (int reps = 0; reps < 2; ++reps) {
            std::vector<Rat> functional(dd.idx.size());
            for (auto& x : functional) x = Rat(rng.small());
            CVec kvec;
            for (auto& kv : ker) kvec += Rat(rng.small()) * kv;
            if (kvec.zero()) continue;
            dd.pert.push_back({std::move(functional), std::move(kvec)});
        }
    }
}

HbarVec apply_K_series(const AlgebraSpec& spec, const HbarVec& v) {
    HbarVec r;
    for (auto& [l, x] : v.lv)
        for (int j = 0; j < spec.k_levels(); ++j) r.add(l + j, spec.apply_K_level(j, x));
    return r;
}

TransferData build_quantization_map(const AlgebraSpec& spec, const CohomologyData& coh, int hbar_max) {
    TransferData td;
    td.coh = coh;
    const int nh = coh.H.dim();
    const int nc = spec.dim();

    LinearMap f0;
    f0.rows = nc;
    f0.cols = nh;
    for (int h = 0; h < nh; ++h)
        for (auto& [i, x] : coh.reps[static_cast<size_t>(h)].c) f0.set(i, h, x);
    td.f.push_back(f0);
    LinearMap k0;
    k0.rows = k0.cols = nh;
    k0.ghost_shift = 1;
    td.kappa.push_back(k0);
    td.levels = 0;

    const int kl = spec.k_levels();
    int zero_run = 0;
    for (int l = 1; l <= hbar_max; ++l) {
        LinearMap fl;
        fl.rows = nc;
        fl.cols = nh;
        LinearMap kl_map;
        kl_map.rows = kl_map.cols = nh;
        kl_map.ghost_shift = 1;
        for (int h = 0; h < nh; ++h) {
            CVec defect;  // sum_{j>=1} K^(j) f^(l-j) e_h  -  sum_{j>=1} f^(l-j) kappa^(j) e_h
            for (int j = 1; j <= l && j < kl; ++j)
                defect += spec.apply_K_level(j, td.apply_f_level(l - j, CVec::unit(h)));
            for (int j = 1; j < l; ++j) {
                CVec kv = td.apply_kappa_level(j, CVec::unit(h));
                for (auto& [t, x] : kv.c) defect -= x * td.apply_f_level(l - j, CVec::unit(t));
            }
            if (defect.zero()) continue;
            auto dec = coh.decompose(spec, defect);  // throws if defect not closed
            for (auto& [t, x] : dec.cls.c) kl_map.set(t, h, x);
            // f kappa^(l) - defect = -Q y, so the new level is -y
            for (auto& [t, x] : dec.y.c) fl.set(t, h, -x);
        }
        td.f.push_back(fl);
        td.kappa.push_back(kl_map);
        td.levels = l;
        if (fl.zero() && kl_map.zero())
            ++zero_run;
        else
            zero_run = 0;
        if (zero_run >= std::max(1, kl - 1) && l >= kl) {
            td.exact = true;
            break;
        }
    }

    // contract: K f = f kappa at every computed level
    for (int l = 0; l <= td.levels; ++l) {
        for (int h = 0; h < nh; ++h) {
            CVec lhs, rhs;
            for (int j = 0; j <= l && j < kl; ++j) lhs += spec.apply_K_level(j, td.apply_f_level(l - j, CVec::unit(h)));
            for (int j = 1; j <= l; ++j) {
                CVec kv = td.apply_kappa_level(j, CVec::unit(h));
                for (auto& [t, x] : kv.c) rhs += x * td.apply_f_level(l - j, CVec::unit(t));
            }
            if (!(lhs == rhs)) throw IdentityError("transfer-chain-map", "K f != f kappa at level " + std::to_string(l));
        }
    }
    // induced differential squares to zero on computed levels
    for (int l = 0; l <= td.levels; ++l)
        for (int h = 0; h < nh; ++h) {
            CVec acc;
            for (int a = 1; a < l; ++a) {
                CVec kv = td.apply_kappa_level(l - a, CVec::unit(h));
                for (auto& [t, x] : kv.c) acc += x * td.apply_kappa_level(a, CVec::unit(t));
            }
            if (!acc.zero()) throw IdentityError("transfer-kappa-square", "induced differential fails to square to zero");
        }
    return td;
}

AnomalyReport check_anomaly_free(const TransferData& td) {
    AnomalyReport rep;
    for (int h = 0; h < td.coh.H.dim(); ++h) {
        for (int l = 1; l <= td.levels; ++l) {
            if (!td.apply_kappa_level(l, CVec::unit(h)).zero()) {
                rep.anomaly_free = false;
                rep.invisibles.push_back(td.coh.H.labels[static_cast<size_t>(h)]);
                if (rep.first_level < 0 || l < rep.first_level) rep.first_level = l;
                break;
            }
        }
    }
    return rep;
}

CocycleDec decompose_cocycle(const AlgebraSpec& spec, const TransferData& td, const HbarVec& eta, int cap) {
    // precondition: K eta = 0 through the cap
    {
        HbarVec ke = apply_K_series(spec, eta).truncated(cap);
        if (!ke.zero()) throw std::runtime_error("decompose_cocycle: input is not closed");
    }
    CocycleDec out;
    for (int n = 0; n <= cap; ++n) {
        // residual against everything of lower order
        CVec rho = eta.level(n);
        for (int l = 1; l <= n && l <= td.levels; ++l) rho -= td.apply_f_level(l, out.x.level(n - l));
        for (int l = 0; l < n; ++l)
            if (n - l < spec.k_levels()) rho -= spec.apply_K_level(n - l, out.lambda.level(l));
        // the class-level obstruction must cancel at this order
        CVec sigma;
        for (int i = 1; i <= n && i <= td.levels; ++i) sigma += td.apply_kappa_level(i, out.x.level(n - i));
        if (!sigma.zero()) throw IdentityError("cocycle-obstruction", "induced-differential obstruction at level " + std::to_string(n));
        if (rho.zero()) continue;
        auto dec = td.coh.decompose(spec, rho);
        out.x.add(n, dec.cls);
        out.lambda.add(n, dec.y);
    }
    return out;
}

ExactnessDec solve_exactness(const AlgebraSpec& spec, const TransferData& td, const HbarVec& x,
                             const HbarVec& lambda, int cap) {
    // precondition: f(x) = K lambda through the cap
    {
        HbarVec lhs = td.apply_f(x).truncated(cap);
        HbarVec rhs = apply_K_series(spec, lambda).truncated(cap);
        if (!(lhs == rhs)) throw std::runtime_error("solve_exactness: f(x) != K lambda");
    }
    ExactnessDec out;
    for (int n = 0; n <= cap; ++n) {
        CVec xn = x.level(n);
        for (int l = 1; l <= n && l <= td.levels; ++l) xn -= td.apply_kappa_level(l, out.y.level(n - l));
        if (!xn.zero())
            throw IdentityError("exactness-class-residual",
                               "class part not generated by the induced differential at level " + std::to_string(n));
        CVec v = lambda.level(n);
        for (int l = 1; l <= n && l <= td.levels; ++l) v -= td.apply_f_level(l, out.y.level(n - l));
        for (int l = 1; l <= n; ++l)
            if (l < spec.k_levels()) v -= spec.apply_K_level(l, out.zeta.level(n - l));
        if (v.zero()) continue;
        auto dec = td.coh.decompose(spec, v);
        out.y.add(n, dec.cls);
        out.zeta.add(n, dec.y);
    }
    return out;
}

std::map<int, Rat> expectation(const AlgebraSpec& spec, const TransferData& td, const CycleSpec& cycle,
                               const CVec& h_class, bool* invariant) {
    if (invariant) {
        *invariant = true;
        for (int l = 1; l <= td.levels; ++l)
            if (!td.apply_kappa_level(l, h_class).zero()) *invariant = false;
    }
    std::map<int, Rat> out;
    for (int l = 0; l <= td.levels; ++l) {
        CVec fv = td.apply_f_level(l, h_class);
        for (int c = 0; c <= cycle.top_level(); ++c) {
            Rat v = cycle.pair(c, fv);
            if (v != 0) {
                Rat& slot = out[l + c];
                slot += v;
                if (slot == 0) out.erase(l + c);
            }
        }
    }
    return out;
}

}  // namespace bvqft
