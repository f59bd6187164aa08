#include "bvqft/algebra.hpp"

#include <sstream>

namespace bvqft {

namespace {

std::string pair_witness(const AlgebraSpec& s, int i, int j) {
    return "(" + s.basis.labels[static_cast<size_t>(i)] + ", " + s.basis.labels[static_cast<size_t>(j)] + ")";
}
std::string triple_witness(const AlgebraSpec& s, int i, int j, int k) {
    return "(" + s.basis.labels[static_cast<size_t>(i)] + ", " + s.basis.labels[static_cast<size_t>(j)] + ", " +
           s.basis.labels[static_cast<size_t>(k)] + ")";
}

// level-l coefficient of K(ab) - Ka.b - (-1)^{|a|} a.Kb on a basis pair
CVec leibniz_defect(const AlgebraSpec& s, int level, int i, int j) {
    int sgn = par(s.basis.ghost(i)) ? -1 : 1;
    CVec d = s.apply_K_level(level, s.mul_basis(i, j));
    d -= s.mul_vec(s.apply_K_level(level, CVec::unit(i)), CVec::unit(j));
    d -= Rat(sgn) * s.mul_vec(CVec::unit(i), s.apply_K_level(level, CVec::unit(j)));
    return d;
}

}  // namespace

void AlgebraSpec::finalize() {
    bracket_cache.clear();
    int levels = std::max(0, k_levels() - 1);
    bracket_cache.resize(static_cast<size_t>(levels));
    for (int l = 0; l < levels; ++l) {
        for (int i = 0; i < dim(); ++i) {
            for (int j = 0; j < dim(); ++j) {
                int sgn = par(basis.ghost(i)) ? -1 : 1;
                CVec br = Rat(-sgn) * leibniz_defect(*this, l + 1, i, j);
                if (!br.zero()) bracket_cache[static_cast<size_t>(l)][{i, j}] = br;
            }
        }
    }
}

Ledger validate_algebra(const AlgebraSpec& s) {
    Ledger led;
    const int n = s.dim();
    const auto g = [&](int i) { return s.basis.ghost(i); };

    {
        bool ok = s.basis.unit >= 0 && s.basis.unit < n && g(s.basis.unit) == 0;
        led.add("unit-declared", ok, "unit index");
        if (!ok) return led;
    }
    // ghost structure of the tables
    {
        bool ok = true;
        std::string w;
        for (auto& [ij, v] : s.product)
            for (auto& [k, x] : v.c)
                if (g(k) != g(ij.first) + g(ij.second)) {
                    ok = false;
                    w = pair_witness(s, ij.first, ij.second);
                }
        led.add("product-ghost-zero", ok, w);
        ok = true;
        w = "";
        for (int l = 0; l < s.k_levels(); ++l)
            for (auto& [rc, x] : s.K[static_cast<size_t>(l)].a)
                if (g(rc.first) != g(rc.second) + 1) {
                    ok = false;
                    w = "K level " + std::to_string(l);
                }
        led.add("K-ghost-shift-one", ok, w);
    }
    // unit laws
    {
        bool ok = true;
        std::string w;
        for (int i = 0; i < n && ok; ++i)
            if (!(s.mul_basis(s.basis.unit, i) == CVec::unit(i)) || !(s.mul_basis(i, s.basis.unit) == CVec::unit(i))) {
                ok = false;
                w = s.basis.labels[static_cast<size_t>(i)];
            }
        led.add("unit-law", ok, w);
        ok = true;
        for (int l = 0; l < s.k_levels() && ok; ++l)
            if (!s.apply_K_level(l, CVec::unit(s.basis.unit)).zero()) {
                ok = false;
                w = "K level " + std::to_string(l);
            }
        led.add("unit-closed", ok, w);
    }
    // graded commutativity and associativity
    {
        bool ok = true;
        std::string w;
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j) {
                int sgn = (par(g(i)) && par(g(j))) ? -1 : 1;
                if (!(s.mul_basis(i, j) == Rat(sgn) * s.mul_basis(j, i))) {
                    ok = false;
                    w = pair_witness(s, i, j);
                }
            }
        led.add("product-commutative", ok, w);
        ok = true;
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j)
                for (int k = 0; k < n && ok; ++k) {
                    CVec lhs = s.mul_vec(s.mul_basis(i, j), CVec::unit(k));
                    CVec rhs = s.mul_vec(CVec::unit(i), s.mul_basis(j, k));
                    if (!(lhs == rhs)) {
                        ok = false;
                        w = triple_witness(s, i, j, k);
                    }
                }
        led.add("product-associative", ok, w);
    }
    // K^2 = 0 level by level
    {
        bool ok = true;
        std::string w;
        for (int l = 0; l <= 2 * (s.k_levels() - 1) && ok; ++l) {
            for (int i = 0; i < n && ok; ++i) {
                CVec acc;
                for (int a = 0; a <= l; ++a) acc += s.apply_K_level(a, s.apply_K_level(l - a, CVec::unit(i)));
                if (!acc.zero()) {
                    ok = false;
                    w = "level " + std::to_string(l) + " on " + s.basis.labels[static_cast<size_t>(i)];
                }
            }
        }
        led.add("K-square-zero", ok, w);
    }
    // level-0 derivation law (the divisibility half of the hbar-condition)
    {
        bool ok = true;
        std::string w;
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j)
                if (!leibniz_defect(s, 0, i, j).zero()) {
                    ok = false;
                    w = pair_witness(s, i, j);
                }
        led.add("leibniz-level-zero", ok, w);
        if (!ok) return led;  // bracket undefined past this point
    }

    AlgebraSpec& cache_owner = const_cast<AlgebraSpec&>(s);
    if (s.bracket_cache.empty() && s.k_levels() > 1) cache_owner.finalize();
    const int bl = s.bracket_levels();
    auto bracket_series = [&](const CVec& a, int pa, const CVec& b) {
        // bracket of plain vectors as a level -> CVec table; pa = parity of a
        std::vector<CVec> out(static_cast<size_t>(bl));
        for (int l = 0; l < bl; ++l) {
            int sgn = pa ? -1 : 1;
            CVec d = s.apply_K_level(l + 1, s.mul_vec(a, b));
            d -= s.mul_vec(s.apply_K_level(l + 1, a), b);
            d -= Rat(sgn) * s.mul_vec(a, s.apply_K_level(l + 1, b));
            out[static_cast<size_t>(l)] = Rat(-sgn) * d;
        }
        return out;
    };

    // bracket laws, level by level, on all tuples
    {
        bool ok = true;
        std::string w;
        for (int l = 0; l < bl && ok; ++l)
            for (int i = 0; i < n && ok; ++i) {
                if (!s.bracket_basis(l, s.basis.unit, i).zero() || !s.bracket_basis(l, i, s.basis.unit).zero()) {
                    ok = false;
                    w = s.basis.labels[static_cast<size_t>(i)];
                }
            }
        led.add("bracket-unit-central", ok, w);

        ok = true;
        for (int l = 0; l < bl && ok; ++l)
            for (int i = 0; i < n && ok; ++i)
                for (int j = 0; j < n && ok; ++j) {
                    int sgn = (par(g(i) + 1) && par(g(j) + 1)) ? -1 : 1;
                    if (!(s.bracket_basis(l, i, j) == Rat(-sgn) * s.bracket_basis(l, j, i))) {
                        ok = false;
                        w = pair_witness(s, i, j) + " level " + std::to_string(l);
                    }
                }
        led.add("bracket-commutative", ok, w);

        // derivation of the product (Poisson law)
        ok = true;
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j)
                for (int k = 0; k < n && ok; ++k) {
                    CVec bc = s.mul_basis(j, k);
                    auto lhs = bracket_series(CVec::unit(i), par(g(i)), bc);
                    for (int l = 0; l < bl && ok; ++l) {
                        CVec rhs = s.mul_vec(s.bracket_basis(l, i, j), CVec::unit(k));
                        int sgn = (par(g(i) + 1) && par(g(j))) ? -1 : 1;
                        rhs += Rat(sgn) * s.mul_vec(CVec::unit(j), s.bracket_basis(l, i, k));
                        if (!(lhs[static_cast<size_t>(l)] == rhs)) {
                            ok = false;
                            w = triple_witness(s, i, j, k) + " level " + std::to_string(l);
                        }
                    }
                }
        led.add("bracket-poisson-law", ok, w);

        // graded Jacobi
        ok = true;
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j)
                for (int k = 0; k < n && ok; ++k) {
                    // (i,(j,k)) = ((i,j),k) + (-1)^{(|i|+1)(|j|+1)} (j,(i,k))
                    for (int l2 = 0; l2 < 2 * bl && ok; ++l2) {
                        CVec lhs, rhs;
                        for (int a = 0; a <= l2; ++a) {
                            int b = l2 - a;
                            if (a >= bl || b >= bl) continue;
                            CVec jk = s.bracket_basis(b, j, k);
                            for (auto& [t, x] : jk.c) lhs += x * s.bracket_basis(a, i, t);
                            CVec ij = s.bracket_basis(b, i, j);
                            for (auto& [t, x] : ij.c) rhs += x * s.bracket_basis(a, t, k);
                            int sgn = (par(g(i) + 1) && par(g(j) + 1)) ? -1 : 1;
                            CVec ik = s.bracket_basis(b, i, k);
                            for (auto& [t, x] : ik.c) rhs += (Rat(sgn) * x) * s.bracket_basis(a, j, t);
                        }
                        if (!(lhs == rhs)) {
                            ok = false;
                            w = triple_witness(s, i, j, k) + " total level " + std::to_string(l2);
                        }
                    }
                }
        led.add("bracket-jacobi", ok, w);

        // K is a derivation of the bracket
        ok = true;
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j) {
                for (int l2 = 0; l2 < bl + s.k_levels() && ok; ++l2) {
                    CVec lhs, rhs;
                    for (int a = 0; a <= l2; ++a) {
                        int b = l2 - a;
                        if (a < s.k_levels() && b < bl) lhs += s.apply_K_level(a, s.bracket_basis(b, i, j));
                        if (a < s.k_levels() && b < bl) {
                            CVec ki = s.apply_K_level(a, CVec::unit(i));
                            for (auto& [t, x] : ki.c) rhs += x * s.bracket_basis(b, t, j);
                            int sgn = par(g(i) + 1) ? -1 : 1;
                            CVec kj = s.apply_K_level(a, CVec::unit(j));
                            for (auto& [t, x] : kj.c) rhs += (Rat(sgn) * x) * s.bracket_basis(b, i, t);
                        }
                    }
                    if (!(lhs == rhs)) {
                        ok = false;
                        w = pair_witness(s, i, j) + " total level " + std::to_string(l2);
                    }
                }
            }
        led.add("bracket-K-derivation", ok, w);
    }

    if (s.cycle) {
        const CycleSpec& c = *s.cycle;
        bool ok = true;
        std::string w;
        for (size_t l = 0; l < c.levels.size() && ok; ++l)
            for (auto& [i, x] : c.levels[l].c)
                if (g(i) != c.dimension) {
                    ok = false;
                    w = "level " + std::to_string(l) + " touches ghost " + std::to_string(g(i));
                }
        led.add("cycle-ghost-support", ok, w);
        ok = true;
        for (int l = 0; l <= c.top_level() + s.k_levels() && ok; ++l)
            for (int i = 0; i < n && ok; ++i) {
                Rat acc(0);
                for (int a = 0; a <= l; ++a) acc += c.pair(a, s.apply_K_level(l - a, CVec::unit(i)));
                if (acc != 0) {
                    ok = false;
                    w = s.basis.labels[static_cast<size_t>(i)] + " level " + std::to_string(l);
                }
            }
        led.add("cycle-annihilates-imK", ok, w);
    }
    if (s.integral) {
        Ledger il = validate_integral(s, *s.integral, nullptr);
        led.merge(il);
    }
    return led;
}

Ledger validate_integral(const AlgebraSpec& s, const IntegralSpec& integral, bool* semi_classical) {
    Ledger led;
    const int n = s.dim();
    const auto g = [&](int i) { return s.basis.ghost(i); };
    {
        bool ok = true;
        std::string w;
        for (size_t l = 0; l < integral.levels.size() && ok; ++l)
            for (auto& [i, x] : integral.levels[l].c)
                if (g(i) != integral.dimension) {
                    ok = false;
                    w = "level " + std::to_string(l);
                }
        led.add("integral-ghost-support", ok, w);
    }
    // defining skew-symmetry against the differential, as a series identity
    {
        bool ok = true;
        std::string w;
        int top = integral.top_level() + s.k_levels();
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j) {
                int sgn = par(g(i)) ? -1 : 1;
                for (int l = 0; l <= top && ok; ++l) {
                    Rat acc(0);
                    for (int a = 0; a <= l; ++a) {
                        acc += integral.pair(a, s.mul_vec(s.apply_K_level(l - a, CVec::unit(i)), CVec::unit(j)));
                        acc += Rat(sgn) *
                               integral.pair(a, s.mul_vec(CVec::unit(i), s.apply_K_level(l - a, CVec::unit(j))));
                    }
                    if (acc != 0) {
                        ok = false;
                        w = "(" + s.basis.labels[static_cast<size_t>(i)] + ", " +
                            s.basis.labels[static_cast<size_t>(j)] + ") level " + std::to_string(l);
                    }
                }
            }
        led.add("integral-skew", ok, w);
    }
    // equivalent closed form: kills the image of K and every bracket
    {
        bool ok = true;
        std::string w;
        for (int i = 0; i < n && ok; ++i)
            for (int l = 0; l <= integral.top_level() + s.k_levels() && ok; ++l) {
                Rat acc(0);
                for (int a = 0; a <= l; ++a) acc += integral.pair(a, s.apply_K_level(l - a, CVec::unit(i)));
                if (acc != 0) {
                    ok = false;
                    w = s.basis.labels[static_cast<size_t>(i)];
                }
            }
        led.add("integral-kills-imK", ok, w);
        ok = true;
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j)
                for (int l = 0; l <= integral.top_level() + s.bracket_levels() && ok; ++l) {
                    Rat acc(0);
                    for (int a = 0; a <= l; ++a) acc += integral.pair(a, s.bracket_basis(l - a, i, j));
                    if (acc != 0) {
                        ok = false;
                        w = "(" + s.basis.labels[static_cast<size_t>(i)] + ", " +
                            s.basis.labels[static_cast<size_t>(j)] + ")";
                    }
                }
        led.add("integral-kills-brackets", ok, w);
    }
    // semi-classical: one classical level that is skew to every K level alone
    {
        bool semi = integral.top_level() <= 0;
        std::string w = "has higher levels";
        for (int l = 0; l < s.k_levels() && semi; ++l)
            for (int i = 0; i < n && semi; ++i)
                for (int j = 0; j < n && semi; ++j) {
                    int sgn = par(g(i)) ? -1 : 1;
                    Rat acc = integral.pair(0, s.mul_vec(s.apply_K_level(l, CVec::unit(i)), CVec::unit(j)));
                    acc += Rat(sgn) * integral.pair(0, s.mul_vec(CVec::unit(i), s.apply_K_level(l, CVec::unit(j))));
                    if (acc != 0) {
                        semi = false;
                        w = "level " + std::to_string(l) + " fails alone at " + pair_witness(s, i, j);
                    }
                }
        led.add("integral-semi-classical", semi, w);
        if (semi_classical) *semi_classical = semi;
    }
    return led;
}

// ---- element operations ---------------------------------------------------

Element mul(const ElemCtx& cx, const Element& a, const Element& b) {
    const auto& gh = cx.hghosts;
    Element r = series_zero<CVec>(a.ghost + b.ghost, std::min(a.tmax, b.tmax), std::min(a.hmax, b.hmax));
    for (auto& [ka, va] : a.terms) {
        int pa = par(a.ghost + word_class_ghost(ka.w, gh));  // parity of the value factor
        for (auto& [kb, vb] : b.terms) {
            if (static_cast<int>(ka.w.len() + kb.w.len()) > r.tmax) continue;
            if (r.hmax != kNoCap && ka.h + kb.h > r.hmax) continue;
            NormWord m = merge_words(ka.w, kb.w, gh);
            if (m.zero) continue;
            int sgn = m.sign;
            if (pa && word_par(kb.w, gh)) sgn = -sgn;
            CVec prod = cx.alg().mul_vec(va, vb);
            if (prod.zero()) continue;
            r.add_term({m.w, ka.h + kb.h}, Rat(sgn) * prod);
        }
    }
    return r;
}

Element mul(const ElemCtx& cx, const ScalarSeries& a, const Element& b) {
    const auto& gh = cx.hghosts;
    Element r = series_zero<CVec>(a.ghost + b.ghost, std::min(a.tmax, b.tmax), std::min(a.hmax, b.hmax));
    for (auto& [ka, va] : a.terms) {
        for (auto& [kb, vb] : b.terms) {
            if (static_cast<int>(ka.w.len() + kb.w.len()) > r.tmax) continue;
            if (r.hmax != kNoCap && ka.h + kb.h > r.hmax) continue;
            NormWord m = merge_words(ka.w, kb.w, gh);
            if (m.zero) continue;
            r.add_term({m.w, ka.h + kb.h}, (Rat(m.sign) * va) * vb);
        }
    }
    return r;
}

namespace {
Element apply_K_range(const ElemCtx& cx, const Element& e, int lo, int hi, bool shift) {
    Element r = series_zero<CVec>(e.ghost + 1, e.tmax, e.hmax);
    for (auto& [k, v] : e.terms) {
        int sgn = word_par(k.w, cx.hghosts) ? -1 : 1;
        for (int l = lo; l <= hi && l < cx.alg().k_levels(); ++l) {
            CVec kv = cx.alg().apply_K_level(l, v);
            if (kv.zero()) continue;
            r.add_term({k.w, k.h + (shift ? l : 0)}, Rat(sgn) * kv);
        }
    }
    return r;
}
}  // namespace

Element apply_K(const ElemCtx& cx, const Element& e) {
    return apply_K_range(cx, e, 0, cx.alg().k_levels() - 1, true);
}
Element apply_Q(const ElemCtx& cx, const Element& e) { return apply_K_range(cx, e, 0, 0, false); }

namespace {
Element bracket_impl(const ElemCtx& cx, const Element& a, const Element& b, int level_cap) {
    const auto& gh = cx.hghosts;
    Element r = series_zero<CVec>(a.ghost + b.ghost + 1, std::min(a.tmax, b.tmax), std::min(a.hmax, b.hmax));
    const int bl = std::min(cx.alg().bracket_levels(), level_cap);
    for (auto& [ka, va] : a.terms) {
        for (auto& [kb, vb] : b.terms) {
            if (static_cast<int>(ka.w.len() + kb.w.len()) > r.tmax) continue;
            NormWord m = merge_words(ka.w, kb.w, gh);
            if (m.zero) continue;
            for (auto& [i, x] : va.c) {
                int pa = par(cx.alg().basis.ghost(i));
                int sgn = m.sign;
                if (par(pa + 1) && word_par(kb.w, gh)) sgn = -sgn;
                for (auto& [j, y] : vb.c) {
                    for (int l = 0; l < bl; ++l) {
                        CVec br = cx.alg().bracket_basis(l, i, j);
                        if (br.zero()) continue;
                        int h = ka.h + kb.h + (level_cap == 1 ? 0 : l);
                        if (r.hmax != kNoCap && h > r.hmax) continue;
                        r.add_term({m.w, h}, (Rat(sgn) * x * y) * br);
                    }
                }
            }
        }
    }
    return r;
}
}  // namespace

Element bv_bracket(const ElemCtx& cx, const Element& a, const Element& b) {
    return bracket_impl(cx, a, b, kNoCap);
}
Element bv_bracket_classical(const ElemCtx& cx, const Element& a, const Element& b) {
    return bracket_impl(cx, a, b, 1);
}

Element apply_K_theta(const ElemCtx& cx, const Element& theta, const Element& e) {
    return apply_K(cx, e) + bv_bracket(cx, theta, e);
}
Element apply_Q_theta(const ElemCtx& cx, const Element& theta_cl, const Element& e) {
    return apply_Q(cx, e) + bv_bracket_classical(cx, theta_cl, e);
}

ScalarSeries apply_cycle(const CycleSpec& cyc, const Element& e) {
    ScalarSeries r = series_zero<Rat>(0, e.tmax, e.hmax);
    for (auto& [k, v] : e.terms)
        for (int l = 0; l <= cyc.top_level(); ++l) {
            Rat x = cyc.pair(l, v);
            if (x == 0) continue;
            if (r.hmax != kNoCap && k.h + l > r.hmax) continue;
            r.add_term({k.w, k.h + l}, x);
        }
    return r;
}

Element unit_element(const AlgebraSpec& spec) {
    Element one = series_zero<CVec>(0);
    one.add_term({Word{}, 0}, CVec::unit(spec.basis.unit));
    return one;
}

Element exp_neg_theta_over_hbar(const ElemCtx& cx, const Element& theta, int t_order) {
    for (auto& [k, v] : theta.terms) {
        if (k.w.len() == 0) throw DivisibilityError("exponential argument has a constant term");
        if (k.h < 0) throw DivisibilityError("exponential argument has negative parameter powers");
    }
    Element acc = unit_element(cx.alg());
    acc.tmax = t_order;
    Element power = acc;
    Rat factorial(1);
    for (int m = 1; m <= t_order; ++m) {
        power = truncate_t(mul(cx, power, theta), t_order);
        factorial *= m;
        Rat coef = Rat((m % 2) ? -1 : 1) / factorial;
        acc = acc + coef * hbar_shift(power, -m);
    }
    return acc;
}

}  // namespace bvqft
