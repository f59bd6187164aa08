#include "bvqft/wdvv.hpp"

namespace bvqft {

namespace {

bool eq_mod(const ScalarSeries& a, const ScalarSeries& b, int words) {
    if (words < 0) return true;
    return truncate_t(a, words) == truncate_t(b, words);
}

HbarScalar hmul(const HbarScalar& x, const HbarScalar& y) {
    HbarScalar out;
    for (auto& [p1, v1] : x)
        for (auto& [p2, v2] : y) {
            Rat& slot = out[p1 + p2];
            slot += v1 * v2;
            if (slot == 0) out.erase(p1 + p2);
        }
    return out;
}
HbarScalar hadd(HbarScalar x, const HbarScalar& y, const Rat& c = Rat(1)) {
    for (auto& [p, v] : y) {
        Rat& slot = x[p];
        slot += c * v;
        if (slot == 0) x.erase(p);
    }
    return x;
}
HbarScalar hscale(HbarScalar x, const Rat& c) {
    if (c == 0) return {};
    for (auto& [p, v] : x) v *= c;
    return x;
}
HbarScalar hshift(const HbarScalar& x, int k) {
    HbarScalar out;
    for (auto& [p, v] : x) out[p + k] = v;
    return out;
}

// integral applied to a finite series of complex vectors
HbarScalar pair_series(const IntegralSpec& integral, const HbarVec& v) {
    HbarScalar out;
    for (auto& [l, x] : v.lv)
        for (int c = 0; c <= integral.top_level(); ++c) {
            Rat r = integral.pair(c, x);
            if (r == 0) continue;
            Rat& slot = out[l + c];
            slot += r;
            if (slot == 0) out.erase(l + c);
        }
    return out;
}

HbarVec series_mul_vec(const AlgebraSpec& spec, const HbarVec& a, const HbarVec& b) {
    HbarVec out;
    for (auto& [la, va] : a.lv)
        for (auto& [lb, vb] : b.lv) out.add(la + lb, spec.mul_vec(va, vb));
    return out;
}

}  // namespace

PairingData pairings(const SolverState& st, const IntegralSpec& integral, Ledger& led) {
    PairingData pd;
    const int H = st.hdim();
    const auto& gh = st.cx.hghosts;
    const AlgebraSpec& spec = st.cx.alg();
    auto nm = [&](int i) { return st.cx.hlabels[static_cast<size_t>(i)]; };
    auto gp = [&](int i) { return par(gh[static_cast<size_t>(i)]); };

    // quantum representatives and the second-derivative coefficients at the origin
    std::vector<HbarVec> reps(static_cast<size_t>(H));
    for (int a = 0; a < H; ++a)
        for (int l = 0; l <= st.td.levels; ++l) reps[static_cast<size_t>(a)].add(l, st.td.apply_f_level(l, CVec::unit(a)));
    std::map<std::pair<int, int>, HbarVec> phi2;
    for (int a = 0; a < H; ++a)
        for (int b = 0; b < H; ++b) {
            HbarVec hv;
            for (auto& [k, v] : st.theta_dd(a, b).terms)
                if (k.w.len() == 0) hv.add(k.h, v);
            phi2[{a, b}] = hv;
        }

    pd.classical.assign(static_cast<size_t>(H), std::vector<Rat>(static_cast<size_t>(H), Rat(0)));
    pd.quantum.assign(static_cast<size_t>(H), std::vector<HbarScalar>(static_cast<size_t>(H)));
    for (int a = 0; a < H; ++a)
        for (int b = 0; b < H; ++b) {
            HbarVec prod = series_mul_vec(spec, reps[static_cast<size_t>(a)], reps[static_cast<size_t>(b)]);
            HbarScalar q = pair_series(integral, prod);
            pd.quantum[static_cast<size_t>(a)][static_cast<size_t>(b)] = q;
            pd.classical[static_cast<size_t>(a)][static_cast<size_t>(b)] =
                integral.pair(0, spec.mul_vec(st.td.coh.reps[static_cast<size_t>(a)],
                                              st.td.coh.reps[static_cast<size_t>(b)]));
        }

    auto m2 = [&](int a, int b, int g) {
        auto v = eval_t0(st.a_series(a, b, g));
        return v.count(0) ? v[0] : Rat(0);
    };

    // classical Frobenius structure
    {
        bool sym = true, frob = true, left = true, right = true, lcyc = true, rcyc = true;
        std::string w1, w2;
        for (int a = 0; a < H; ++a)
            for (int b = 0; b < H; ++b) {
                Rat lhs = pd.classical[static_cast<size_t>(a)][static_cast<size_t>(b)];
                Rat rhs = pd.classical[static_cast<size_t>(b)][static_cast<size_t>(a)];
                if (lhs != Rat((gp(a) && gp(b)) ? -1 : 1) * rhs) {
                    sym = false;
                    w1 = nm(a) + "," + nm(b);
                }
            }
        auto pc = [&](int a, int b) { return pd.classical[static_cast<size_t>(a)][static_cast<size_t>(b)]; };
        auto with_m_right = [&](int a, int b, int c) {  // <a, m2(b,c)>
            Rat acc(0);
            for (int g = 0; g < H; ++g) acc += m2(b, c, g) * pc(a, g);
            return acc;
        };
        auto with_m_left = [&](int a, int b, int c) {  // <m2(a,b), c>
            Rat acc(0);
            for (int g = 0; g < H; ++g) acc += m2(a, b, g) * pc(g, c);
            return acc;
        };
        for (int a = 0; a < H; ++a)
            for (int b = 0; b < H; ++b)
                for (int c = 0; c < H; ++c) {
                    Rat xm = with_m_right(a, b, c), mx = with_m_left(a, b, c);
                    if (xm != mx) {
                        frob = false;
                        w2 = nm(a) + "," + nm(b) + "," + nm(c);
                    }
                    if (xm != Rat((gp(a) && gp(b)) ? -1 : 1) * with_m_right(b, a, c)) left = false;
                    if (mx != Rat((gp(b) && gp(c)) ? -1 : 1) * with_m_left(a, c, b)) right = false;
                    int sl = (gp(a) && par(gh[static_cast<size_t>(b)] + gh[static_cast<size_t>(c)])) ? -1 : 1;
                    if (xm != Rat(sl) * with_m_right(b, c, a)) lcyc = false;
                    int sr = (par(gh[static_cast<size_t>(a)] + gh[static_cast<size_t>(b)]) && gp(c)) ? -1 : 1;
                    if (mx != Rat(sr) * with_m_left(c, a, b)) rcyc = false;
                }
        led.add("pairing/classical-symmetry", sym, w1);
        led.add("pairing/frobenius", frob, w2);
        led.add("pairing/left-invariance", left, w2);
        led.add("pairing/right-invariance", right, w2);
        led.add("pairing/left-cyclic", lcyc, w2);
        led.add("pairing/right-cyclic", rcyc, w2);
    }

    // trilinear pairing and its properties
    for (int x = 0; x < H; ++x)
        for (int y = 0; y < H; ++y)
            for (int z = 0; z < H; ++z) {
                HbarVec t1 = series_mul_vec(spec, phi2[{x, y}], reps[static_cast<size_t>(z)]);
                HbarVec t2 = series_mul_vec(spec, reps[static_cast<size_t>(y)], phi2[{x, z}]);
                HbarScalar v = hadd(pair_series(integral, t1), pair_series(integral, t2),
                                    Rat((gp(x) && gp(y)) ? -1 : 1));
                pd.triple[{x, y, z}] = v;
            }
    {
        bool p1 = true, p2 = true, p3 = true, p4 = true, p5 = true;
        std::string w;
        auto pq = [&](int a, int b) { return pd.quantum[static_cast<size_t>(a)][static_cast<size_t>(b)]; };
        auto qm_right = [&](int a, int b, int c) {  // <a, m2(b,c)>_q
            HbarScalar acc;
            for (int g = 0; g < H; ++g)
                if (m2(b, c, g) != 0) acc = hadd(acc, pq(a, g), m2(b, c, g));
            return acc;
        };
        auto qm_left = [&](int a, int b, int c) {  // <m2(a,b), c>_q
            HbarScalar acc;
            for (int g = 0; g < H; ++g)
                if (m2(a, b, g) != 0) acc = hadd(acc, pq(g, c), m2(a, b, g));
            return acc;
        };
        for (int x = 0; x < H; ++x)
            for (int y = 0; y < H; ++y)
                for (int z = 0; z < H; ++z) {
                    // (1) symmetry in the last two slots
                    HbarScalar rhs = hscale(pd.triple[{x, z, y}], Rat((gp(y) && gp(z)) ? -1 : 1));
                    if (!(pd.triple[{x, y, z}] == rhs)) {
                        p1 = false;
                        w = nm(x) + "," + nm(y) + "," + nm(z);
                    }
                    // (3) associativity defect
                    HbarScalar lhs3 = hadd(qm_right(x, y, z), qm_left(x, y, z), Rat(-1));
                    int s3 = (par(gh[static_cast<size_t>(x)] * gh[static_cast<size_t>(z)] +
                                  gh[static_cast<size_t>(y)] * gh[static_cast<size_t>(z)]))
                                 ? -1
                                 : 1;
                    HbarScalar rhs3 =
                        hshift(hadd(pd.triple[{x, y, z}], pd.triple[{z, x, y}], Rat(-s3)), 1);
                    if (!(lhs3 == rhs3)) p3 = false;
                    // (4) left-invariance defect
                    int sxy = (gp(x) && gp(y)) ? -1 : 1;
                    HbarScalar lhs4 = hadd(qm_right(x, y, z), qm_right(y, x, z), Rat(-sxy));
                    HbarScalar rhs4 = hshift(hadd(pd.triple[{x, y, z}], pd.triple[{y, x, z}], Rat(-sxy)), 1);
                    if (!(lhs4 == rhs4)) p4 = false;
                    // (5) right-invariance defect
                    int syz = (gp(y) && gp(z)) ? -1 : 1;
                    HbarScalar lhs5 = hadd(qm_left(x, y, z), qm_left(x, z, y), Rat(-syz));
                    HbarScalar rhs5 = hadd(hscale(hshift(pd.triple[{z, x, y}], 1), Rat(s3)),
                                           hshift(pd.triple[{y, x, z}], 1), Rat(-sxy));
                    if (!(lhs5 == rhs5)) p5 = false;
                }
        for (int y = 0; y < H; ++y)
            for (int z = 0; z < H; ++z)
                if (!pd.triple[{0, y, z}].empty()) p2 = false;
        led.add("pairing/triple-symmetry", p1, w);
        led.add("pairing/triple-unit", p2, w);
        led.add("pairing/triple-associativity-defect", p3, w);
        led.add("pairing/triple-left-defect", p4, w);
        led.add("pairing/triple-right-defect", p5, w);
    }
    Ledger il = validate_integral(spec, integral, &pd.semi_classical_integral);
    led.merge(il);
    return pd;
}

std::vector<std::vector<ScalarSeries>> metric(const SolverState& st, const IntegralSpec& integral, Ledger& led) {
    const int H = st.hdim();
    const int N = st.order;
    const auto& gh = st.cx.hghosts;
    auto nm = [&](int i) { return st.cx.hlabels[static_cast<size_t>(i)]; };
    std::vector<std::vector<ScalarSeries>> g(static_cast<size_t>(H),
                                             std::vector<ScalarSeries>(static_cast<size_t>(H)));
    CycleSpec as_cycle = integral;
    for (int a = 0; a < H; ++a)
        for (int b = 0; b < H; ++b) {
            Element prod = truncate_t(mul(st.cx, st.theta_d(a), st.theta_d(b)), N - 1);
            g[static_cast<size_t>(a)][static_cast<size_t>(b)] = apply_cycle(as_cycle, prod);
            g[static_cast<size_t>(a)][static_cast<size_t>(b)].ghost =
                -gh[static_cast<size_t>(a)] - gh[static_cast<size_t>(b)] - integral.dimension;
        }
    {
        bool sym = true, unit = true, pot = true, unit_flat = true;
        std::string w1, w2, w3, w4;
        for (int a = 0; a < H; ++a)
            for (int b = 0; b < H; ++b) {
                int s = (par(gh[static_cast<size_t>(a)]) && par(gh[static_cast<size_t>(b)])) ? -1 : 1;
                if (!(g[static_cast<size_t>(a)][static_cast<size_t>(b)] ==
                      Rat(s) * g[static_cast<size_t>(b)][static_cast<size_t>(a)])) {
                    sym = false;
                    w1 = nm(a) + "," + nm(b);
                }
                if (!partial(0, g[static_cast<size_t>(a)][static_cast<size_t>(b)], gh).zero()) {
                    unit = false;
                    w2 = nm(a) + "," + nm(b);
                }
            }
        for (int a = 0; a < H; ++a)
            for (int b = 0; b < H; ++b)
                for (int c = 0; c < H; ++c) {
                    int s = (par(gh[static_cast<size_t>(a)]) && par(gh[static_cast<size_t>(b)])) ? -1 : 1;
                    ScalarSeries lhs =
                        hbar_shift(partial(a, g[static_cast<size_t>(b)][static_cast<size_t>(c)], gh) -
                                       Rat(s) * partial(b, g[static_cast<size_t>(a)][static_cast<size_t>(c)], gh),
                                   1);
                    ScalarSeries rhs = series_zero<Rat>(lhs.ghost, N - 2, kNoCap);
                    for (int r = 0; r < H; ++r) {
                        rhs = rhs + mul(st.a_series(b, c, r), g[static_cast<size_t>(a)][static_cast<size_t>(r)], gh);
                        rhs = rhs - Rat(s) * mul(st.a_series(a, c, r),
                                                 g[static_cast<size_t>(b)][static_cast<size_t>(r)], gh);
                    }
                    if (!eq_mod(lhs, rhs, N - 2)) {
                        pot = false;
                        w3 = nm(a) + "," + nm(b) + "," + nm(c);
                    }
                }
        for (int a = 0; a < H; ++a)
            for (int b = 0; b < H; ++b) {
                int s = (par(gh[static_cast<size_t>(a)]) && par(gh[static_cast<size_t>(b)])) ? -1 : 1;
                ScalarSeries lhs = partial(a, g[static_cast<size_t>(b)][0], gh) -
                                   Rat(s) * partial(b, g[static_cast<size_t>(a)][0], gh);
                if (!eq_mod(lhs, series_zero<Rat>(lhs.ghost, N, kNoCap), N - 2)) {
                    unit_flat = false;
                    w4 = nm(a) + "," + nm(b);
                }
            }
        led.add("metric/symmetry", sym, w1);
        led.add("metric/unit-flat", unit, w2);
        led.add("metric/derivative-exchange", pot, w3);
        led.add("metric/unit-column-closed", unit_flat, w4);
    }
    return g;
}

WdvvResult wdvv(const SolverState& st, const IntegralSpec& integral,
                const std::vector<std::vector<ScalarSeries>>& g, const CorrelatorSet* cs, Ledger& led) {
    WdvvResult out;
    const int H = st.hdim();
    const int N = st.order;
    const auto& gh = st.cx.hghosts;
    auto nm = [&](int i) { return st.cx.hlabels[static_cast<size_t>(i)]; };

    // semi-classical detection: the generating element carries no parameter
    {
        bool ok = true;
        std::string w;
        for (auto& [k, v] : st.theta.terms)
            if (k.h != 0) {
                ok = false;
                w = "coefficient at " + k.w.str(st.cx.hlabels) + " power " + std::to_string(k.h);
            }
        out.semi_classical = ok;
        led.add("wdvv/semi-classical-solution", ok, w);
        bool semi_int = false;
        Ledger tmp;
        tmp = validate_integral(st.cx.alg(), integral, &semi_int);
        led.add("wdvv/semi-classical-integral", semi_int, "integral has higher levels");
        if (!ok || !semi_int) return out;
    }

    // flatness and parameter independence of the metric
    {
        bool hfree = true, flat = true, compat = true;
        std::string w1, w2, w3;
        for (int a = 0; a < H; ++a)
            for (int b = 0; b < H; ++b) {
                for (auto& [k, v] : g[static_cast<size_t>(a)][static_cast<size_t>(b)].terms) {
                    if (k.h != 0) {
                        hfree = false;
                        w1 = nm(a) + "," + nm(b);
                    }
                    if (k.w.len() != 0) {
                        flat = false;
                        w2 = nm(a) + "," + nm(b);
                    }
                }
            }
        for (int a = 0; a < H; ++a)
            for (int b = 0; b < H; ++b)
                for (int c = 0; c < H; ++c) {
                    ScalarSeries lhs = series_zero<Rat>(0, N - 2, kNoCap), rhs = lhs;
                    for (int r = 0; r < H; ++r) {
                        lhs = lhs + mul(st.a_series(a, b, r), g[static_cast<size_t>(r)][static_cast<size_t>(c)], gh);
                        rhs = rhs + mul(st.a_series(b, c, r), g[static_cast<size_t>(a)][static_cast<size_t>(r)], gh);
                    }
                    if (!eq_mod(lhs, rhs, N - 2)) {
                        compat = false;
                        w3 = nm(a) + "," + nm(b) + "," + nm(c);
                    }
                }
        led.add("wdvv/metric-parameter-free", hfree, w1);
        led.add("wdvv/metric-flat", flat, w2);
        led.add("wdvv/metric-compatible", compat, w3);
        out.metric_flat = flat;
        if (!hfree || !flat) return out;
    }

    // gauge pairing vanishing used by the flatness mechanism
    {
        bool ok = true;
        std::string w;
        CycleSpec as_cycle = integral;
        for (int a = 0; a < H && ok; ++a)
            for (int b = 0; b < H && ok; ++b)
                for (int c = 0; c < H && ok; ++c) {
                    Element prod = truncate_t(mul(st.cx, st.theta_dd(a, b), st.theta_d(c)), N - 2);
                    if (!apply_cycle(as_cycle, prod).zero()) {
                        ok = false;
                        w = nm(a) + "," + nm(b) + "," + nm(c);
                    }
                }
        led.add("wdvv/second-derivative-pairing-vanishes", ok, w);
    }

    // lowered tensor and its total symmetry
    for (int a = 0; a < H; ++a)
        for (int b = 0; b < H; ++b)
            for (int c = 0; c < H; ++c) {
                ScalarSeries acc = series_zero<Rat>(0, N - 2, kNoCap);
                for (int r = 0; r < H; ++r)
                    acc = acc + mul(st.a_series(b, c, r), g[static_cast<size_t>(a)][static_cast<size_t>(r)], gh);
                out.A3[{a, b, c}] = acc;
            }
    {
        bool ok = true;
        std::string w;
        for (int a = 0; a < H && ok; ++a)
            for (int b = 0; b < H && ok; ++b)
                for (int c = 0; c < H && ok; ++c) {
                    int s1 = (par(gh[static_cast<size_t>(a)]) && par(gh[static_cast<size_t>(b)])) ? -1 : 1;
                    int s2 = (par(gh[static_cast<size_t>(b)]) && par(gh[static_cast<size_t>(c)])) ? -1 : 1;
                    if (!(out.A3[{a, b, c}] == Rat(s1) * out.A3[{b, a, c}]) ||
                        !(out.A3[{a, b, c}] == Rat(s2) * out.A3[{a, c, b}])) {
                        ok = false;
                        w = nm(a) + "," + nm(b) + "," + nm(c);
                    }
                }
        led.add("wdvv/lowered-tensor-symmetric", ok, w);
    }

    // potential by monomial integration, then a full re-differentiation
    {
        ScalarSeries phi = series_zero<Rat>(0, N + 1, kNoCap);
        std::map<Word, bool> seen;
        bool ok = true;
        std::string w;
        for (int a = 0; a < H; ++a)
            for (int b = 0; b < H; ++b)
                for (int c = 0; c < H; ++c)
                    for (auto& [k, v] : out.A3[{a, b, c}].terms) {
                        std::vector<int> seq = {a, b, c};
                        seq.insert(seq.end(), k.w.a.begin(), k.w.a.end());
                        NormWord monomial = normalize_word(std::move(seq), gh);
                        if (monomial.zero || seen.count(monomial.w)) continue;
                        seen[monomial.w] = true;
                        int x = monomial.w.a[0], y = monomial.w.a[1], z = monomial.w.a[2];
                        Word rest;
                        rest.a.assign(monomial.w.a.begin() + 3, monomial.w.a.end());
                        ScalarSeries probe = series_zero<Rat>(0, N + 1, kNoCap);
                        probe.add_term({monomial.w, 0}, Rat(1));
                        ScalarSeries ddd = partial(x, partial(y, partial(z, probe, gh), gh), gh);
                        auto fc = word_coeff(ddd, rest);
                        Rat factor = fc.count(0) ? fc[0] : Rat(0);
                        if (factor == 0) continue;
                        auto tc = word_coeff(out.A3[{x, y, z}], rest);
                        Rat val = tc.count(0) ? tc[0] : Rat(0);
                        if (val != 0) phi.add_term({monomial.w, 0}, val / factor);
                    }
        for (int a = 0; a < H && ok; ++a)
            for (int b = 0; b < H && ok; ++b)
                for (int c = 0; c < H && ok; ++c) {
                    ScalarSeries ddd = partial(a, partial(b, partial(c, phi, gh), gh), gh);
                    if (!eq_mod(ddd, out.A3[{a, b, c}], N - 2)) {
                        ok = false;
                        w = nm(a) + "," + nm(b) + "," + nm(c);
                    }
                }
        led.add("wdvv/potential-roundtrip", ok, w);
        // the metric is the unit slice of the third derivatives
        {
            bool gok = true;
            std::string gw;
            for (int b = 0; b < H && gok; ++b)
                for (int c = 0; c < H && gok; ++c) {
                    ScalarSeries ddd = partial(0, partial(b, partial(c, phi, gh), gh), gh);
                    if (!eq_mod(ddd, g[static_cast<size_t>(b)][static_cast<size_t>(c)], N - 2)) {
                        gok = false;
                        gw = nm(b) + "," + nm(c);
                    }
                }
            led.add("wdvv/metric-from-potential", gok, gw);
        }
        out.Phi = phi;
        out.phi_built = ok;
    }

    // quartic residual with the inverse metric, in the even sector
    {
        bool all_even = true;
        for (int h = 0; h < H; ++h)
            if (par(gh[static_cast<size_t>(h)])) all_even = false;
        // constant metric matrix and its inverse
        DenseMat gm(H, H);
        for (int a = 0; a < H; ++a)
            for (int b = 0; b < H; ++b) {
                auto v = eval_t0(g[static_cast<size_t>(a)][static_cast<size_t>(b)]);
                gm.at(a, b) = v.count(0) ? v[0] : Rat(0);
            }
        LinSolve ls(gm);
        out.metric_invertible = ls.rank() == H;
        led.add("wdvv/metric-invertible", out.metric_invertible,
                "rank " + std::to_string(ls.rank()) + " of " + std::to_string(H));
        if (out.metric_invertible && all_even) {
            // inverse by solving against unit vectors
            std::vector<std::vector<Rat>> ginv(static_cast<size_t>(H), std::vector<Rat>(static_cast<size_t>(H)));
            for (int j = 0; j < H; ++j) {
                std::vector<Rat> e(static_cast<size_t>(H), Rat(0));
                e[static_cast<size_t>(j)] = 1;
                auto sol = ls.solve(e);
                for (int i = 0; i < H; ++i) ginv[static_cast<size_t>(i)][static_cast<size_t>(j)] = (*sol)[static_cast<size_t>(i)];
            }
            bool ok = true;
            std::string w;
            for (int a = 0; a < H && ok; ++a)
                for (int b = 0; b < H && ok; ++b)
                    for (int c = 0; c < H && ok; ++c)
                        for (int d = 0; d < H && ok; ++d) {
                            ScalarSeries lhs = series_zero<Rat>(0, N - 2, kNoCap), rhs = lhs;
                            for (int m = 0; m < H; ++m)
                                for (int n = 0; n < H; ++n) {
                                    if (ginv[static_cast<size_t>(m)][static_cast<size_t>(n)] == 0) continue;
                                    Rat gmn = ginv[static_cast<size_t>(m)][static_cast<size_t>(n)];
                                    lhs = lhs + gmn * mul(out.A3[{a, b, m}], out.A3[{n, c, d}], gh);
                                    rhs = rhs + gmn * mul(out.A3[{b, c, m}], out.A3[{a, n, d}], gh);
                                }
                            if (!eq_mod(lhs, rhs, N - 2)) {
                                ok = false;
                                w = nm(a) + "," + nm(b) + "," + nm(c) + "," + nm(d);
                            }
                        }
            led.add("wdvv/quartic-residual", ok, w);
        }
    }

    // two- and three-point functions against the integral used as the cycle
    if (cs) {
        CycleSpec as_cycle = integral;
        bool ok2 = true, ok3 = true;
        std::string w2, w3;
        for (int a = 0; a < H; ++a)
            for (int b = 0; b < H; ++b) {
                ScalarSeries lhs = apply_cycle(as_cycle, cs->Pi.at({a, b}));
                if (!eq_mod(lhs, g[static_cast<size_t>(a)][static_cast<size_t>(b)], N - 2)) {
                    ok2 = false;
                    w2 = nm(a) + "," + nm(b);
                }
            }
        for (int a = 0; a < H && cs->max_arity >= 3; ++a)
            for (int b = 0; b < H; ++b)
                for (int c = 0; c < H; ++c) {
                    ScalarSeries lhs = apply_cycle(as_cycle, cs->Pi.at({a, b, c}));
                    if (!eq_mod(lhs, out.A3[{a, b, c}], N - 3)) {
                        ok3 = false;
                        w3 = nm(a) + "," + nm(b) + "," + nm(c);
                    }
                }
        led.add("wdvv/two-point-metric", ok2, w2);
        led.add("wdvv/three-point-tensor", ok3, w3);
    }
    return out;
}

}  // namespace bvqft
