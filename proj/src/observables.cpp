#include "bvqft/observables.hpp"

#include <functional>

namespace bvqft {

namespace {

bool eq_mod(const ScalarSeries& a, const ScalarSeries& b, int words) {
    if (words < 0) return true;
    return truncate_t(a, words) == truncate_t(b, words);
}

std::string tuple_name(const SolverState& st, const std::vector<int>& t) {
    std::string s = "(";
    for (size_t i = 0; i < t.size(); ++i) {
        if (i) s += ",";
        s += st.cx.hlabels[static_cast<size_t>(t[i])];
    }
    return s + ")";
}

HbarScalar hbar_scalar_of(const ScalarSeries& s) {
    HbarScalar out;
    for (auto& [k, v] : s.terms)
        if (k.w.len() == 0) out[k.h] = v;
    return out;
}

ScalarSeries scalar_to_series(const HbarScalar& h, int tmax) {
    ScalarSeries s = series_zero<Rat>(0, tmax, kNoCap);
    for (auto& [p, v] : h) s.add_term({Word{}, p}, v);
    return s;
}

void enumerate_tuples(int hdim, int arity, const std::function<void(const std::vector<int>&)>& body) {
    std::vector<int> t(static_cast<size_t>(arity), 0);
    while (true) {
        body(t);
        int i = arity - 1;
        while (i >= 0 && t[static_cast<size_t>(i)] == hdim - 1) {
            t[static_cast<size_t>(i)] = 0;
            --i;
        }
        if (i < 0) break;
        ++t[static_cast<size_t>(i)];
    }
}

// Greedy slice-wise solve for membership in the image of the twisted
// differential: words ascending, parameter powers ascending, each slice
// reduced against the classical differential with the canonical section.
// A nonzero class part in any slice means the element is not in the image.
bool in_twisted_image(const SolverState& st, const Element& R0, int cap_words) {
    const ElemCtx& cx = st.cx;
    Element R = truncate_t(R0, cap_words);
    if (R.zero()) return true;
    Element X = series_zero<CVec>(R.ghost - 1, cap_words, R.hmax);
    int pmin = R.hmin_present();
    int guard = R.hmax_present() + cx.alg().k_levels() * (cap_words + 2) + 2;
    for (int k = 0; k <= cap_words; ++k) {
        for (int p = pmin; p <= guard; ++p) {
            Element resid = truncate_t(R - apply_K_theta(cx, st.theta, X), cap_words);
            for (auto& [key, v] : resid.terms) {
                if (static_cast<int>(key.w.len()) != k || key.h != p) continue;
                if (!st.td.coh.is_closed(cx.alg(), v)) return false;
                auto dec = st.td.coh.decompose(cx.alg(), v);
                if (!dec.cls.zero()) return false;
                if (!dec.y.zero()) X.add_term({key.w, p}, dec.y);
            }
        }
    }
    return truncate_t(R - apply_K_theta(cx, st.theta, X), cap_words).zero();
}

}  // namespace

HbarScalar one_point(const SolverState& st, const CycleSpec& cycle, int alpha) {
    HbarScalar out;
    for (int l = 0; l <= st.td.levels; ++l) {
        CVec fv = st.td.apply_f_level(l, CVec::unit(alpha));
        for (int c = 0; c <= cycle.top_level(); ++c) {
            Rat v = cycle.pair(c, fv);
            if (v == 0) continue;
            Rat& slot = out[l + c];
            slot += v;
            if (slot == 0) out.erase(l + c);
        }
    }
    return out;
}

PTensors p_tensors(const SolverState& st, Ledger& led) {
    PTensors out;
    const int H = st.hdim();
    const int N = st.order;
    const auto& gh = st.cx.hghosts;
    out.max_arity = N;

    for (int a = 0; a < H; ++a)
        for (int b = 0; b < H; ++b)
            for (int g = 0; g < H; ++g) out.P[{a, b, g}] = truncate_t(st.a_series(a, b, g), N - 2);
    for (int k = 3; k <= N; ++k) {
        enumerate_tuples(H, k, [&](const std::vector<int>& tup) {
            std::vector<int> rest(tup.begin() + 1, tup.end());
            int a1 = tup[0];
            for (int g = 0; g < H; ++g) {
                std::vector<int> key = rest;
                key.push_back(g);
                ScalarSeries v = Rat(-1) * hbar_shift(partial(a1, out.P[key], gh), 1);
                for (int r = 0; r < H; ++r) {
                    std::vector<int> kr = rest;
                    kr.push_back(r);
                    v = v + mul(out.P[kr], st.a_series(a1, r, g), gh);
                }
                std::vector<int> full = tup;
                full.push_back(g);
                out.P[full] = truncate_t(v, N - k);
            }
        });
    }
    // degree bound and unit stability
    {
        bool deg_ok = true, unit_ok = true;
        std::string w1, w2;
        for (auto& [key, s] : out.P) {
            int arity = static_cast<int>(key.size()) - 1;
            for (auto& [k, v] : s.terms)
                if (k.h < 0 || k.h > arity - 2) {
                    deg_ok = false;
                    w1 = tuple_name(st, key);
                }
        }
        for (int k = 2; k < N && unit_ok; ++k) {
            enumerate_tuples(H, k, [&](const std::vector<int>& tup) {
                for (int g = 0; g < H; ++g) {
                    std::vector<int> key0 = {0};
                    key0.insert(key0.end(), tup.begin(), tup.end());
                    key0.push_back(g);
                    std::vector<int> key = tup;
                    key.push_back(g);
                    if (!eq_mod(out.P.at(key0), out.P.at(key), N - k - 1)) {
                        unit_ok = false;
                        w2 = tuple_name(st, tup);
                    }
                }
            });
        }
        led.add("ptensor/parameter-degree-bound", deg_ok, w1);
        led.add("ptensor/unit-stability", unit_ok, w2);
    }
    for (auto& [key, s] : out.P) out.p[key] = hbar_scalar_of(s);
    return out;
}

QuantumCoordinates quantum_coordinates(const SolverState& st, const PTensors& pt, Ledger& led) {
    QuantumCoordinates qc;
    const int H = st.hdim();
    const int N = st.order;
    const auto& gh = st.cx.hghosts;

    // assemble the coordinates from the origin tensors
    qc.T.resize(static_cast<size_t>(H));
    for (int g = 0; g < H; ++g) {
        ScalarSeries t = series_zero<Rat>(-gh[static_cast<size_t>(g)], N, kNoCap);
        Word w;
        w.a = {g};
        t.add_term({w, 0}, Rat(1));
        qc.T[static_cast<size_t>(g)] = t;
    }
    Rat factorial(1);
    for (int k = 2; k <= N; ++k) {
        factorial *= k;
        Rat coef = Rat((k % 2) ? 1 : -1) / factorial;  // (-1)^{k-1}/k!
        enumerate_tuples(H, k, [&](const std::vector<int>& tup) {
            std::vector<int> key = tup;
            key.push_back(0);
            for (int g = 0; g < H; ++g) {
                key.back() = g;
                auto it = pt.p.find(key);
                if (it == pt.p.end() || it->second.empty()) continue;
                // word t^{alpha_k} ... t^{alpha_1}
                std::vector<int> seq(tup.rbegin(), tup.rend());
                NormWord nw = normalize_word(std::move(seq), gh);
                if (nw.zero) continue;
                for (auto& [hp, val] : it->second)
                    qc.T[static_cast<size_t>(g)].add_term({nw.w, hp - (k - 1)}, Rat(nw.sign) * coef * val);
            }
        });
    }

    // coordinate differentials and the inverse matrix
    qc.G.assign(static_cast<size_t>(H), std::vector<ScalarSeries>(static_cast<size_t>(H)));
    for (int b = 0; b < H; ++b)
        for (int g = 0; g < H; ++g) qc.G[static_cast<size_t>(b)][static_cast<size_t>(g)] = partial(b, qc.T[static_cast<size_t>(g)], gh);
    auto mat_id = [&](int cap) {
        std::vector<std::vector<ScalarSeries>> m(static_cast<size_t>(H),
                                                 std::vector<ScalarSeries>(static_cast<size_t>(H)));
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < H; ++j) {
                m[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                    series_zero<Rat>(gh[static_cast<size_t>(i)] - gh[static_cast<size_t>(j)], cap, kNoCap);
                if (i == j) m[static_cast<size_t>(i)][static_cast<size_t>(j)].add_term({Word{}, 0}, Rat(1));
            }
        return m;
    };
    const int gcap = N - 1;
    qc.Ginv = mat_id(gcap);
    for (int iter = 0; iter < gcap; ++iter) {
        // Ginv <- id - (G - id) * Ginv, word order grows by one each pass
        auto next = mat_id(gcap);
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < H; ++j) {
                ScalarSeries acc = next[static_cast<size_t>(i)][static_cast<size_t>(j)];
                for (int r = 0; r < H; ++r) {
                    ScalarSeries off = qc.G[static_cast<size_t>(i)][static_cast<size_t>(r)];
                    if (i == r) {
                        ScalarSeries one = series_zero<Rat>(0, gcap, kNoCap);
                        one.add_term({Word{}, 0}, Rat(1));
                        off = off - one;
                    }
                    acc = acc - truncate_t(mul(off, qc.Ginv[static_cast<size_t>(r)][static_cast<size_t>(j)], gh), gcap);
                }
                next[static_cast<size_t>(i)][static_cast<size_t>(j)] = acc;
            }
        qc.Ginv = next;
    }
    {
        bool ok = true;
        std::string w;
        for (int i = 0; i < H && ok; ++i)
            for (int j = 0; j < H && ok; ++j) {
                ScalarSeries acc = series_zero<Rat>(0, gcap, kNoCap);
                for (int r = 0; r < H; ++r)
                    acc = acc + truncate_t(mul(qc.G[static_cast<size_t>(i)][static_cast<size_t>(r)],
                                               qc.Ginv[static_cast<size_t>(r)][static_cast<size_t>(j)], gh),
                                           gcap);
                ScalarSeries want = series_zero<Rat>(0, gcap, kNoCap);
                if (i == j) want.add_term({Word{}, 0}, Rat(1));
                if (!(acc == want)) {
                    ok = false;
                    w = st.cx.hlabels[static_cast<size_t>(i)] + "," + st.cx.hlabels[static_cast<size_t>(j)];
                }
            }
        led.add("coordinates/matrix-invertible", ok, w);
    }

    // the system of differential equations for the coordinates
    {
        bool ok = true;
        std::string w;
        for (int a = 0; a < H && ok; ++a)
            for (int b = 0; b < H && ok; ++b)
                for (int g = 0; g < H && ok; ++g) {
                    ScalarSeries lhs = hbar_shift(partial(a, partial(b, qc.T[static_cast<size_t>(g)], gh), gh), 1);
                    for (int r = 0; r < H; ++r)
                        lhs = lhs + mul(st.a_series(a, b, r), partial(r, qc.T[static_cast<size_t>(g)], gh), gh);
                    if (!eq_mod(lhs, series_zero<Rat>(lhs.ghost, N, kNoCap), N - 2)) {
                        ok = false;
                        w = tuple_name(st, {a, b, g});
                    }
                }
        led.add("coordinates/second-order-system", ok, w);
        ok = true;
        for (int g = 0; g < H && ok; ++g) {
            ScalarSeries lhs = hbar_shift(partial(0, qc.T[static_cast<size_t>(g)], gh), 1) + qc.T[static_cast<size_t>(g)];
            ScalarSeries want = series_zero<Rat>(lhs.ghost, N - 1, kNoCap);
            if (g == 0) want.add_term({Word{}, 1}, Rat(1));
            if (!eq_mod(lhs, want, N - 1)) {
                ok = false;
                w = st.cx.hlabels[static_cast<size_t>(g)];
            }
        }
        led.add("coordinates/unit-direction", ok, w);
        ok = true;
        for (int g = 0; g < H && ok; ++g) {
            ScalarSeries lhs = euler_apply(qc.T[static_cast<size_t>(g)], gh);
            if (!(lhs == Rat(gh[static_cast<size_t>(g)]) * qc.T[static_cast<size_t>(g)])) {
                ok = false;
                w = st.cx.hlabels[static_cast<size_t>(g)];
            }
        }
        led.add("coordinates/homogeneity", ok, w);
    }
    // differential-matrix identities
    {
        bool ok = true;
        std::string w;
        for (int b = 0; b < H && ok; ++b)
            for (int g = 0; g < H && ok; ++g) {
                ScalarSeries lhs = hbar_shift(partial(0, qc.G[static_cast<size_t>(b)][static_cast<size_t>(g)], gh), 1) +
                                   qc.G[static_cast<size_t>(b)][static_cast<size_t>(g)];
                if (!eq_mod(lhs, series_zero<Rat>(lhs.ghost, N, kNoCap), N - 2)) {
                    ok = false;
                    w = st.cx.hlabels[static_cast<size_t>(b)];
                }
            }
        led.add("coordinates/matrix-unit-direction", ok, w);
        ok = true;
        for (int b = 0; b < H && ok; ++b)
            for (int g = 0; g < H && ok; ++g) {
                ScalarSeries s = qc.G[static_cast<size_t>(b)][static_cast<size_t>(g)];
                int weight = gh[static_cast<size_t>(g)] - gh[static_cast<size_t>(b)];
                if (!(euler_apply(s, gh) == Rat(weight) * s)) {
                    ok = false;
                    w = st.cx.hlabels[static_cast<size_t>(b)];
                }
            }
        led.add("coordinates/matrix-homogeneity", ok, w);
    }
    // recover the connection from the coordinate differentials, exactly
    {
        bool ok = true;
        std::string w;
        for (int a = 0; a < H && ok; ++a)
            for (int b = 0; b < H && ok; ++b)
                for (int g = 0; g < H && ok; ++g) {
                    ScalarSeries acc = series_zero<Rat>(0, N - 2, kNoCap);
                    for (int r = 0; r < H; ++r)
                        acc = acc +
                              mul(partial(a, qc.G[static_cast<size_t>(b)][static_cast<size_t>(r)], gh),
                                  qc.Ginv[static_cast<size_t>(r)][static_cast<size_t>(g)], gh);
                    ScalarSeries rec = Rat(-1) * hbar_shift(acc, 1);
                    if (!eq_mod(rec, st.a_series(a, b, g), N - 2)) {
                        ok = false;
                        w = tuple_name(st, {a, b, g});
                    }
                }
        led.add("coordinates/connection-recovered", ok, w);
    }
    return qc;
}

CorrelatorSet correlators(const SolverState& st, const PTensors& pt, int max_arity, Ledger& led) {
    CorrelatorSet cs;
    const int H = st.hdim();
    const int N = st.order;
    const auto& gh = st.cx.hghosts;
    cs.max_arity = max_arity;
    cs.exp_gen = exp_neg_theta_over_hbar(st.cx, st.theta, N);

    // closedness of the generating exponential
    {
        Element ke = truncate_t(apply_K(st.cx, cs.exp_gen), N);
        led.add("correlators/exponential-closed", ke.zero(), "");
    }

    // prefactor correlators by the twisted-derivation recursion
    for (int a = 0; a < H; ++a) cs.Pi[{a}] = st.theta_d(a);
    for (int k = 2; k <= max_arity; ++k) {
        enumerate_tuples(H, k, [&](const std::vector<int>& tup) {
            std::vector<int> rest(tup.begin() + 1, tup.end());
            int a1 = tup[0];
            const Element& prev = cs.Pi.at(rest);
            Element v = Rat(-1) * hbar_shift(partial(a1, prev, gh), 1) + mul(st.cx, st.theta_d(a1), prev);
            cs.Pi[tup] = v;
        });
    }
    for (auto& [key, e] : cs.Pi) {
        HbarVec hv;
        for (auto& [k, v] : e.terms)
            if (k.w.len() == 0) hv.add(k.h, v);
        cs.pi[key] = hv;
    }

    // the recursion against the direct derivatives of the exponential:
    // (-hbar)^n d^n exp must equal the prefactor correlator times exp
    {
        bool ok = true;
        std::string w;
        for (int k = 1; k <= std::min(max_arity, 4) && ok; ++k) {
            enumerate_tuples(H, k, [&](const std::vector<int>& tup) {
                Element direct = cs.exp_gen;
                for (auto it = tup.rbegin(); it != tup.rend(); ++it)
                    direct = Rat(-1) * hbar_shift(partial(*it, direct, gh), 1);
                int cap = N - k;
                Element via = truncate_t(mul(st.cx, cs.Pi.at(tup), cs.exp_gen), cap);
                if (!(truncate_t(direct, cap) == via)) {
                    ok = false;
                    w = tuple_name(st, tup);
                }
            });
        }
        led.add("correlators/derivative-route", ok, w);
    }

    // closed combinatorial expansions for low arities, with explicit signs
    {
        auto td1 = [&](int a) { return st.theta_d(a); };
        auto td2 = [&](int a, int b) { return st.theta_dd(a, b); };
        auto td3 = [&](int a, int b, int c) {
            return partial(a, partial(b, partial(c, st.theta, gh), gh), gh);
        };
        auto td4 = [&](int a, int b, int c, int d) {
            return partial(a, partial(b, partial(c, partial(d, st.theta, gh), gh), gh), gh);
        };
        auto gp = [&](int a) { return par(gh[static_cast<size_t>(a)]); };
        auto M = [&](const Element& x, const Element& y) { return mul(st.cx, x, y); };
        auto hb = [&](const Element& x, int k) { return hbar_shift(x, k); };
        bool ok = true;
        std::string w;
        if (max_arity >= 2)
            enumerate_tuples(H, 2, [&](const std::vector<int>& t) {
                Element oracle = M(td1(t[0]), td1(t[1])) - hb(td2(t[0], t[1]), 1);
                int cap = N - 2;
                if (!(truncate_t(cs.Pi.at(t), cap) == truncate_t(oracle, cap))) {
                    ok = false;
                    w = tuple_name(st, t);
                }
            });
        led.add("correlators/expansion-arity-2", ok, w);
        ok = true;
        if (max_arity >= 3)
            enumerate_tuples(H, 3, [&](const std::vector<int>& t) {
                int a = t[0], b = t[1], c = t[2];
                Element oracle = M(M(td1(a), td1(b)), td1(c));
                oracle = oracle - hb(M(td2(a, b), td1(c)), 1);
                oracle = oracle - hb(M(td1(a), td2(b, c)), 1);
                oracle = oracle - Rat((gp(a) && gp(b)) ? -1 : 1) * hb(M(td1(b), td2(a, c)), 1);
                oracle = oracle + hb(td3(a, b, c), 2);
                int cap = N - 3;
                if (!(truncate_t(cs.Pi.at(t), cap) == truncate_t(oracle, cap))) {
                    ok = false;
                    w = tuple_name(st, t);
                }
            });
        led.add("correlators/expansion-arity-3", ok, w);
        ok = true;
        if (max_arity >= 4)
            enumerate_tuples(H, 4, [&](const std::vector<int>& t) {
                int a1 = t[0], a2 = t[1], a3 = t[2], a4 = t[3];
                auto s = [&](bool neg) { return Rat(neg ? -1 : 1); };
                Element oracle = M(M(M(td1(a1), td1(a2)), td1(a3)), td1(a4));
                oracle = oracle - hb(M(M(td2(a1, a2), td1(a3)), td1(a4)), 1);
                oracle = oracle - hb(M(M(td1(a1), td2(a2, a3)), td1(a4)), 1);
                oracle = oracle - hb(M(M(td1(a1), td1(a2)), td2(a3, a4)), 1);
                oracle = oracle - s(gp(a1) && gp(a2)) * hb(M(M(td1(a2), td2(a1, a3)), td1(a4)), 1);
                oracle = oracle - s(gp(a1) && par(gh[static_cast<size_t>(a2)] + gh[static_cast<size_t>(a3)])) *
                                      hb(M(M(td1(a2), td1(a3)), td2(a1, a4)), 1);
                oracle = oracle - s(gp(a2) && gp(a3)) * hb(M(M(td1(a1), td1(a3)), td2(a2, a4)), 1);
                oracle = oracle + hb(M(td2(a1, a2), td2(a3, a4)), 2);
                oracle = oracle + s(gp(a2) && gp(a3)) * hb(M(td2(a1, a3), td2(a2, a4)), 2);
                oracle = oracle + s(gp(a1) && par(gh[static_cast<size_t>(a2)] + gh[static_cast<size_t>(a3)])) *
                                      hb(M(td2(a2, a3), td2(a1, a4)), 2);
                oracle = oracle + hb(M(td1(a1), td3(a2, a3, a4)), 2);
                oracle = oracle + s(gp(a1) && gp(a2)) * hb(M(td1(a2), td3(a1, a3, a4)), 2);
                oracle = oracle + s(par(gh[static_cast<size_t>(a1)] + gh[static_cast<size_t>(a2)]) && gp(a3)) *
                                      hb(M(td1(a3), td3(a1, a2, a4)), 2);
                oracle = oracle + hb(M(td3(a1, a2, a3), td1(a4)), 2);
                oracle = oracle - hb(td4(a1, a2, a3, a4), 3);
                int cap = N - 4;
                if (!(truncate_t(cs.Pi.at(t), cap) == truncate_t(oracle, cap))) {
                    ok = false;
                    w = tuple_name(st, t);
                }
            });
        led.add("correlators/expansion-arity-4", ok, w);
    }

    // unit direction drops out
    {
        bool ok = true;
        std::string w;
        for (int k = 1; k < max_arity && ok; ++k) {
            enumerate_tuples(H, k, [&](const std::vector<int>& tup) {
                std::vector<int> with0 = {0};
                with0.insert(with0.end(), tup.begin(), tup.end());
                int cap = N - k;
                if (!(truncate_t(cs.Pi.at(with0), cap) == truncate_t(cs.Pi.at(tup), cap))) {
                    ok = false;
                    w = tuple_name(st, tup);
                }
            });
        }
        led.add("correlators/unit-stability", ok, w);
    }

    // twisted closedness of the family correlators
    {
        bool ok = true;
        std::string w;
        for (int k = 1; k <= std::min(max_arity, 3) && ok; ++k) {
            enumerate_tuples(H, k, [&](const std::vector<int>& tup) {
                int cap = N - k;
                Element kt = truncate_t(apply_K_theta(st.cx, st.theta, cs.Pi.at(tup)), cap);
                if (!kt.zero()) {
                    ok = false;
                    w = tuple_name(st, tup);
                }
            });
        }
        led.add("correlators/twisted-closed", ok, w);
    }

    // structural reduction: the correlator minus its connection-tower part
    // lies in the image of the twisted differential
    {
        bool ok = true;
        std::string w;
        for (int k = 2; k <= std::min(max_arity, 3) && ok; ++k) {
            enumerate_tuples(H, k, [&](const std::vector<int>& tup) {
                int cap = N - k;
                Element R = truncate_t(cs.Pi.at(tup), cap);
                for (int g = 0; g < H; ++g) {
                    std::vector<int> key = tup;
                    key.push_back(g);
                    R = R - truncate_t(mul(st.cx, pt.P.at(key), cs.Pi.at({g})), cap);
                }
                if (!in_twisted_image(st, R, cap)) {
                    ok = false;
                    w = tuple_name(st, tup);
                }
            });
        }
        led.add("correlators/twisted-image-structure", ok, w);
    }
    return cs;
}

ScalarSeries generating_function(const SolverState& st, const PTensors& pt, const QuantumCoordinates& qc,
                                 const CorrelatorSet& cs, const CycleSpec& cycle, Ledger& led) {
    const int H = st.hdim();
    const int N = st.order;
    const auto& gh = st.cx.hghosts;

    ScalarSeries Z = apply_cycle(cycle, cs.exp_gen);
    Z.ghost = -cycle.dimension;

    // two routes to the generating function
    {
        ScalarSeries Z2 = series_zero<Rat>(Z.ghost, N, kNoCap);
        HbarScalar one = one_point(st, cycle, 0);
        // <1> term: pairing of the unit representative
        CVec unit_vec = CVec::unit(st.cx.alg().basis.unit);
        for (int c = 0; c <= cycle.top_level(); ++c) {
            Rat v = cycle.pair(c, unit_vec);
            if (v != 0) Z2.add_term({Word{}, c}, v);
        }
        for (int g = 0; g < H; ++g) {
            HbarScalar og = one_point(st, cycle, g);
            if (og.empty()) continue;
            ScalarSeries term = mul(qc.T[static_cast<size_t>(g)], scalar_to_series(og, N), gh);
            Z2 = Z2 - hbar_shift(term, -1);
        }
        led.add("generating/coordinate-route", Z == Z2, "");
    }
    // differential equations
    {
        bool ok = true;
        std::string w;
        for (int a = 0; a < H && ok; ++a)
            for (int b = 0; b < H && ok; ++b) {
                ScalarSeries lhs = hbar_shift(partial(a, partial(b, Z, gh), gh), 1);
                for (int r = 0; r < H; ++r) lhs = lhs + mul(st.a_series(a, b, r), partial(r, Z, gh), gh);
                if (!eq_mod(lhs, series_zero<Rat>(lhs.ghost, N, kNoCap), N - 2)) {
                    ok = false;
                    w = st.cx.hlabels[static_cast<size_t>(a)] + "," + st.cx.hlabels[static_cast<size_t>(b)];
                }
            }
        led.add("generating/second-order-system", ok, w);
        ScalarSeries unit_eq = hbar_shift(partial(0, Z, gh), 1) + Z;
        led.add("generating/unit-direction", eq_mod(unit_eq, series_zero<Rat>(Z.ghost, N, kNoCap), N - 1), "");
        led.add("generating/homogeneity", euler_apply(Z, gh) == Rat(cycle.dimension) * Z, "");
    }
    // one-point functions through the coordinate differentials
    {
        bool ok = true;
        std::string w;
        for (int b = 0; b < H && ok; ++b) {
            ScalarSeries lhs = Rat(-1) * hbar_shift(partial(b, Z, gh), 1);
            ScalarSeries rhs = series_zero<Rat>(lhs.ghost, N - 1, kNoCap);
            for (int g = 0; g < H; ++g) {
                HbarScalar og = one_point(st, cycle, g);
                if (og.empty()) continue;
                rhs = rhs + mul(qc.G[static_cast<size_t>(b)][static_cast<size_t>(g)], scalar_to_series(og, N - 1), gh);
            }
            if (!eq_mod(lhs, rhs, N - 1)) {
                ok = false;
                w = st.cx.hlabels[static_cast<size_t>(b)];
            }
        }
        led.add("generating/one-point-transport", ok, w);
    }
    // family correlation functions: cycle route equals derivative route, and
    // both reduce to the connection tower applied to one-point functions
    {
        bool route_ok = true, tower_ok = true, origin_ok = true;
        std::string w1, w2, w3;
        for (int k = 1; k <= std::min(cs.max_arity, st.order); ++k) {
            enumerate_tuples(H, k, [&](const std::vector<int>& tup) {
                int cap = N - k;
                ScalarSeries direct = apply_cycle(cycle, truncate_t(mul(st.cx, cs.Pi.at(tup), cs.exp_gen), cap));
                ScalarSeries deriv = Z;
                for (auto it = tup.rbegin(); it != tup.rend(); ++it)
                    deriv = Rat(-1) * hbar_shift(partial(*it, deriv, gh), 1);
                if (!eq_mod(direct, deriv, cap)) {
                    route_ok = false;
                    w1 = tuple_name(st, tup);
                }
                if (k >= 2) {
                    ScalarSeries rhs = series_zero<Rat>(direct.ghost, cap, kNoCap);
                    for (int g = 0; g < H; ++g) {
                        std::vector<int> key = tup;
                        key.push_back(g);
                        ScalarSeries pig = apply_cycle(cycle, truncate_t(mul(st.cx, cs.Pi.at({g}), cs.exp_gen), cap));
                        rhs = rhs + mul(pt.P.at(key), pig, gh);
                    }
                    if (!eq_mod(direct, rhs, cap)) {
                        tower_ok = false;
                        w2 = tuple_name(st, tup);
                    }
                    // origin values against the origin tower
                    HbarScalar lhs0;
                    for (auto& [kk, v] : direct.terms)
                        if (kk.w.len() == 0) lhs0[kk.h] = v;
                    HbarScalar rhs0;
                    for (int g = 0; g < H; ++g) {
                        std::vector<int> key = tup;
                        key.push_back(g);
                        auto itp = pt.p.find(key);
                        if (itp == pt.p.end()) continue;
                        HbarScalar og = one_point(st, cycle, g);
                        for (auto& [p1, v1] : itp->second)
                            for (auto& [p2, v2] : og) {
                                Rat& slot = rhs0[p1 + p2];
                                slot += v1 * v2;
                                if (slot == 0) rhs0.erase(p1 + p2);
                            }
                    }
                    if (!(lhs0 == rhs0)) {
                        origin_ok = false;
                        w3 = tuple_name(st, tup);
                    }
                }
            });
        }
        led.add("generating/correlator-route-equivalence", route_ok, w1);
        led.add("generating/connection-tower", tower_ok, w2);
        led.add("generating/origin-tower", origin_ok, w3);
    }
    return Z;
}

FreeEnergy free_energy(const SolverState& st, const QuantumCoordinates& qc, const CycleSpec& cycle, Ledger& led) {
    const int H = st.hdim();
    const int N = st.order;
    const auto& gh = st.cx.hghosts;
    FreeEnergy fe;

    // the cycle must be unital: dimension zero and unit expectation one
    {
        bool ok = cycle.dimension == 0;
        CVec unit_vec = CVec::unit(st.cx.alg().basis.unit);
        for (int c = 0; c <= cycle.top_level() && ok; ++c) {
            Rat v = cycle.pair(c, unit_vec);
            if (c == 0 ? v != 1 : v != 0) ok = false;
        }
        led.add("free-energy/unital-cycle", ok, "unit expectation");
        if (!ok) return fe;
    }

    ScalarSeries S = series_zero<Rat>(0, N, kNoCap);
    S.add_term({Word{}, 0}, Rat(1));
    for (int g = 0; g < H; ++g) {
        HbarScalar og = one_point(st, cycle, g);
        if (og.empty()) continue;
        S = S - hbar_shift(mul(qc.T[static_cast<size_t>(g)], scalar_to_series(og, N), gh), -1);
    }

    // solve exp(-F/hbar) = S degree by degree in the coordinates
    ScalarSeries F = series_zero<Rat>(0, N, kNoCap);
    for (int k = 1; k <= N; ++k) {
        // exponential sum with the layers found so far
        ScalarSeries expo = series_zero<Rat>(0, N, kNoCap);
        expo.add_term({Word{}, 0}, Rat(1));
        ScalarSeries pw = expo;
        Rat factorial(1);
        for (int m = 1; m <= N; ++m) {
            pw = truncate_t(mul(pw, F, gh), N);
            factorial *= m;
            expo = expo + (Rat((m % 2) ? -1 : 1) / factorial) * hbar_shift(pw, -m);
        }
        ScalarSeries defect = word_part(S - expo, k);
        F = F + Rat(-1) * hbar_shift(defect, 1);
    }
    fe.F = F;
    {
        ScalarSeries expo = series_zero<Rat>(0, N, kNoCap);
        expo.add_term({Word{}, 0}, Rat(1));
        ScalarSeries pw = expo;
        Rat factorial(1);
        for (int m = 1; m <= N; ++m) {
            pw = truncate_t(mul(pw, F, gh), N);
            factorial *= m;
            expo = expo + (Rat((m % 2) ? -1 : 1) / factorial) * hbar_shift(pw, -m);
        }
        led.add("free-energy/exponential-roundtrip", expo == S, "");
    }
    // power series in the parameter: no surviving negative powers
    {
        bool ok = true;
        std::string w;
        for (auto& [k, v] : F.terms)
            if (k.h < 0) {
                ok = false;
                w = k.w.str(st.cx.hlabels) + " at power " + std::to_string(k.h);
            }
        led.add("free-energy/parameter-positivity", ok, w);
    }
    led.add("free-energy/vanishes-at-origin", eval_t0(F).empty(), "");
    {
        ScalarSeries d0 = partial(0, F, gh);
        ScalarSeries one = series_zero<Rat>(0, N - 1, kNoCap);
        one.add_term({Word{}, 0}, Rat(1));
        led.add("free-energy/unit-direction", eq_mod(d0, one, N - 1), "");
    }
    {
        bool ok = true;
        std::string w;
        for (int a = 0; a < H && ok; ++a)
            for (int b = 0; b < H && ok; ++b) {
                ScalarSeries lhs = hbar_shift(partial(a, partial(b, F, gh), gh), 1);
                ScalarSeries rhs = mul(partial(a, F, gh), partial(b, F, gh), gh);
                for (int g = 0; g < H; ++g) rhs = rhs - mul(st.a_series(a, b, g), partial(g, F, gh), gh);
                if (!eq_mod(lhs, rhs, N - 2)) {
                    ok = false;
                    w = st.cx.hlabels[static_cast<size_t>(a)] + "," + st.cx.hlabels[static_cast<size_t>(b)];
                }
            }
        led.add("free-energy/master-equation", ok, w);
    }
    // derivative coefficients at the origin and their recursion
    {
        auto phi_at = [&](const std::vector<int>& tup) {
            ScalarSeries d = F;
            for (auto it = tup.rbegin(); it != tup.rend(); ++it) d = partial(*it, d, gh);
            HbarScalar out;
            for (auto& [k, v] : d.terms)
                if (k.w.len() == 0) out[k.h] = v;
            return out;
        };
        for (int a = 0; a < H; ++a) fe.phi[{a}] = phi_at({a});
        for (int a = 0; a < H; ++a)
            for (int b = 0; b < H; ++b) fe.phi[{a, b}] = phi_at({a, b});
        for (int a = 0; a < H; ++a)
            for (int b = 0; b < H; ++b)
                for (int c = 0; c < H; ++c) fe.phi[{a, b, c}] = phi_at({a, b, c});

        bool ok = true;
        std::string w;
        for (int a = 0; a < H && ok; ++a) {
            if (!(fe.phi[{a}] == one_point(st, cycle, a))) {
                ok = false;
                w = st.cx.hlabels[static_cast<size_t>(a)];
            }
        }
        led.add("free-energy/one-point-match", ok, w);

        auto hmul = [](const HbarScalar& x, const HbarScalar& y) {
            HbarScalar out;
            for (auto& [p1, v1] : x)
                for (auto& [p2, v2] : y) {
                    Rat& slot = out[p1 + p2];
                    slot += v1 * v2;
                    if (slot == 0) out.erase(p1 + p2);
                }
            return out;
        };
        auto hshift = [](HbarScalar x) {
            HbarScalar out;
            for (auto& [p, v] : x) out[p + 1] = v;
            return out;
        };
        auto hsub = [](HbarScalar x, const HbarScalar& y) {
            for (auto& [p, v] : y) {
                Rat& slot = x[p];
                slot -= v;
                if (slot == 0) x.erase(p);
            }
            return x;
        };
        auto m_coef = [&](const std::vector<int>& lower, int g) {
            // multiplication tensors read off the connection at the origin
            ScalarSeries s = st.a_series(lower[lower.size() - 2], lower[lower.size() - 1], g);
            for (size_t i = lower.size() - 2; i-- > 0;) s = partial(lower[i], s, gh);
            auto v = eval_t0(s);
            return v.count(0) ? v[0] : Rat(0);
        };
        // arity-two recursion
        ok = true;
        for (int a = 0; a < H && ok; ++a)
            for (int b = 0; b < H && ok; ++b) {
                HbarScalar rhs = hmul(fe.phi[{a}], fe.phi[{b}]);
                for (int g = 0; g < H; ++g) {
                    Rat m = m_coef({a, b}, g);
                    if (m == 0) continue;
                    HbarScalar t = fe.phi[{g}];
                    for (auto& [p, v] : t) v *= m;
                    rhs = hsub(rhs, t);
                }
                if (!(hshift(fe.phi[{a, b}]) == rhs)) {
                    ok = false;
                    w = st.cx.hlabels[static_cast<size_t>(a)] + "," + st.cx.hlabels[static_cast<size_t>(b)];
                }
            }
        led.add("free-energy/two-point-recursion", ok, w);
        // arity-three recursion
        ok = true;
        for (int a = 0; a < H && ok; ++a)
            for (int b = 0; b < H && ok; ++b)
                for (int c = 0; c < H && ok; ++c) {
                    HbarScalar rhs = hmul(fe.phi[{a, b}], fe.phi[{c}]);
                    int sgn = (par(gh[static_cast<size_t>(a)]) && par(gh[static_cast<size_t>(b)])) ? -1 : 1;
                    HbarScalar t2 = hmul(fe.phi[{b}], fe.phi[{a, c}]);
                    for (auto& [p, v] : t2) v *= sgn;
                    for (auto& [p, v] : t2) {
                        Rat& slot = rhs[p];
                        slot += v;
                        if (slot == 0) rhs.erase(p);
                    }
                    for (int g = 0; g < H; ++g) {
                        Rat m2v = m_coef({b, c}, g);
                        if (m2v != 0) {
                            HbarScalar t = fe.phi[{a, g}];
                            for (auto& [p, v] : t) v *= m2v;
                            rhs = hsub(rhs, t);
                        }
                        Rat m3v = m_coef({a, b, c}, g);
                        if (m3v != 0) {
                            HbarScalar t = fe.phi[{g}];
                            for (auto& [p, v] : t) v *= m3v;
                            rhs = hsub(rhs, t);
                        }
                    }
                    if (!(hshift(fe.phi[{a, b, c}]) == rhs)) {
                        ok = false;
                        w = tuple_name(st, {a, b, c});
                    }
                }
        led.add("free-energy/three-point-recursion", ok, w);
    }
    return fe;
}

}  // namespace bvqft
