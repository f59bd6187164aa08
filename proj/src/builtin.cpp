#include "bvqft/instance.hpp"

namespace bvqft {

namespace {

// Truncated polynomial algebra on one even generator: k[e]/(e^3), with the
// socle-coefficient integral. Everything is classical; the integral also
// serves as the cycle.
AlgebraSpec make_frobenius_k0() {
    AlgebraSpec s;
    s.name = "frobenius-k0";
    s.basis.add("1", 0);
    s.basis.add("e", 0);
    s.basis.add("e2", 0);
    s.basis.unit = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i + j < 3) s.product[{i, j}].set(i + j, Rat(1));
    LinearMap zero;
    zero.rows = zero.cols = 3;
    zero.ghost_shift = 1;
    s.K.push_back(zero);
    IntegralSpec integral;
    integral.dimension = 0;
    integral.levels.push_back(CVec::unit(2));
    s.integral = integral;
    s.cycle = integral;
    s.trunc.t_order = 6;
    s.trunc.hbar_cap = 6;
    s.finalize();
    return s;
}

// One-dimensional unital instance; closed forms exist for the coordinate,
// the generating function, and the free energy.
AlgebraSpec make_point_unital() {
    AlgebraSpec s;
    s.name = "point-unital";
    s.basis.add("1", 0);
    s.basis.unit = 0;
    s.product[{0, 0}].set(0, Rat(1));
    LinearMap zero;
    zero.rows = zero.cols = 1;
    zero.ghost_shift = 1;
    s.K.push_back(zero);
    CycleSpec c;
    c.dimension = 0;
    c.levels.push_back(CVec::unit(0));
    s.cycle = c;
    s.integral = c;
    s.trunc.t_order = 6;
    s.trunc.hbar_cap = 6;
    s.finalize();
    return s;
}

// Chart model for the potential W = x^3/3 on the order-four neighborhood:
// even part k[x]/(x^4), one odd direction th dual to x, differential
// x^2 d/dth and second-order term x^2 dx d/dth. The x^2 coefficient keeps
// the second-order operator compatible with the truncation ideal (a bare
// dx d/dth would need x^4-terms the quotient discards, breaking the
// derivation law of the bracket). Quantum corrections to the
// representatives terminate after two levels; the quantization map and the
// solution are genuinely parameter-dependent. Ships with the unital cycle
// [1-coefficient] + hbar [x-coefficient].
AlgebraSpec make_dgbv_lg() {
    AlgebraSpec s;
    s.name = "dgbv-lg";
    auto idx = [](int i, int a) { return i + 4 * a; };
    for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 4; ++i) {
            std::string label = i == 0 ? "" : (i == 1 ? "x" : "x" + std::to_string(i));
            if (a) label += label.empty() ? "th" : "*th";
            if (label.empty()) label = "1";
            s.basis.add(label, -a);
        }
    s.basis.unit = 0;

    for (int a1 = 0; a1 < 2; ++a1)
        for (int i1 = 0; i1 < 4; ++i1)
            for (int a2 = 0; a2 < 2; ++a2)
                for (int i2 = 0; i2 < 4; ++i2) {
                    if (i1 + i2 > 3 || a1 + a2 > 1) continue;
                    s.product[{idx(i1, a1), idx(i2, a2)}].set(idx(i1 + i2, a1 + a2), Rat(1));
                }

    LinearMap Q;
    Q.rows = Q.cols = 8;
    Q.ghost_shift = 1;
    LinearMap K1;
    K1.rows = K1.cols = 8;
    K1.ghost_shift = 1;
    for (int i = 0; i < 4; ++i) {
        // x^2 d/dth
        if (i + 2 < 4) Q.add(idx(i + 2, 0), idx(i, 1), Rat(1));
        // level one carries minus x^2 dx d/dth
        if (i >= 1 && i + 1 < 4) K1.add(idx(i + 1, 0), idx(i, 1), Rat(-i));
    }
    s.K.push_back(Q);
    s.K.push_back(K1);

    CycleSpec c;
    c.dimension = 0;
    c.levels.push_back(CVec::unit(0));
    c.levels.push_back(CVec::unit(1));  // x coefficient at the next level
    s.cycle = c;
    s.trunc.t_order = 4;
    s.trunc.hbar_cap = 6;
    s.finalize();
    return s;
}

// Vanishing classical differential with a nonzero second-order term: every
// class survives classically but some have no quantum extension.
AlgebraSpec make_anomalous_demo() {
    AlgebraSpec s;
    s.name = "anomalous-demo";
    s.basis.add("1", 0);
    s.basis.add("x", 0);
    s.basis.add("th", -1);
    s.basis.add("x*th", -1);
    s.basis.unit = 0;
    auto idx = [](int i, int a) { return i + 2 * a; };
    for (int i1 = 0; i1 < 2; ++i1)
        for (int a1 = 0; a1 < 2; ++a1)
            for (int i2 = 0; i2 < 2; ++i2)
                for (int a2 = 0; a2 < 2; ++a2) {
                    if (i1 + i2 > 1 || a1 + a2 > 1) continue;
                    s.product[{idx(i1, a1), idx(i2, a2)}].set(idx(i1 + i2, a1 + a2), Rat(1));
                }
    LinearMap Q;
    Q.rows = Q.cols = 4;
    Q.ghost_shift = 1;
    LinearMap K1;
    K1.rows = K1.cols = 4;
    K1.ghost_shift = 1;
    K1.add(1, 3, Rat(-1));  // minus x dx d/dth on x*th
    s.K.push_back(Q);
    s.K.push_back(K1);
    s.trunc.t_order = 3;
    s.trunc.hbar_cap = 4;
    s.finalize();
    return s;
}

}  // namespace

AlgebraSpec builtin_instance(const std::string& name) {
    if (name == "frobenius-k0") return make_frobenius_k0();
    if (name == "point-unital") return make_point_unital();
    if (name == "dgbv-lg") return make_dgbv_lg();
    if (name == "anomalous-demo") return make_anomalous_demo();
    throw ParseError("unknown builtin instance: " + name);
}

std::vector<std::string> builtin_names() {
    return {"frobenius-k0", "point-unital", "dgbv-lg", "anomalous-demo"};
}

}  // namespace bvqft
