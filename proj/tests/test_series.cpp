#include <doctest.h>

#include "bvqft/series.hpp"
#include "bvqft/util.hpp"

using namespace bvqft;

namespace {
const std::vector<int> kGhosts{0, -1, 0, 1};  // four formal directions, two odd

ScalarSeries mono(const std::vector<int>& letters, int h, const Rat& c) {
    NormWord nw = normalize_word(letters, kGhosts);
    ScalarSeries s = series_zero<Rat>(0, kNoCap, kNoCap);
    if (!nw.zero) s.add_term({nw.w, h}, Rat(nw.sign) * c);
    return s;
}
}  // namespace

TEST_CASE("word normalization and odd squares") {
    auto nw = normalize_word({1, 0}, kGhosts);
    CHECK(nw.w.a == std::vector<int>{0, 1});
    CHECK(nw.sign == 1);  // odd past even
    nw = normalize_word({3, 1}, kGhosts);
    CHECK(nw.w.a == std::vector<int>{1, 3});
    CHECK(nw.sign == -1);  // odd past odd
    nw = normalize_word({1, 1}, kGhosts);
    CHECK(nw.zero);
    nw = normalize_word({0, 0}, kGhosts);
    CHECK_FALSE(nw.zero);
}

TEST_CASE("scalar series product: polynomial identity") {
    // (t + t^2)(1 - t) = t - t^3 over one even variable, truncated at words <= 3
    ScalarSeries a = mono({0}, 0, Rat(1)) + mono({0, 0}, 0, Rat(1));
    ScalarSeries one = mono({}, 0, Rat(1));
    ScalarSeries b = one + Rat(-1) * mono({0}, 0, Rat(1));
    a.tmax = b.tmax = 3;
    ScalarSeries prod = mul(a, b, kGhosts);
    ScalarSeries want = mono({0}, 0, Rat(1)) + Rat(-1) * mono({0, 0, 0}, 0, Rat(1));
    want.tmax = 3;
    CHECK(prod == want);
}

TEST_CASE("odd coordinates anticommute") {
    ScalarSeries t1 = mono({1}, 0, Rat(1));
    ScalarSeries t3 = mono({3}, 0, Rat(1));
    CHECK(mul(t1, t3, kGhosts) == Rat(-1) * mul(t3, t1, kGhosts));
    CHECK(mul(t1, t1, kGhosts).zero());
}

TEST_CASE("graded commutativity and associativity of the scalar product") {
    Rng rng(42);
    auto rnd = [&](int ghost_par) {
        ScalarSeries s = series_zero<Rat>(0, 4, kNoCap);
        for (int t = 0; t < 4; ++t) {
            std::vector<int> letters;
            int len = static_cast<int>(rng.next() % 3);
            for (int i = 0; i < len; ++i) letters.push_back(static_cast<int>(rng.next() % 4));
            NormWord nw = normalize_word(letters, kGhosts);
            if (nw.zero || par(word_class_ghost(nw.w, kGhosts)) != ghost_par) continue;
            s.add_term({nw.w, static_cast<int>(rng.next() % 2)}, Rat(rng.small()));
        }
        s.ghost = -ghost_par;  // parity bookkeeping only
        return s;
    };
    for (int trial = 0; trial < 20; ++trial) {
        int pa = static_cast<int>(rng.next() % 2), pb = static_cast<int>(rng.next() % 2);
        int pc = static_cast<int>(rng.next() % 2);
        ScalarSeries a = rnd(pa), b = rnd(pb), c = rnd(pc);
        int sgn = (pa && pb) ? -1 : 1;
        CHECK(mul(a, b, kGhosts).terms == (Rat(sgn) * mul(b, a, kGhosts)).terms);
        CHECK(mul(mul(a, b, kGhosts), c, kGhosts).terms == mul(a, mul(b, c, kGhosts), kGhosts).terms);
    }
}

TEST_CASE("left derivative basics") {
    // d_1 (t^1) = 1 for an odd direction
    ScalarSeries t1 = mono({1}, 0, Rat(1));
    ScalarSeries d = partial(1, t1, kGhosts);
    CHECK(d.terms == mono({}, 0, Rat(1)).terms);
    // d_0 d_2 (1/2 t^2 t^0 X) = X for distinct even directions
    ScalarSeries m = mono({2, 0}, 0, Rat(1, 2));
    ScalarSeries dd = partial(0, partial(2, m, kGhosts), kGhosts);
    CHECK(dd.terms == mono({}, 0, Rat(1, 2)).terms);
    // derivative lowers the retained word length
    ScalarSeries capped = mono({0, 0}, 0, Rat(1));
    capped.tmax = 2;
    CHECK(partial(0, capped, kGhosts).tmax == 1);
}

TEST_CASE("derivatives graded-commute") {
    Rng rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        ScalarSeries s = series_zero<Rat>(0, 4, kNoCap);
        for (int t = 0; t < 5; ++t) {
            std::vector<int> letters;
            int len = static_cast<int>(rng.next() % 4);
            for (int i = 0; i < len; ++i) letters.push_back(static_cast<int>(rng.next() % 4));
            NormWord nw = normalize_word(letters, kGhosts);
            if (nw.zero) continue;
            s.add_term({nw.w, 0}, Rat(rng.small()));
        }
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                int sgn = (par(kGhosts[static_cast<size_t>(a)]) && par(kGhosts[static_cast<size_t>(b)])) ? -1 : 1;
                ScalarSeries lhs = partial(a, partial(b, s, kGhosts), kGhosts);
                ScalarSeries rhs = Rat(sgn) * partial(b, partial(a, s, kGhosts), kGhosts);
                CHECK(lhs.terms == rhs.terms);
            }
    }
}

TEST_CASE("parameter division") {
    std::vector<std::string> labels{"a", "b", "c", "d"};
    ScalarSeries x = mono({0}, 1, Rat(3));
    CHECK(hbar_divide(x, labels).terms == mono({0}, 0, Rat(3)).terms);
    CHECK(hbar_divide(hbar_shift(x, 3), labels).terms == hbar_shift(x, 2).terms);
    ScalarSeries bad = mono({0}, 0, Rat(1));
    CHECK_THROWS_AS(hbar_divide(bad, labels), DivisibilityError);
}

TEST_CASE("euler operator eigenvalues") {
    ScalarSeries m = mono({1, 3}, 0, Rat(1));  // class ghosts -1 and +1
    CHECK(euler_apply(m, kGhosts).zero());
    CHECK(mono({1, 1}, 0, Rat(1)).zero());
    ScalarSeries m3 = mono({1}, 0, Rat(2));
    CHECK(euler_apply(m3, kGhosts).terms == (Rat(-1) * m3).terms);
}

TEST_CASE("pair family canonicalization") {
    PairFam<ScalarSeries> fam(Sym2::Symmetric, kGhosts);
    ScalarSeries v = mono({}, 0, Rat(5));
    fam.set({2, 0, 1}, v);
    CHECK(fam.get({0, 2, 1}).terms == v.terms);  // even-even swap, no sign
    PairFam<ScalarSeries> odd(Sym2::Symmetric, kGhosts);
    odd.set({1, 3}, v);
    CHECK(odd.get({3, 1}).terms == (Rat(-1) * v).terms);  // odd-odd swap
    CHECK(odd.get({1, 1}).zero());                        // forced diagonal
    PairFam<ScalarSeries> alt(Sym2::Antisymmetric, kGhosts);
    alt.set({0, 2}, v);
    CHECK(alt.get({2, 0}).terms == (Rat(-1) * v).terms);
    CHECK(alt.get({0, 0}).zero());
    alt.set({1, 1}, v);  // odd antisymmetric diagonal is free
    CHECK(alt.get({1, 1}).terms == v.terms);
}
