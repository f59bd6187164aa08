#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bvqft/linalg.hpp"
#include "bvqft/rational.hpp"

using namespace bvqft;

TEST_CASE("rational parsing") {
    CHECK(parse_rat("3/6") == Rat(1, 2));
    CHECK(parse_rat("-4") == Rat(-4));
    CHECK(rat_str(parse_rat("10/4")) == "5/2");
    CHECK_THROWS(parse_rat("1.5"));
    CHECK_THROWS(parse_rat(""));
}

TEST_CASE("koszul sign basics") {
    CHECK(koszul_sign({0, 1, 2}, {1, 1, 1}) == 1);
    CHECK(koszul_sign({1, 0}, {1, 1}) == -1);
    CHECK(koszul_sign({1, 0}, {0, 1}) == 1);
    // 3-cycle (2,0,1) on parities (1,1,0): inversions (2,0) odd*odd -> -1,
    // (2,1) odd*even -> +1
    CHECK(koszul_sign({2, 0, 1}, {1, 1, 0}) == -1);
}

TEST_CASE("koszul sign is multiplicative on equal parities") {
    // all-odd symbols: reduces to the ordinary signature, a homomorphism
    std::vector<int> ghosts{1, 1, 1, 1};
    std::vector<std::vector<int>> perms;
    std::vector<int> base{0, 1, 2, 3};
    std::sort(base.begin(), base.end());
    do perms.push_back(base);
    while (std::next_permutation(base.begin(), base.end()));
    for (auto& s : perms)
        for (auto& t : perms) {
            std::vector<int> st(4);
            for (int i = 0; i < 4; ++i) st[static_cast<size_t>(i)] = s[static_cast<size_t>(t[static_cast<size_t>(i)])];
            CHECK(koszul_sign(st, ghosts) == koszul_sign(s, ghosts) * koszul_sign(t, ghosts));
        }
}

TEST_CASE("canonical solve and kernel") {
    // rank-deficient 3x3 with a consistent target
    DenseMat A(3, 3);
    A.at(0, 0) = 1;
    A.at(0, 1) = 2;
    A.at(0, 2) = 3;
    A.at(1, 0) = 2;
    A.at(1, 1) = 4;
    A.at(1, 2) = 6;
    A.at(2, 0) = 1;
    A.at(2, 1) = 0;
    A.at(2, 2) = 1;
    LinSolve ls(A);
    CHECK(ls.rank() == 2);
    std::vector<Rat> b{Rat(6), Rat(12), Rat(2)};
    auto x = ls.solve(b);
    REQUIRE(x.has_value());
    // canonical: free variable (third column) set to zero
    CHECK((*x)[2] == 0);
    // reapplying the map reproduces the target exactly
    for (int r = 0; r < 3; ++r) {
        Rat acc(0);
        for (int c = 0; c < 3; ++c) acc += A.at(r, c) * (*x)[static_cast<size_t>(c)];
        CHECK(acc == b[static_cast<size_t>(r)]);
    }
    // infeasible target reports failure
    std::vector<Rat> bad{Rat(1), Rat(1), Rat(0)};
    CHECK_FALSE(ls.solve(bad).has_value());
    // kernel basis is canonical and in the kernel
    auto ker = ls.kernel_basis();
    REQUIRE(ker.size() == 1);
    for (int r = 0; r < 3; ++r) {
        Rat acc(0);
        for (int c = 0; c < 3; ++c) acc += A.at(r, c) * ker[0][static_cast<size_t>(c)];
        CHECK(acc == 0);
    }
}

TEST_CASE("identity solve returns the target") {
    DenseMat I(2, 2);
    I.at(0, 0) = 1;
    I.at(1, 1) = 1;
    LinSolve ls(I);
    std::vector<Rat> b{Rat(7), Rat(-3, 2)};
    auto x = ls.solve(b);
    REQUIRE(x.has_value());
    CHECK((*x)[0] == Rat(7));
    CHECK((*x)[1] == Rat(-3, 2));
    CHECK(ls.kernel_basis().empty());
}

TEST_CASE("span basis is deterministic echelon") {
    std::vector<CVec> vecs;
    vecs.push_back(CVec::unit(0, Rat(2)));
    CVec v;
    v.set(0, Rat(1));
    v.set(1, Rat(1));
    vecs.push_back(v);
    vecs.push_back(CVec::unit(0, Rat(5)));
    auto basis = span_basis(vecs, 3);
    REQUIRE(basis.size() == 2);
    CHECK(basis[0] == CVec::unit(0));
    CHECK(basis[1] == CVec::unit(1));
    CHECK(span_rank(vecs, 3) == 2);
}
