#include <doctest.h>

#include "bvqft/instance.hpp"
#include "bvqft/solver.hpp"
#include "bvqft/util.hpp"

using namespace bvqft;

namespace {

HbarVec random_series(const AlgebraSpec& spec, Rng& rng, int ghost, int top) {
    HbarVec v;
    for (int l = 0; l <= top; ++l) {
        CVec x;
        for (int i = 0; i < spec.dim(); ++i)
            if (spec.basis.ghost(i) == ghost && (rng.next() % 2)) x.add(i, Rat(rng.small()));
        v.add(l, x);
    }
    return v;
}

}  // namespace

TEST_CASE("cohomology dimensions against a rank oracle") {
    for (auto& name : builtin_names()) {
        AlgebraSpec spec = builtin_instance(name);
        CohomologyData coh = CohomologyData::compute(spec);
        std::map<int, int> expect;
        std::map<int, std::vector<int>> idx;
        for (int i = 0; i < spec.dim(); ++i) idx[spec.basis.ghost(i)].push_back(i);
        for (auto& [g, cols] : idx) {
            std::vector<CVec> imgs;
            for (int c : cols) {
                CVec q = spec.apply_K_level(0, CVec::unit(c));
                if (!q.zero()) imgs.push_back(q);
            }
            int rank = span_rank(imgs, spec.dim());
            expect[g] += static_cast<int>(cols.size()) - rank;
            expect[g + 1] -= rank;
        }
        std::map<int, int> got;
        for (int h = 0; h < coh.H.dim(); ++h) got[coh.H.ghost(h)]++;
        for (auto& [g, d] : expect) {
            INFO(name, " degree ", g);
            CHECK(got[g] == d);
        }
    }
    CHECK(CohomologyData::compute(builtin_instance("frobenius-k0")).H.dim() == 3);
    CHECK(CohomologyData::compute(builtin_instance("dgbv-lg")).H.dim() == 4);
}

TEST_CASE("unit class is pinned to the unit vector and placed first") {
    for (auto& name : builtin_names()) {
        AlgebraSpec spec = builtin_instance(name);
        CohomologyData coh = CohomologyData::compute(spec);
        REQUIRE(coh.H.dim() >= 1);
        CHECK(coh.H.ghost(0) == 0);
        CHECK(coh.reps[0] == CVec::unit(spec.basis.unit));
    }
}

TEST_CASE("canonical decomposition splits closed vectors") {
    AlgebraSpec spec = builtin_instance("dgbv-lg");
    CohomologyData coh = CohomologyData::compute(spec);
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        int gsel = (rng.next() % 2) ? 0 : -1;
        CVec v;
        for (int h = 0; h < coh.H.dim(); ++h)
            if (coh.H.ghost(h) == gsel && (rng.next() % 2))
                v += Rat(rng.small()) * coh.reps[static_cast<size_t>(h)];
        CVec pre;
        for (int i = 0; i < spec.dim(); ++i)
            if (spec.basis.ghost(i) == gsel - 1 && (rng.next() % 2)) pre.add(i, Rat(rng.small()));
        v += spec.apply_K_level(0, pre);
        if (v.zero()) continue;
        auto dec = coh.decompose(spec, v);
        CVec back = coh.apply_reps(dec.cls) + spec.apply_K_level(0, dec.y);
        CHECK(back == v);
    }
    CVec bad = CVec::unit(spec.basis.at("th"));
    CHECK_THROWS(coh.decompose(spec, bad));
}

TEST_CASE("quantization map towers") {
    SUBCASE("vanishing differential gives the classical map") {
        AlgebraSpec spec = builtin_instance("frobenius-k0");
        CohomologyData coh = CohomologyData::compute(spec);
        TransferData td = build_quantization_map(spec, coh, 6);
        CHECK(td.exact);
        for (int l = 1; l <= td.levels; ++l) {
            CHECK(td.f[static_cast<size_t>(l)].zero());
            CHECK(td.kappa[static_cast<size_t>(l)].zero());
        }
    }
    SUBCASE("order-four chart model terminates at level two") {
        AlgebraSpec spec = builtin_instance("dgbv-lg");
        CohomologyData coh = CohomologyData::compute(spec);
        TransferData td = build_quantization_map(spec, coh, 6);
        CHECK(td.exact);
        bool has_l1 = false, has_l2 = false;
        for (int h = 0; h < coh.H.dim(); ++h) {
            if (!td.apply_f_level(1, CVec::unit(h)).zero()) has_l1 = true;
            if (!td.apply_f_level(2, CVec::unit(h)).zero()) has_l2 = true;
        }
        CHECK(has_l1);
        CHECK(has_l2);
        CHECK(check_anomaly_free(td).anomaly_free);
    }
    SUBCASE("anomalous model reports its invisibles") {
        AlgebraSpec spec = builtin_instance("anomalous-demo");
        CohomologyData coh = CohomologyData::compute(spec);
        TransferData td = build_quantization_map(spec, coh, 4);
        AnomalyReport rep = check_anomaly_free(td);
        CHECK_FALSE(rep.anomaly_free);
        CHECK(rep.first_level == 1);
        REQUIRE(rep.invisibles.size() == 1);
        int inv = coh.H.at(rep.invisibles[0]);
        CHECK(coh.reps[static_cast<size_t>(inv)] == CVec::unit(spec.basis.at("x*th")));
        CVec kap = td.apply_kappa_level(1, CVec::unit(inv));
        CVec want;
        for (int h = 0; h < coh.H.dim(); ++h)
            if (coh.reps[static_cast<size_t>(h)] == CVec::unit(spec.basis.at("x"))) want.set(h, Rat(-1));
        CHECK(kap == want);
    }
}

TEST_CASE("closed series split and round-trip") {
    for (auto& name : {std::string("dgbv-lg"), std::string("frobenius-k0"), std::string("anomalous-demo")}) {
        AlgebraSpec spec = builtin_instance(name);
        CohomologyData coh = CohomologyData::compute(spec);
        TransferData td = build_quantization_map(spec, coh, 6);
        Rng rng(314);
        const int cap = 6;
        int done = 0;
        for (int trial = 0; trial < 300 && done < 100; ++trial) {
            int ghost = (rng.next() % 2) ? 0 : -1;
            HbarVec x;
            for (int h = 0; h < coh.H.dim(); ++h) {
                if (coh.H.ghost(h) != ghost) continue;
                bool closed = true;
                for (int l = 1; l <= td.levels; ++l)
                    if (!td.apply_kappa_level(l, CVec::unit(h)).zero()) closed = false;
                if (!closed) continue;
                for (int l = 0; l <= 2; ++l)
                    if (rng.next() % 2) x.add(l, Rat(rng.small()) * CVec::unit(h));
            }
            HbarVec lambda = random_series(spec, rng, ghost - 1, 2);
            HbarVec eta = td.apply_f(x);
            eta += apply_K_series(spec, lambda);
            eta = eta.truncated(cap);
            if (eta.zero()) continue;
            ++done;
            CocycleDec dec = decompose_cocycle(spec, td, eta, cap);
            HbarVec back = td.apply_f(dec.x);
            back += apply_K_series(spec, dec.lambda);
            CHECK(back.truncated(cap) == eta);
            if (name != "anomalous-demo") CHECK(dec.x == x.truncated(cap));
        }
        INFO(name);
        CHECK(done >= 50);
    }
}

TEST_CASE("exactness inversion") {
    SUBCASE("anomaly-free: exact series have zero class part") {
        AlgebraSpec spec = builtin_instance("dgbv-lg");
        CohomologyData coh = CohomologyData::compute(spec);
        TransferData td = build_quantization_map(spec, coh, 6);
        Rng rng(55);
        for (int trial = 0; trial < 20; ++trial) {
            HbarVec lambda = random_series(spec, rng, -1, 2);
            HbarVec eta = apply_K_series(spec, lambda).truncated(6);
            if (eta.zero()) continue;
            CocycleDec dec = decompose_cocycle(spec, td, eta, 6);
            CHECK(dec.x.zero());
        }
    }
    SUBCASE("anomalous: class parts generated by the induced differential") {
        AlgebraSpec spec = builtin_instance("anomalous-demo");
        CohomologyData coh = CohomologyData::compute(spec);
        TransferData td = build_quantization_map(spec, coh, 4);
        AnomalyReport rep = check_anomaly_free(td);
        REQUIRE_FALSE(rep.anomaly_free);
        int inv = coh.H.at(rep.invisibles[0]);
        HbarVec y;
        y.add(0, CVec::unit(inv));
        HbarVec x = td.apply_kappa(y);
        REQUIRE_FALSE(x.zero());
        HbarVec lambda = td.apply_f(y);
        ExactnessDec dec = solve_exactness(spec, td, x, lambda, 4);
        CHECK(td.apply_kappa(dec.y).truncated(4) == x.truncated(4));
    }
}

TEST_CASE("expectation values and exact-series pairing") {
    AlgebraSpec spec = builtin_instance("dgbv-lg");
    REQUIRE(spec.cycle.has_value());
    CohomologyData coh = CohomologyData::compute(spec);
    TransferData td = build_quantization_map(spec, coh, 6);
    bool invariant = false;
    auto v = expectation(spec, td, *spec.cycle, CVec::unit(0), &invariant);
    CHECK(invariant);
    REQUIRE(v.count(0));
    CHECK(v[0] == Rat(1));
    // the cycle pairs to zero against any exact series, so representative and
    // cycle perturbations cannot move expectation values
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        HbarVec s = random_series(spec, rng, -1, 2);
        HbarVec ks = apply_K_series(spec, s);
        std::map<int, Rat> total;
        for (auto& [l, vec] : ks.lv)
            for (int c = 0; c <= spec.cycle->top_level(); ++c) {
                Rat r = spec.cycle->pair(c, vec);
                if (r != 0) {
                    total[l + c] += r;
                    if (total[l + c] == 0) total.erase(l + c);
                }
            }
        CHECK(total.empty());
    }
}

TEST_CASE("seeded sections still decompose correctly") {
    AlgebraSpec spec = builtin_instance("dgbv-lg");
    CohomologyData coh = CohomologyData::compute(spec);
    coh.set_section_seed(spec, 91);
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        CVec pre;
        for (int i = 0; i < spec.dim(); ++i)
            if (spec.basis.ghost(i) == -1 && (rng.next() % 2)) pre.add(i, Rat(rng.small()));
        CVec v = spec.apply_K_level(0, pre);
        if (v.zero()) continue;
        auto dec = coh.decompose(spec, v);
        CHECK(coh.apply_reps(dec.cls) + spec.apply_K_level(0, dec.y) == v);
    }
}
