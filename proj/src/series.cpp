#include "bvqft/series.hpp"

namespace bvqft {

ScalarSeries mul(const ScalarSeries& a, const ScalarSeries& b, const std::vector<int>& hghosts) {
    ScalarSeries r = series_zero<Rat>(a.ghost + b.ghost, std::min(a.tmax, b.tmax), std::min(a.hmax, b.hmax));
    for (auto& [ka, va] : a.terms) {
        for (auto& [kb, vb] : b.terms) {
            if (static_cast<int>(ka.w.len() + kb.w.len()) > r.tmax) continue;
            if (r.hmax != kNoCap && ka.h + kb.h > r.hmax) continue;
            NormWord m = merge_words(ka.w, kb.w, hghosts);
            if (m.zero) continue;
            r.add_term({m.w, ka.h + kb.h}, Rat(m.sign) * va * vb);
        }
    }
    return r;
}

}  // namespace bvqft
