#pragma once

#include "bvqft/observables.hpp"

namespace bvqft {

struct PairingData {
    std::vector<std::vector<Rat>> classical;            // <x,y> on classes
    std::vector<std::vector<HbarScalar>> quantum;       // parameter series per pair
    std::map<std::vector<int>, HbarScalar> triple;      // trilinear pairing
    bool semi_classical_integral = false;
};

// Bilinear and trilinear pairings from an integral, with the Frobenius and
// defect identities verified exhaustively on class tuples.
PairingData pairings(const SolverState& st, const IntegralSpec& integral, Ledger& led);

// Family metric from the solved generating element, with its differential
// identities.
std::vector<std::vector<ScalarSeries>> metric(const SolverState& st, const IntegralSpec& integral, Ledger& led);

struct WdvvResult {
    bool semi_classical = false;      // generating element free of the parameter
    bool metric_flat = false;
    bool metric_invertible = false;
    std::map<std::vector<int>, ScalarSeries> A3;  // lowered tensor
    ScalarSeries Phi;                             // potential (semi-classical case)
    bool phi_built = false;
};

// Semi-classical endgame: flatness, compatibility, the potential, and the
// quartic associativity residual when the metric is invertible.
WdvvResult wdvv(const SolverState& st, const IntegralSpec& integral,
                const std::vector<std::vector<ScalarSeries>>& g, const CorrelatorSet* cs, Ledger& led);

}  // namespace bvqft
