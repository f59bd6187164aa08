#pragma once

#include "bvqft/solver.hpp"

namespace bvqft {

// Scalar series in the deformation parameter only.
using HbarScalar = std::map<int, Rat>;

// Connection-tensor towers: arity-k tensors built recursively from the
// solved connection, polynomial in the parameter of degree at most k-2.
// Keys are (alpha_1 .. alpha_k, gamma).
struct PTensors {
    int max_arity = 0;
    std::map<std::vector<int>, ScalarSeries> P;  // word series
    std::map<std::vector<int>, HbarScalar> p;    // values at the origin
};
PTensors p_tensors(const SolverState& st, Ledger& led);

struct QuantumCoordinates {
    std::vector<ScalarSeries> T;                 // one per class
    std::vector<std::vector<ScalarSeries>> G;    // G[beta][gamma] = d_beta T^gamma
    std::vector<std::vector<ScalarSeries>> Ginv;
};
QuantumCoordinates quantum_coordinates(const SolverState& st, const PTensors& pt, Ledger& led);

struct CorrelatorSet {
    int max_arity = 0;
    std::map<std::vector<int>, Element> Pi;      // family correlators (prefactor form)
    std::map<std::vector<int>, HbarVec> pi;      // values at the origin
    Element exp_gen;                             // exp(-theta/hbar)
};
CorrelatorSet correlators(const SolverState& st, const PTensors& pt, int max_arity, Ledger& led);

// Generating function of the family against a cycle, verified two ways.
ScalarSeries generating_function(const SolverState& st, const PTensors& pt, const QuantumCoordinates& qc,
                                 const CorrelatorSet& cs, const CycleSpec& cycle, Ledger& led);

struct FreeEnergy {
    ScalarSeries F;
    std::map<std::vector<int>, HbarScalar> phi;  // derivative coefficients at the origin, arity 1..3
};
FreeEnergy free_energy(const SolverState& st, const QuantumCoordinates& qc, const CycleSpec& cycle, Ledger& led);

// expectation of a class basis vector against a cycle, as a parameter series
HbarScalar one_point(const SolverState& st, const CycleSpec& cycle, int alpha);

}  // namespace bvqft
