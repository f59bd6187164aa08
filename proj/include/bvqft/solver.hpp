#pragma once

#include "bvqft/transfer.hpp"

namespace bvqft {

struct AnomalyError : std::runtime_error {
    AnomalyReport report;
    explicit AnomalyError(AnomalyReport r)
        : std::runtime_error("anomalous instance: induced differential is nonzero on cohomology"),
          report(std::move(r)) {}
};

// Result of the order-by-order solve. theta is the generating element, A the
// connection tensor (pure word series, no parameter dependence), Lambda the
// gauge homotopy, and (B, X) the bookkeeping tensors of the gauge condition.
// The ledger records every clause verified along the way.
struct SolverState {
    ElemCtx cx;
    TransferData td;
    int order = 1;  // the inductive package currently holds at this order

    Element theta;
    PairFam<ScalarSeries> A;      // key (alpha, beta, gamma), symmetric pair
    PairFam<Element> Lambda;      // key (alpha, beta), symmetric pair
    PairFam<ScalarSeries> B;      // key (a3, a2, a1, gamma), antisymmetric pair
    PairFam<Element> X;           // key (a3, a2, a1), antisymmetric pair
    Ledger ledger;

    int hdim() const { return td.coh.H.dim(); }
    Element theta_d(int alpha) const { return partial(alpha, theta, cx.hghosts); }
    Element theta_dd(int alpha, int beta) const {
        return partial(alpha, partial(beta, theta, cx.hghosts), cx.hghosts);
    }
    ScalarSeries a_series(int alpha, int beta, int gamma) const { return A.get({alpha, beta, gamma}); }
    // contraction sum_gamma A_{alpha beta}^gamma theta_gamma, truncated
    Element contract_A(int alpha, int beta, int cap_words) const;
};

// Canonical splitting of a classically twisted-closed element into class
// directions and a twisted-exact remainder:
//   M = sum_gamma B^gamma theta_gamma + Q Y + (theta, Y)   through word cap.
// The class coefficients are unique; Y is the canonical section choice.
struct QThetaDec {
    std::map<int, ScalarSeries> B;
    Element Y;
};
QThetaDec decompose_qtheta_closed(const SolverState& st, const Element& M, int cap_words);

// Runs the induction up to the requested order; throws AnomalyError when the
// instance has invisibles and IdentityError when an internal clause fails.
SolverState qme_solve(const AlgebraSpec& spec, const TransferData& td, int t_order, uint64_t seed = 0);

// Theorem-level certification of the solved tensor: symmetry, potentiality,
// associativity, unity, homogeneity, weak potentials, and the multiplication
// tensors extracted at the origin.
Ledger verify_tensor_package(const SolverState& st);

}  // namespace bvqft
