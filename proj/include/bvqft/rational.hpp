#pragma once

#include <gmpxx.h>
#include <stdexcept>
#include <string>

namespace bvqft {

// All arithmetic in the engine is exact rational arithmetic. Floats are
// rejected at the input boundary and never appear internally.
using Rat = mpq_class;

inline Rat rat_of_long(long n) { return Rat(n); }

// Parses "p/q" or "p" with arbitrary precision. Throws on malformed input.
inline Rat parse_rat(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    for (char ch : s) {
        if (!(ch == '-' || ch == '+' || ch == '/' || (ch >= '0' && ch <= '9')))
            throw std::invalid_argument("bad rational literal: " + s);
    }
    Rat q;
    if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational literal: " + s);
    q.canonicalize();
    return q;
}

inline std::string rat_str(const Rat& q) { return q.get_str(); }

}  // namespace bvqft
