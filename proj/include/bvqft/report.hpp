#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bvqft {

// Ordered pass/fail ledger; every verified identity lands here exactly once
// per command, with a witness locating the first failure.
struct Check {
    std::string id;
    bool pass = true;
    std::string witness;
};

struct Ledger {
    std::vector<Check> checks;

    void add(const std::string& id, bool pass, const std::string& witness = "") {
        checks.push_back({id, pass, pass ? "" : witness});
    }
    bool all_pass() const {
        for (auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    const Check* first_failure() const {
        for (auto& c : checks)
            if (!c.pass) return &c;
        return nullptr;
    }
    void merge(const Ledger& o) { checks.insert(checks.end(), o.checks.begin(), o.checks.end()); }
};

// Raised when a solve step breaks one of its own invariants; carries the
// ledger id of the failed identity.
struct IdentityError : std::runtime_error {
    std::string id;
    IdentityError(const std::string& check_id, const std::string& what)
        : std::runtime_error(check_id + ": " + what), id(check_id) {}
};

}  // namespace bvqft
