#pragma once

#include <cstdint>
#include <string>

#include "bvqft/algebra.hpp"

namespace bvqft {

// Exit codes: 0 all identities pass, 1 identity failure, 2 anomalous
// instance, 3 input error.
struct CommandResult {
    int exit_code = 0;
    std::string report_json;
    std::string human;
};

struct CommandOptions {
    int order = 0;      // 0: take the instance truncation
    int hbar_max = 0;   // 0: take the instance truncation
    uint64_t seed = 0;  // section perturbation seed
};

CommandResult cmd_validate(const AlgebraSpec& spec);
CommandResult cmd_solve(const AlgebraSpec& spec, const CommandOptions& opt);
CommandResult cmd_observables(const AlgebraSpec& spec, const CommandOptions& opt);
CommandResult cmd_wdvv(const AlgebraSpec& spec, const CommandOptions& opt);

}  // namespace bvqft
