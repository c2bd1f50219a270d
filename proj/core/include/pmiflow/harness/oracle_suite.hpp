#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pmiflow::harness {

struct OracleCheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// prox_closed_form, local_error_order, then one solver_order_<kind> per solver.
const std::vector<std::string>& oracle_check_names();

/// Throws InvalidArgument for an unknown name.
OracleCheckResult run_oracle_check(const std::string& name, std::uint64_t seed);

std::vector<OracleCheckResult> run_oracle_suite(std::uint64_t seed);

}  // namespace pmiflow::harness
