#include <ostream>

#include "glpd/selfcheck.hpp"
#include "glpd_tools/cli.hpp"

namespace glpd::cli {

bool run_selftest(std::ostream& out) {
  auto checks = primitive_gradient_checks(3, 20261016);
  for (auto& c : projection_checks(64)) checks.push_back(std::move(c));
  bool ok = true;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    ok = ok && c.passed;
  }
  out << (ok ? "selftest passed" : "selftest FAILED") << "\n";
  return ok;
}

}  // namespace glpd::cli
