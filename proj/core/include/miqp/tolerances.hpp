#pragma once

#include <string_view>

namespace miqp {

/// Numerical tolerances shared by the solver and the verification suites.
struct Tolerances {
  double factorization = 1e-8;  ///< pivot / reconstruction tolerance
  double psd_slack = 1e-6;      ///< allowed negative eigenvalue, relative to the matrix norm
  double support = 1e-9;        ///< x_i above this is treated as nonzero
  double kkt = 1e-8;            ///< QP stationarity, feasibility and complementarity
  double integrality = 1e-6;    ///< LP values within this of 0/1 count as integral
  double cut_violation = 1e-7;  ///< relative violation needed to add a lazy cut
};

/// Process-wide record. Initialised from defaults, then from the MIQP_OA_TOL
/// environment variable the first time it is read.
const Tolerances& tolerances();

/// Replaces the process-wide record (tests and the CLI use this).
void set_tolerances(const Tolerances& tol);

/// Parses "0.5e-8" (sets factorization) or "factorization=1e-9,kkt=1e-9,...".
/// Throws Error(InvalidArgument) on unknown keys or malformed numbers.
Tolerances parse_tolerances(std::string_view spec, Tolerances base = {});

}  // namespace miqp
