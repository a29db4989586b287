#pragma once

#include "hjbverify/verify.hpp"

#include <iosfwd>
#include <string>

namespace hjbv {

// Deterministic JSON rendering. Non-finite numbers are written as the
// strings "inf", "-inf" and "nan". With include_wall_ms false the output is
// byte-identical across runs with the same inputs and seed.
std::string report_to_json(const VerificationReport& report, bool include_wall_ms = true,
                           int indent = 2);

// CSV rows t, x1..xn, residual for every grid point (residual empty when
// excluded or outside Q).
void write_residuals_csv(std::ostream& os, const VerificationReport& report);

}  // namespace hjbv
