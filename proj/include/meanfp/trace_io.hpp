#pragma once

#include <string>

#include "meanfp/scheme.hpp"

namespace meanfp {

/// Fixed CSV layout, one row per outer step:
///   n, epsilon, inner_iters, inner_residual,
///   z0..z{d-1}, res0..res{k-1}, mean_residual,
///   vi_value, bound6_slack, gbh_slack
/// 8 + d + k columns, '.' decimal, LF newlines, doubles printed with 17
/// significant digits (round-trip exact).
void write_trace_csv(const std::string& path, const Trace& trace, int d,
                     int k);

/// Inverse of write_trace_csv.  Validates the column count and that every
/// numeric field is finite.  Throws ConfigError on malformed input.
Trace read_trace_csv(const std::string& path, int d, int k);

std::string trace_header(int d, int k);

}  // namespace meanfp
