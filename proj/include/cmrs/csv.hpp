#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cmrs/allocation.hpp"

namespace cmrs {

/// Header: s,f_S,xi_1..xi_n,h_1..h_n,pi_1..pi_n,sum_h,balance_residual,status.
[[nodiscard]] std::vector<std::string> csv_header(std::size_t n);

/// %.<precision>g, with "nan", "inf" and "-inf" for non-finite values.
[[nodiscard]] std::string format_number(double x, int precision);

/// Quotes a field when it contains a comma, quote or newline.
[[nodiscard]] std::string csv_escape(const std::string& field);

/// Atom rows first (sorted by location, status=atom, mass in the f_S column,
/// nu_i in the xi columns), then one row per grid point.
void write_allocation_csv(std::ostream& out, const AllocationResult& result, int precision = 12);

}  // namespace cmrs
