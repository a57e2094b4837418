#pragma once

#include <functional>
#include <string>

namespace cdi {

/// Parses a small arithmetic expression over the variable x into an evaluable
/// function. Grammar: numbers, x, + - * /, unary minus, parentheses, and the
/// functions pow(a,b), exp(a), log(a). Throws DomainError on parse failure.
std::function<double(double)> parse_density_expr(const std::string& text);

}  // namespace cdi
