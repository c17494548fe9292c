#pragma once

#include <vector>

namespace clumpq {

// Dense Gaussian elimination with partial pivoting in long double, followed
// by one iterative-refinement pass. a is n*n row-major, b has length n.
// Throws StructuralError when the system is singular or the pivot-ratio
// condition estimate exceeds 1e12.
std::vector<long double> solve_linear(const std::vector<long double>& a,
                                      const std::vector<long double>& b);

// Elimination with full pivoting, carried in quad precision throughout.
// For the small structured systems whose columns span more orders of
// magnitude than partial pivoting in long double can absorb; callers
// assemble a and b on the wide type and round the solution once at the end.
std::vector<__float128> solve_full_pivot(std::vector<__float128> a,
                                         std::vector<__float128> b, int n);

// Stationary distribution of an n-state chain given its dense row-major
// transition matrix, by state-elimination without subtractions. Entries stay
// componentwise accurate even when they span hundreds of orders of
// magnitude, which a conventional solve-with-normalization cannot deliver.
// Rows must sum to 1 up to rounding (patch truncation leaks beforehand).
std::vector<double> gth_stationary(std::vector<double> p, int n);

}  // namespace clumpq
