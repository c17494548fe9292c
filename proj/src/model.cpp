#include "clumpq/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace clumpq {

ModelParams make_params(double p, int ell) {
  if (!(p > 0.0)) {
    throw std::invalid_argument("p must be positive, got " + std::to_string(p));
  }
  if (!(p < 0.5)) {
    throw std::invalid_argument("requires p < q, got p = " + std::to_string(p));
  }
  if (ell < 1) {
    throw std::invalid_argument("ell must be >= 1, got " + std::to_string(ell));
  }
  return ModelParams{p, 1.0 - p, ell};
}

const char* order_name(CycleOrder order) {
  return order == CycleOrder::RedFirst ? "red-first" : "green-first";
}

double StepLaw::mean() const {
  double m = 0.0;
  for (int i = -ell; i <= ell; ++i) m += i * at(i);
  return m;
}

StepLaw step_law(const ModelParams& params) {
  const int ell = params.ell;
  StepLaw law;
  law.ell = ell;
  law.probs.assign(static_cast<size_t>(2 * ell + 1), 0.0);
  // binomial coefficients C(2*ell, k) built incrementally in long double
  long double binom = 1.0L;
  for (int k = 0; k <= 2 * ell; ++k) {
    const int i = k - ell;
    law.probs[static_cast<size_t>(k)] = static_cast<double>(
        binom * powl(params.p, ell + i) * powl(params.q, ell - i));
    binom = binom * (2 * ell - k) / (k + 1);
  }
  return law;
}

double KernelMatrix::row_sum(int i) const {
  double s = 0.0;
  for (int j = 0; j < size; ++j) s += at(i, j);
  return s;
}

namespace {

void require_truncation(const ModelParams& params, int m) {
  if (m < 2 * params.ell + 2) {
    throw std::invalid_argument("truncation too small: need m >= 2*ell + 2");
  }
}

// In-place row updates for right-multiplication by one slot kernel.
// row * U: mass moves one state up with prob p.
void apply_up(std::vector<double>& row, double p, double q) {
  for (size_t j = row.size(); j-- > 1;) row[j] = q * row[j] + p * row[j - 1];
  row[0] *= q;
}

// row * V: mass moves one state down with prob q, state 0 holds still.
void apply_down(std::vector<double>& row, double p, double q) {
  const size_t n = row.size();
  row[0] += q * row[1];
  for (size_t j = 1; j + 1 < n; ++j) row[j] = p * row[j] + q * row[j + 1];
  row[n - 1] *= p;
}

}  // namespace

std::pair<KernelMatrix, KernelMatrix> single_step_kernels(
    const ModelParams& params, int m) {
  require_truncation(params, m);
  KernelMatrix u, v;
  u.size = v.size = m;
  u.ell = v.ell = params.ell;
  u.label = KernelLabel::SingleU;
  v.label = KernelLabel::SingleV;
  u.entries.assign(static_cast<size_t>(m) * m, 0.0);
  v.entries.assign(static_cast<size_t>(m) * m, 0.0);
  for (int j = 0; j < m; ++j) {
    u.entries[static_cast<size_t>(j) * m + j] = params.q;
    if (j + 1 < m) u.entries[static_cast<size_t>(j) * m + j + 1] = params.p;
  }
  v.entries[0] = 1.0;
  for (int j = 1; j < m; ++j) {
    v.entries[static_cast<size_t>(j) * m + j] = params.p;
    v.entries[static_cast<size_t>(j) * m + j - 1] = params.q;
  }
  return {std::move(u), std::move(v)};
}

KernelMatrix cycle_kernel(const ModelParams& params, CycleOrder order, int m) {
  require_truncation(params, m);
  const int ell = params.ell;
  const int wide = m + ell;  // workspace wide enough that kept rows are exact
  KernelMatrix k;
  k.size = m;
  k.ell = ell;
  k.label = order == CycleOrder::RedFirst ? KernelLabel::RedFirstCycle
                                          : KernelLabel::GreenFirstCycle;
  k.entries.assign(static_cast<size_t>(m) * m, 0.0);
  std::vector<double> row(static_cast<size_t>(wide));
  for (int i = 0; i < m; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    row[static_cast<size_t>(i)] = 1.0;
    if (order == CycleOrder::RedFirst) {
      for (int s = 0; s < ell; ++s) apply_up(row, params.p, params.q);
      for (int s = 0; s < ell; ++s) apply_down(row, params.p, params.q);
    } else {
      for (int s = 0; s < ell; ++s) apply_down(row, params.p, params.q);
      for (int s = 0; s < ell; ++s) apply_up(row, params.p, params.q);
    }
    for (int j = 0; j < m; ++j) {
      k.entries[static_cast<size_t>(i) * m + j] = row[static_cast<size_t>(j)];
    }
  }
  return k;
}

}  // namespace clumpq
