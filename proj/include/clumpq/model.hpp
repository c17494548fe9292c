#pragma once

#include <utility>
#include <vector>

namespace clumpq {

// Arrival probability p, departure probability q = 1-p, block length ell.
// The light alternates ell red slots (arrivals only) with ell green slots
// (departures only). Subcritical regime p < q throughout.
struct ModelParams {
  double p = 0.0;
  double q = 1.0;
  int ell = 1;
};

// Validates and builds params. Requires 0 < p < 0.5 and ell >= 1; throws
// std::invalid_argument otherwise.
ModelParams make_params(double p, int ell);

// Law of the net change over one full cycle of the free (unreflected) walk:
// prob(i) = C(2*ell, ell+i) p^(ell+i) q^(ell-i) for i in [-ell, ell].
struct StepLaw {
  int ell = 1;
  std::vector<double> probs;  // probs[ell + i]

  double at(int i) const { return probs[static_cast<size_t>(ell + i)]; }
  double mean() const;
};

StepLaw step_law(const ModelParams& params);

enum class CycleOrder { RedFirst, GreenFirst };

const char* order_name(CycleOrder order);  // "red-first" / "green-first"

enum class KernelLabel { SingleU, SingleV, RedFirstCycle, GreenFirstCycle };

// Truncated transition matrix of a subwalk on states 0..size-1, row-major.
// Rows hold exact transition probabilities; rows with support past the
// truncation edge (the last ell rows of a cycle kernel) lose that mass, so
// they sum to <= 1 rather than 1.
struct KernelMatrix {
  int size = 0;
  int ell = 1;
  KernelLabel label = KernelLabel::SingleU;
  std::vector<double> entries;

  double at(int i, int j) const {
    return entries[static_cast<size_t>(i) * static_cast<size_t>(size) +
                   static_cast<size_t>(j)];
  }
  double row_sum(int i) const;
};

// Single-slot kernels: U moves up with prob p (red slot), V moves down with
// prob q and reflects at 0 (green slot). Requires m >= 2*ell + 2.
std::pair<KernelMatrix, KernelMatrix> single_step_kernels(
    const ModelParams& params, int m);

// One-cycle kernel: U^ell V^ell (RedFirst, chain sampled at cycle starts) or
// V^ell U^ell (GreenFirst, sampled between the red and green halves).
// Factors are composed at size m+ell and trimmed back to m, so every kept
// entry is exact. Requires m >= 2*ell + 2.
KernelMatrix cycle_kernel(const ModelParams& params, CycleOrder order, int m);

inline constexpr int kDefaultTruncation = 400;

}  // namespace clumpq
