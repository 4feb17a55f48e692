#pragma once

#include "autonorm/expr.hpp"
#include "autonorm/factorization.hpp"
#include "autonorm/parallel.hpp"
#include "autonorm/types.hpp"

#include <cmath>
#include <vector>

namespace autonorm {

/// Composite midpoint rule over `box` with cells no wider than `spacing` per
/// axis. Rows along the first axis are summed independently and then added
/// in order, so the result does not depend on the thread count.
template <typename Integrand>
double midpoint_integral(const Box& box, double spacing, const Integrand& f) {
  if (box.isEmpty()) return 0.0;
  if (!(spacing > 0.0)) throw std::invalid_argument("midpoint_integral: spacing must be positive");
  const auto dim = static_cast<int>(box.dim());
  std::vector<long long> cells(dim);
  std::vector<double> width(dim);
  double volume = 1.0;
  for (int k = 0; k < dim; ++k) {
    const double extent = box.max()[k] - box.min()[k];
    cells[k] = std::max<long long>(1, static_cast<long long>(std::ceil(extent / spacing - 1e-12)));
    width[k] = extent / static_cast<double>(cells[k]);
    volume *= width[k];
  }
  long long inner = 1;
  for (int k = 1; k < dim; ++k) inner *= cells[k];
  std::vector<double> rows(static_cast<std::size_t>(cells[0]), 0.0);
  parallel_for(rows.size(), [&](std::size_t i0) {
    PhasePoint z(dim);
    z[0] = box.min()[0] + (static_cast<double>(i0) + 0.5) * width[0];
    double sum = 0.0;
    for (long long flat = 0; flat < inner; ++flat) {
      long long rest = flat;
      for (int k = dim - 1; k >= 1; --k) {
        const long long idx = rest % cells[k];
        rest /= cells[k];
        z[k] = box.min()[k] + (static_cast<double>(idx) + 0.5) * width[k];
      }
      sum += f(static_cast<const PhasePoint&>(z));
    }
    rows[i0] = sum;
  });
  double total = 0.0;
  for (double r : rows) total += r;
  return total * volume;
}

/// Plain volume integral of a compactly supported Hamiltonian, with a
/// refinement estimate from the same rule at half the spacing.
struct CalabiValue {
  double value = 0.0;
  double spacing = 0.0;
  double refined_value = 0.0;
  double refinement_delta = 0.0;  ///< |value - refined_value|
};

CalabiValue calabi(const Expr& F, int n, double spacing);

struct CalabiOptions {
  double spacing = 0.0;         ///< 0 selects (r + 1) / 256
  double coarse_spacing = 0.0;  ///< change-of-variables grid; 0 selects (r + 1) / 8
  double translation_tolerance = 1e-6;
  double change_of_variables_tolerance = 1e-3;
  double kernel_tolerance = 1e-8;
};

struct CalabiPlanReport {
  double spacing = 0.0;
  std::vector<CalabiValue> inputs;
  double inputs_sum = 0.0;
  CalabiValue glued;
  CalabiValue displacing;
  double translation_error = 0.0;  ///< |Cal(G) - sum Cal(F_i)|
  bool translation_pass = false;
  double coarse_spacing = 0.0;
  double a1_measured = 0.0;        ///< Cal(H o g^-1) = integral of H det Dg, coarse grid
  double change_of_variables_error = 0.0;
  bool change_of_variables_pass = false;
  double factor[3] = {0.0, 0.0, 0.0};  ///< Cal(A1) measured, Cal(A2) = -Cal(H), Cal(A3) = Cal(G)
  double a1_plus_a2 = 0.0;
  bool pass = false;
};

double default_calabi_spacing(const FactorizationPlan& plan);

CalabiPlanReport calabi_of_plan(const FactorizationPlan& plan, const CalabiOptions& options,
                                const IntegratorConfig& cfg);

/// Compensating bump used by balance_calabi: a unit bump centred at
/// y_1 = r + eps + 2, away from the tube and every input support.
Expr calabi_compensator(const DisplacementSpec& spec);

/// Replace H by H - kappa * beta with kappa = Cal(H) / Cal(beta). Refuses
/// (ConstructionError) unless sum Cal(F_i) vanishes within tolerance.
FactorizationPlan balance_calabi(const FactorizationPlan& plan, const CalabiOptions& options);

}  // namespace autonorm
