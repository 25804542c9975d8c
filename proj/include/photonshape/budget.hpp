#pragma once

#include <string>
#include <vector>

namespace photonshape {

struct BudgetStage {
  std::string name;
  double efficiency = 1.0;
  double uncertainty = 0.0;  // absolute, 1σ
};

struct BudgetRow {
  BudgetStage stage;
  double cumulative = 1.0;  // product up to and including this stage
};

struct BudgetResult {
  double total = 1.0;
  double uncertainty = 0.0;  // independent relative errors added in quadrature
  std::vector<BudgetRow> rows;
};

BudgetResult loss_budget(const std::vector<BudgetStage>& chain);

struct BrightnessEstimate {
  double value = 0.0;
  double uncertainty = 0.0;
};

// p1 / (detection·preparation), errors propagated as in loss_budget.
BrightnessEstimate source_brightness(const BudgetStage& p1, const BudgetStage& detection,
                                     const BudgetStage& preparation);

}  // namespace photonshape
