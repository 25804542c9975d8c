#include "photonshape/budget.hpp"

#include <cmath>

#include "photonshape/error.hpp"

namespace photonshape {
namespace {

void check_stage(const BudgetStage& s) {
  require(std::isfinite(s.efficiency) && s.efficiency >= 0.0 && s.efficiency <= 1.0,
          ErrorCode::InvalidArgument, "stage '" + s.name + "' efficiency must lie in [0, 1]");
  require(std::isfinite(s.uncertainty) && s.uncertainty >= 0.0, ErrorCode::InvalidArgument,
          "stage '" + s.name + "' uncertainty must be non-negative");
}

double relative_sq(const BudgetStage& s) {
  if (s.uncertainty == 0.0) return 0.0;
  require(s.efficiency > 0.0, ErrorCode::InvalidArgument,
          "stage '" + s.name + "' has an uncertainty but zero efficiency");
  const double r = s.uncertainty / s.efficiency;
  return r * r;
}

}  // namespace

BudgetResult loss_budget(const std::vector<BudgetStage>& chain) {
  BudgetResult r;
  double rel2 = 0.0;
  for (const auto& s : chain) {
    check_stage(s);
    r.total *= s.efficiency;
    rel2 += relative_sq(s);
    r.rows.push_back({s, r.total});
  }
  r.uncertainty = r.total * std::sqrt(rel2);
  return r;
}

BrightnessEstimate source_brightness(const BudgetStage& p1, const BudgetStage& detection,
                                     const BudgetStage& preparation) {
  for (const auto* s : {&p1, &detection, &preparation}) check_stage(*s);
  require(detection.efficiency > 0.0 && preparation.efficiency > 0.0, ErrorCode::InvalidArgument,
          "detection and preparation efficiencies must be positive");
  BrightnessEstimate b;
  b.value = p1.efficiency / (detection.efficiency * preparation.efficiency);
  b.uncertainty = b.value * std::sqrt(relative_sq(p1) + relative_sq(detection) + relative_sq(preparation));
  return b;
}

}  // namespace photonshape
