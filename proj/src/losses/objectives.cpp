#include <cmath>
#include <cstdio>

#include "unhaze/losses.hpp"

namespace unhaze::losses {

void LossReport::finalize(const LossWeights& w) {
  enc = encoder_objective(encoder_terms(), w);
  neg = negative_objective(ac(), div(), w);
}

bool LossReport::all_finite() const noexcept {
  for (double v : {ac(), adv(), cycle(), div(), tv, dc, enc, neg, disc}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string csv_header() { return "step,ac,adv,cycle,tv,dc,div,enc,neg,lr"; }

std::string csv_row(const LossReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g", static_cast<long long>(r.step),
                r.ac(), r.adv(), r.cycle(), r.tv, r.dc, r.div(), r.enc, r.neg, r.lr);
  return buf;
}

}  // namespace unhaze::losses
