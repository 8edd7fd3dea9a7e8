#pragma once

#include <string>

#include "claimex/dataset.hpp"

namespace claimex::testing {

// Deterministic stand-in corpus with the published MMCE shape: 732 pairs,
// 618 train / 114 dev, 50 intent-critical, and the documented platform and
// language distributions (X = 360, Facebook = 319, ..., English = 551).
Dataset synthetic_mmce();

std::string synthetic_mmce_jsonl();

}  // namespace claimex::testing
