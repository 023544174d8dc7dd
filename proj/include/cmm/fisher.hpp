#pragma once

#include "cmm/params.hpp"

namespace cmm {

enum class FisherKind { bias_corrected, raw };

enum class FisherSource { single_task, merged };

// Elementwise nonnegative approximation to the diagonal Fisher information,
// shaped like the model's ParamSet. An empty accumulator (all zeros) stands
// for "no curvature information"; merging then degrades to weighted averaging.
struct FisherAccumulator {
    ParamSet values;
    FisherSource source = FisherSource::single_task;
};

} // namespace cmm
