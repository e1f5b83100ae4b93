#pragma once

#include <functional>
#include <span>

namespace gsa {

// Any deterministic map from a point in [0,1]^d to a scalar output.
using Evaluator = std::function<double(std::span<const double>)>;

}  // namespace gsa
