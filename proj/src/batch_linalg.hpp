#pragma once

#include <cstddef>
#include <vector>

#include "ghostsim/forward.hpp"
#include "ghostsim/speckle.hpp"

namespace ghostsim::detail {

/// For each weight vector w_f (length = set size), returns
///   sum over i in [begin, end) of w_f[i] * pattern_i
/// as a row-major H*W buffer. One matrix product per call.
std::vector<std::vector<double>> weighted_pattern_sums(
    const SpeckleSet& speckles, const std::vector<const BucketSequence*>& weights,
    std::size_t begin, std::size_t end);

/// pattern_i . object for every pattern of the set.
std::vector<double> project_onto_patterns(const SpeckleSet& speckles, const double* object);

}  // namespace ghostsim::detail
