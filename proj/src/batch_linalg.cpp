#include "batch_linalg.hpp"

#include <Eigen/Dense>

namespace ghostsim::detail {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstPatterns = Eigen::Map<const RowMatrix>;

ConstPatterns pattern_block(const SpeckleSet& speckles, std::size_t begin, std::size_t end) {
  return ConstPatterns(speckles.pattern_pixels(begin).data(), Eigen::Index(end - begin),
                       Eigen::Index(speckles.pixels_per_pattern()));
}

}  // namespace

std::vector<std::vector<double>> weighted_pattern_sums(
    const SpeckleSet& speckles, const std::vector<const BucketSequence*>& weights,
    std::size_t begin, std::size_t end) {
  const auto rows = Eigen::Index(weights.size());
  const auto count = Eigen::Index(end - begin);
  const auto n = Eigen::Index(speckles.pixels_per_pattern());
  if (count == 0) return std::vector<std::vector<double>>(weights.size(), std::vector<double>(std::size_t(n), 0.0));
  RowMatrix w(rows, count);
  for (Eigen::Index f = 0; f < rows; ++f) {
    for (Eigen::Index i = 0; i < count; ++i) w(f, i) = (*weights[std::size_t(f)])[begin + std::size_t(i)];
  }
  const RowMatrix sums = w * pattern_block(speckles, begin, end);
  std::vector<std::vector<double>> out(weights.size());
  for (Eigen::Index f = 0; f < rows; ++f) {
    out[std::size_t(f)].assign(sums.row(f).data(), sums.row(f).data() + n);
  }
  return out;
}

std::vector<double> project_onto_patterns(const SpeckleSet& speckles, const double* object) {
  const auto n = Eigen::Index(speckles.pixels_per_pattern());
  const Eigen::Map<const Eigen::VectorXd> obj(object, n);
  const Eigen::VectorXd proj = pattern_block(speckles, 0, speckles.size()) * obj;
  return std::vector<double>(proj.data(), proj.data() + proj.size());
}

}  // namespace ghostsim::detail
