#pragma once

#include <cstddef>
#include <vector>

namespace ape {

/// Adaptive moment estimation with the usual defaults.
class Adam {
 public:
  explicit Adam(std::size_t size, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);
  void descend(std::vector<double>& params, const std::vector<double>& grad);
  void ascend(std::vector<double>& params, const std::vector<double>& grad);

 private:
  void apply(std::vector<double>& params, const std::vector<double>& grad, double sign);

  double lr_, beta1_, beta2_, epsilon_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace ape
