#include "ape/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace ape {

Adam::Adam(std::size_t size, double lr, double beta1, double beta2, double epsilon)
    : lr_(lr), beta1_(beta1), beta2_(beta2), epsilon_(epsilon), m_(size, 0.0), v_(size, 0.0) {}

void Adam::descend(std::vector<double>& params, const std::vector<double>& grad) { apply(params, grad, -1.0); }
void Adam::ascend(std::vector<double>& params, const std::vector<double>& grad) { apply(params, grad, 1.0); }

void Adam::apply(std::vector<double>& params, const std::vector<double>& grad, double sign) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw std::invalid_argument("Adam: size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params[i] += sign * lr_ * mhat / (std::sqrt(vhat) + epsilon_);
  }
}

}  // namespace ape
