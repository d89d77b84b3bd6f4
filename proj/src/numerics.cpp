#include "hdptm/numerics.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hdptm {

StepSchedule::StepSchedule(double s, double tau, double kappa)
    : s_(s), tau_(tau), kappa_(kappa) {
  if (!(s > 0.0)) {
    throw std::invalid_argument("step schedule: s must be positive");
  }
  if (!(tau >= 0.0)) {
    throw std::invalid_argument("step schedule: tau must be non-negative");
  }
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("step schedule: kappa must be positive");
  }
  const double rho0 = rho();
  if (!(rho0 <= 1.0)) {
    throw std::invalid_argument("step schedule: rho_0 = " + std::to_string(rho0) +
                                " exceeds 1 (require s <= tau^kappa)");
  }
}

double StepSchedule::rho() const {
  return s_ / std::pow(tau_ + static_cast<double>(t_), kappa_);
}

double digamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("digamma: argument must be positive");
  }
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // Psi(x) ~ ln x - 1/(2x) - sum B_2n / (2n x^2n), truncated after x^-12;
  // below 1e-15 absolute for x >= 10
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      std::log(x) - 0.5 * inv -
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0))))));
  return acc + series;
}

std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

}  // namespace hdptm
