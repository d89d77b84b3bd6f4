#pragma once

#include <cstdint>
#include <string>

namespace hdptm {

// Decaying step size rho_t = s / (tau + t)^kappa with its own integer clock.
// Configurations with rho_0 > 1 are rejected at construction: the count
// updates are convex combinations and a step above 1 would leave the
// feasible region.
class StepSchedule {
 public:
  StepSchedule(double s, double tau, double kappa = 0.9);

  // step size at the current clock; does not advance
  double rho() const;

  void advance() { ++t_; }

  std::uint64_t t() const { return t_; }
  double s() const { return s_; }
  double tau() const { return tau_; }
  double kappa() const { return kappa_; }

 private:
  double s_;
  double tau_;
  double kappa_;
  std::uint64_t t_ = 0;
};

// Schedule parameters as they appear in configs; make() validates.
struct ScheduleConfig {
  double s = 1.0;
  double tau = 10.0;
  double kappa = 0.9;

  StepSchedule make() const { return StepSchedule(s, tau, kappa); }
};

// Psi(x) for x > 0, via upward recurrence Psi(x) = Psi(x+1) - 1/x into the
// asymptotic-series region. Absolute error below 1e-12 for x >= 1e-3.
double digamma(double x);

// shortest decimal form that round-trips to the same double ("0.01", not
// "0.010000000000000000"); used wherever emitted numbers must be stable
std::string format_double(double value);

}  // namespace hdptm
