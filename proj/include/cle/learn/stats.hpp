#pragma once

#include <span>
#include <stdexcept>
#include <string>

namespace cle::learn {

class StatsError : public std::invalid_argument {
 public:
  enum class Kind { LengthMismatch, TooFewPoints, ConstantInput, Domain };
  StatsError(Kind kind, const std::string& message) : std::invalid_argument(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct PearsonResult {
  double r = 0.0;
  double p_value = 1.0;
};

/// Pearson correlation with a two-sided t-test p-value on n-2 degrees of freedom.
/// Needs equal lengths, n >= 3 and two non-constant inputs.
PearsonResult pearson(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta function I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

}  // namespace cle::learn
