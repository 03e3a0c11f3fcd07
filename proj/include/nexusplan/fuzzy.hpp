#pragma once

// Trapezoidal fuzzy numbers and the possibility / necessity / credibility
// measure family over threshold events {v <= g} and {v >= g}.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nexusplan {

enum class MeasureKind { Possibility, Necessity, Credibility };

/// Direction of the guarded event: {v <= g} or {v >= g}.
enum class ConstraintSense { FuzzyLE, FuzzyGE };

/// Which inverse a fuzzy number is collapsed to when a single nominal value
/// is needed. Optimistic is the largest g with Measure{v >= g} >= alpha,
/// Pessimistic the smallest g with Measure{v <= g} >= alpha.
enum class Defuzzification { Optimistic, Pessimistic };

inline std::string_view to_string(MeasureKind m) {
  switch (m) {
    case MeasureKind::Possibility: return "possibility";
    case MeasureKind::Necessity: return "necessity";
    case MeasureKind::Credibility: return "credibility";
  }
  return "credibility";
}

inline MeasureKind parse_measure(std::string_view s) {
  if (s == "possibility") return MeasureKind::Possibility;
  if (s == "necessity") return MeasureKind::Necessity;
  if (s == "credibility") return MeasureKind::Credibility;
  throw std::invalid_argument("unknown measure '" + std::string(s) + "'");
}

/// Confidence level alpha in [0,1].
class ConfidenceLevel {
 public:
  constexpr ConfidenceLevel() = default;
  explicit ConfidenceLevel(double alpha) : alpha_(alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
      throw std::invalid_argument("confidence level must lie in [0,1], got " +
                                  std::to_string(alpha));
  }
  constexpr double value() const { return alpha_; }

 private:
  double alpha_ = 0.0;
};

/// Fuzzy quantity with membership ramping 0->1 over [nu1,nu2], plateau on
/// [nu2,nu3] and ramping 1->0 over [nu3,nu4]. Equal neighbouring points are
/// allowed, so triangular and crisp numbers are representable.
class TrapezoidalFuzzyNumber {
 public:
  TrapezoidalFuzzyNumber(double nu1, double nu2, double nu3, double nu4)
      : nu1_(nu1), nu2_(nu2), nu3_(nu3), nu4_(nu4) {
    if (!std::isfinite(nu1) || !std::isfinite(nu2) || !std::isfinite(nu3) ||
        !std::isfinite(nu4))
      throw std::invalid_argument("trapezoid points must be finite");
    if (!(nu1 <= nu2 && nu2 <= nu3 && nu3 <= nu4))
      throw std::invalid_argument("trapezoid points must satisfy nu1<=nu2<=nu3<=nu4");
  }

  static TrapezoidalFuzzyNumber crisp(double v) { return {v, v, v, v}; }

  double nu1() const { return nu1_; }
  double nu2() const { return nu2_; }
  double nu3() const { return nu3_; }
  double nu4() const { return nu4_; }

  bool is_crisp() const { return nu1_ == nu4_; }

  /// Midpoint of the plateau [nu2, nu3].
  double core_midpoint() const { return 0.5 * (nu2_ + nu3_); }

  double membership(double x) const {
    if (x < nu1_ || x > nu4_) return 0.0;
    if (x < nu2_) return (x - nu1_) / (nu2_ - nu1_);
    if (x <= nu3_) return 1.0;
    return (nu4_ - x) / (nu4_ - nu3_);
  }

  friend bool operator==(const TrapezoidalFuzzyNumber&,
                         const TrapezoidalFuzzyNumber&) = default;

 private:
  double nu1_, nu2_, nu3_, nu4_;
};

// Zero-width ramps are resolved as steps: credibility_le is right-continuous
// and credibility_ge left-continuous, matching the sup-based possibility.

inline double credibility_le(const TrapezoidalFuzzyNumber& nu, double gamma) {
  if (gamma >= nu.nu4()) return 1.0;
  if (gamma >= nu.nu3())
    return (gamma - 2.0 * nu.nu3() + nu.nu4()) / (2.0 * (nu.nu4() - nu.nu3()));
  if (gamma >= nu.nu2()) return 0.5;
  if (gamma > nu.nu1()) return (gamma - nu.nu1()) / (2.0 * (nu.nu2() - nu.nu1()));
  return 0.0;
}

inline double credibility_ge(const TrapezoidalFuzzyNumber& nu, double gamma) {
  if (gamma <= nu.nu1()) return 1.0;
  if (gamma <= nu.nu2())
    return (2.0 * nu.nu2() - nu.nu1() - gamma) / (2.0 * (nu.nu2() - nu.nu1()));
  if (gamma <= nu.nu3()) return 0.5;
  if (gamma < nu.nu4()) return (nu.nu4() - gamma) / (2.0 * (nu.nu4() - nu.nu3()));
  return 0.0;
}

/// Sup of the membership function over the event.
inline double possibility(const TrapezoidalFuzzyNumber& nu, double gamma,
                          ConstraintSense sense) {
  if (sense == ConstraintSense::FuzzyLE) {
    if (gamma >= nu.nu2()) return 1.0;
    if (gamma > nu.nu1()) return (gamma - nu.nu1()) / (nu.nu2() - nu.nu1());
    return 0.0;
  }
  if (gamma <= nu.nu3()) return 1.0;
  if (gamma < nu.nu4()) return (nu.nu4() - gamma) / (nu.nu4() - nu.nu3());
  return 0.0;
}

/// One minus the possibility of the complementary (strict) event.
inline double necessity(const TrapezoidalFuzzyNumber& nu, double gamma,
                        ConstraintSense sense) {
  if (sense == ConstraintSense::FuzzyLE) {
    if (gamma >= nu.nu4()) return 1.0;
    if (gamma >= nu.nu3()) return (gamma - nu.nu3()) / (nu.nu4() - nu.nu3());
    return 0.0;
  }
  if (gamma <= nu.nu1()) return 1.0;
  if (gamma <= nu.nu2()) return (nu.nu2() - gamma) / (nu.nu2() - nu.nu1());
  return 0.0;
}

inline double credibility(const TrapezoidalFuzzyNumber& nu, double gamma,
                          ConstraintSense sense) {
  return sense == ConstraintSense::FuzzyLE ? credibility_le(nu, gamma)
                                           : credibility_ge(nu, gamma);
}

inline double measure(const TrapezoidalFuzzyNumber& nu, double gamma,
                      ConstraintSense sense, MeasureKind kind) {
  switch (kind) {
    case MeasureKind::Possibility: return possibility(nu, gamma, sense);
    case MeasureKind::Necessity: return necessity(nu, gamma, sense);
    case MeasureKind::Credibility: return credibility(nu, gamma, sense);
  }
  return credibility(nu, gamma, sense);
}

/// Crisp threshold equivalent of the credibility chance constraint
/// Cr{v <= g} >= alpha  <=>  g >= bound   (FuzzyLE)
/// Cr{v >= g} >= alpha  <=>  g <= bound   (FuzzyGE)
/// alpha == 0.5 takes the lower branch. At alpha == 0 the formulas are
/// applied as written, giving nu1 (LE) and nu4 (GE).
inline double crisp_bound(const TrapezoidalFuzzyNumber& nu, ConfidenceLevel level,
                          ConstraintSense sense) {
  const double a = level.value();
  if (sense == ConstraintSense::FuzzyLE) {
    if (a > 0.5) return (2.0 - 2.0 * a) * nu.nu3() + (2.0 * a - 1.0) * nu.nu4();
    return (1.0 - 2.0 * a) * nu.nu1() + 2.0 * a * nu.nu2();
  }
  if (a > 0.5) return (2.0 * a - 1.0) * nu.nu1() + (2.0 - 2.0 * a) * nu.nu2();
  return 2.0 * a * nu.nu3() + (1.0 - 2.0 * a) * nu.nu4();
}

/// Generalisation of crisp_bound to all three measures: the tight threshold
/// g with Measure{event(g)} >= alpha. Possibility and necessity inverses are
/// continuous in alpha; at alpha == 0 they take their alpha -> 0+ limit.
inline double measure_bound(const TrapezoidalFuzzyNumber& nu, ConfidenceLevel level,
                            ConstraintSense sense, MeasureKind kind) {
  const double a = level.value();
  switch (kind) {
    case MeasureKind::Credibility:
      return crisp_bound(nu, level, sense);
    case MeasureKind::Possibility:
      return sense == ConstraintSense::FuzzyLE ? nu.nu1() + a * (nu.nu2() - nu.nu1())
                                               : nu.nu4() - a * (nu.nu4() - nu.nu3());
    case MeasureKind::Necessity:
      return sense == ConstraintSense::FuzzyLE ? nu.nu3() + a * (nu.nu4() - nu.nu3())
                                               : nu.nu2() - a * (nu.nu2() - nu.nu1());
  }
  return crisp_bound(nu, level, sense);
}

/// Nominal value of a fuzzy quantity at confidence alpha. The optimistic rule
/// returns the largest g with Measure{v >= g} >= alpha; for credibility this is
/// the FuzzyGE crisp bound.
inline double defuzzify(const TrapezoidalFuzzyNumber& nu, ConfidenceLevel level,
                        MeasureKind kind,
                        Defuzzification rule = Defuzzification::Optimistic) {
  if (nu.is_crisp()) return nu.nu1();
  const auto sense = rule == Defuzzification::Optimistic ? ConstraintSense::FuzzyGE
                                                         : ConstraintSense::FuzzyLE;
  return std::clamp(measure_bound(nu, level, sense, kind), nu.nu1(), nu.nu4());
}

}  // namespace nexusplan
