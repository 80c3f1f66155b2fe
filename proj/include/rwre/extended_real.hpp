#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "rwre/error.hpp"

namespace rwre {

// A real number or one of the two infinities, tagged explicitly.
class ExtendedReal {
 public:
  enum class Kind { kFinite, kPosInf, kNegInf };

  constexpr ExtendedReal() = default;
  constexpr explicit ExtendedReal(double v) : kind_(Kind::kFinite), value_(v) {}

  static constexpr ExtendedReal pos_inf() { return ExtendedReal(Kind::kPosInf); }
  static constexpr ExtendedReal neg_inf() { return ExtendedReal(Kind::kNegInf); }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_finite() const { return kind_ == Kind::kFinite; }
  constexpr bool is_pos_inf() const { return kind_ == Kind::kPosInf; }
  constexpr bool is_neg_inf() const { return kind_ == Kind::kNegInf; }

  // Throws when the value is infinite.
  double value() const {
    if (!is_finite()) throw Error("ExtendedReal::value() on an infinite value");
    return value_;
  }

  // IEEE view, for arithmetic where infinities are harmless.
  double to_double() const {
    switch (kind_) {
      case Kind::kPosInf: return std::numeric_limits<double>::infinity();
      case Kind::kNegInf: return -std::numeric_limits<double>::infinity();
      default: return value_;
    }
  }

  constexpr ExtendedReal operator-() const {
    switch (kind_) {
      case Kind::kPosInf: return neg_inf();
      case Kind::kNegInf: return pos_inf();
      default: return ExtendedReal(-value_);
    }
  }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.kind_ != b.kind_) return false;
    return !a.is_finite() || a.value_ == b.value_;
  }

  friend bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
    return a.to_double() < b.to_double();
  }

  // "inf", "-inf" or the number with 17 significant digits.
  std::string to_string() const {
    if (is_pos_inf()) return "inf";
    if (is_neg_inf()) return "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value_);
    return buf;
  }

  static ExtendedReal parse(const std::string& s) {
    if (s == "inf" || s == "+inf") return pos_inf();
    if (s == "-inf") return neg_inf();
    return ExtendedReal(std::stod(s));
  }

 private:
  constexpr explicit ExtendedReal(Kind k) : kind_(k) {}

  Kind kind_ = Kind::kFinite;
  double value_ = 0.0;
};

inline std::ostream& operator<<(std::ostream& os, const ExtendedReal& x) {
  return os << x.to_string();
}

}  // namespace rwre
