#pragma once

#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>

namespace harvest {

/// Invalid input: bad parameter ranges, unsupported configurations,
/// malformed config documents.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quadrature or propagation that did not reach its tolerance. Carries
/// the name of the failing quantity and the best estimate obtained.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string what_failed, std::complex<double> best, double achieved)
      : std::runtime_error(format(what_failed, best, achieved)),
        name_(std::move(what_failed)),
        best_(best),
        achieved_(achieved) {}

  NumericalError(std::string what_failed, const std::string& detail)
      : std::runtime_error(what_failed + ": " + detail), name_(std::move(what_failed)) {}

  const std::string& name() const noexcept { return name_; }
  std::complex<double> best_estimate() const noexcept { return best_; }
  double achieved_error() const noexcept { return achieved_; }

 private:
  static std::string format(const std::string& n, std::complex<double> b, double e) {
    std::ostringstream os;
    os.precision(6);
    os << n << ": quadrature did not converge (best estimate " << b.real() << (b.imag() < 0 ? "" : "+")
       << b.imag() << "i, error " << e << ")";
    return os.str();
  }

  std::string name_;
  std::complex<double> best_{};
  double achieved_ = 0.0;
};

}  // namespace harvest
