#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace gridshape {

using Complex = std::complex<double>;

// Real polynomial with coefficients stored in ascending powers of s.
class Polynomial {
 public:
  Polynomial() : coeffs_{0.0} {}
  Polynomial(std::initializer_list<double> ascending) : coeffs_(ascending) { trim(); }
  explicit Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) { trim(); }

  static Polynomial constant(double c) { return Polynomial({c}); }
  static Polynomial s() { return Polynomial({0.0, 1.0}); }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double operator[](int power) const {
    return power < static_cast<int>(coeffs_.size()) ? coeffs_[power] : 0.0;
  }
  double leading() const { return coeffs_.back(); }
  bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }

  double eval(double s) const;
  Complex eval(Complex s) const;
  Polynomial derivative() const;

  // Largest coefficient magnitude; used to scale residual tolerances.
  double scale() const;

  Polynomial operator+(const Polynomial& rhs) const;
  Polynomial operator-(const Polynomial& rhs) const;
  Polynomial operator*(const Polynomial& rhs) const;
  Polynomial operator*(double k) const;

 private:
  void trim();
  std::vector<double> coeffs_;
};

// All complex roots, via eigenvalues of the balanced companion matrix. Exact
// zero roots (vanishing trailing coefficients) are split off first. Output is
// sorted by real part, then imaginary part.
std::vector<Complex> roots(const Polynomial& p);

// Real polynomial with the given roots (complex roots must come in conjugate
// pairs) and the given leading coefficient.
Polynomial from_roots(const std::vector<Complex>& rts, double leading = 1.0);

}  // namespace gridshape
