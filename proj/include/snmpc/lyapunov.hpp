#pragma once

#include "snmpc/model.hpp"

namespace snmpc::lyap {

using model::Matrix;
using model::Vector;

/// Quadratic stochastic control Lyapunov function V(x) = (x - c)' P (x - c)
/// with decay rate gamma. Construction enforces P = P', P > 0, gamma > 0.
class LyapunovCertificate {
 public:
  LyapunovCertificate(Matrix P, double gamma, Vector center);

  const Matrix& P() const { return P_; }
  double gamma() const { return gamma_; }
  const Vector& center() const { return center_; }

 private:
  Matrix P_;
  double gamma_;
  Vector center_;
};

double lyapunov_value(const LyapunovCertificate& cert, const Vector& x);

/// Ito term 1/2 Tr(h' (d2V/dx2) h) = Tr(h(x)' P h(x)). Independent of u.
double diffusion_term(const LyapunovCertificate& cert, const model::ControlAffineSde& sys,
                      const Vector& x);

/// L_f V + L_g V u + 1/2 Tr(h' (d2V/dx2) h) with grad V = 2 P (x - c) and
/// d2V/dx2 = 2 P.
double generator(const LyapunovCertificate& cert, const model::ControlAffineSde& sys,
                 const Vector& x, const Vector& u);

/// generator + gamma V; the decay condition holds at (x, u) iff <= 0.
double stability_residual(const LyapunovCertificate& cert, const model::ControlAffineSde& sys,
                          const Vector& x, const Vector& u);

/// Unique symmetric P with A' P + P A = -Q. Throws CertificateError if A is
/// not Hurwitz or Q is not symmetric positive definite.
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

}  // namespace snmpc::lyap
