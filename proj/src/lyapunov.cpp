#include "snmpc/lyapunov.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>

#include "snmpc/error.hpp"

namespace snmpc::lyap {

namespace {

bool is_symmetric(const Matrix& M) {
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

bool is_positive_definite(const Matrix& M) {
  Eigen::LLT<Matrix> llt(M);
  return llt.info() == Eigen::Success;
}

}  // namespace

LyapunovCertificate::LyapunovCertificate(Matrix P, double gamma, Vector center)
    : P_(std::move(P)), gamma_(gamma), center_(std::move(center)) {
  if (P_.rows() != P_.cols() || P_.rows() != center_.size()) {
    throw CertificateError("certificate: P must be square and match the center dimension");
  }
  if (!P_.allFinite() || !is_symmetric(P_)) throw CertificateError("certificate: P is not symmetric");
  if (!is_positive_definite(P_)) throw CertificateError("certificate: P is not positive definite");
  if (!(gamma_ > 0.0)) throw CertificateError("certificate: gamma must be positive");
}

double lyapunov_value(const LyapunovCertificate& cert, const Vector& x) {
  const Vector e = x - cert.center();
  return e.dot(cert.P() * e);
}

double diffusion_term(const LyapunovCertificate& cert, const model::ControlAffineSde& sys,
                      const Vector& x) {
  const Matrix h = model::eval_diffusion(sys, x);
  return (h.transpose() * cert.P() * h).trace();
}

double generator(const LyapunovCertificate& cert, const model::ControlAffineSde& sys,
                 const Vector& x, const Vector& u) {
  const Vector grad = 2.0 * cert.P() * (x - cert.center());
  return grad.dot(model::eval_drift(sys, x, u)) + diffusion_term(cert, sys, x);
}

double stability_residual(const LyapunovCertificate& cert, const model::ControlAffineSde& sys,
                          const Vector& x, const Vector& u) {
  return generator(cert, sys, x, u) + cert.gamma() * lyapunov_value(cert, x);
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || Q.rows() != n || Q.cols() != n) {
    throw CertificateError("solve_lyapunov: A and Q must be square of equal size");
  }
  if (!is_symmetric(Q) || !is_positive_definite(Q)) {
    throw CertificateError("solve_lyapunov: Q must be symmetric positive definite");
  }
  const Eigen::VectorXcd eig = A.eigenvalues();
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    if (!(eig[i].real() < 0.0)) {
      std::ostringstream msg;
      msg << "solve_lyapunov: A is not Hurwitz (eigenvalue " << eig[i] << ")";
      throw CertificateError(msg.str());
    }
  }
  // vec(A' P + P A) = (I kron A' + A' kron I) vec(P); fine for the small n
  // this library deals with.
  const Matrix I = Matrix::Identity(n, n);
  Matrix K(n * n, n * n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      K.block(r * n, c * n, n, n) = I(r, c) * A.transpose() + A(c, r) * I;
    }
  }
  const Vector rhs = -Eigen::Map<const Vector>(Q.data(), n * n);
  const Vector vecP = K.fullPivLu().solve(rhs);
  Matrix P = Eigen::Map<const Matrix>(vecP.data(), n, n);
  return 0.5 * (P + P.transpose());
}

}  // namespace snmpc::lyap
