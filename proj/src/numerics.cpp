#include "ouk/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace ouk {

namespace {

void require_square(const Matrix& A, const char* who) {
  if (A.rows() != A.cols())
    throw InvalidInput(std::string(who) + ": matrix must be square");
  if (!A.allFinite())
    throw InvalidInput(std::string(who) + ": matrix has non-finite entries");
}

// Pade numerator coefficients for degrees 3..13 (Higham's table).
const double kPade3[] = {120.0, 60.0, 12.0, 1.0};
const double kPade5[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
const double kPade7[] = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                         25200.0,    1512.0,    56.0,      1.0};
const double kPade9[] = {17643225600.0, 8821612800.0, 2075673600.0,
                         302702400.0,   30270240.0,   2162160.0,
                         110880.0,      3960.0,       90.0,
                         1.0};
const double kPade13[] = {64764752532480000.0, 32382376266240000.0,
                          7771770303897600.0,  1187353796428800.0,
                          129060195264000.0,   10559470521600.0,
                          670442572800.0,      33522128640.0,
                          1323241920.0,        40840800.0,
                          960960.0,            16380.0,
                          182.0,               1.0};

// theta_m thresholds: use degree m while ||A||_1 <= theta_m.
const double kTheta3 = 1.495585217958292e-2;
const double kTheta5 = 2.539398330063230e-1;
const double kTheta7 = 9.504178996162932e-1;
const double kTheta9 = 2.097847961257068e0;
const double kTheta13 = 5.371920351148152e0;

double norm_1(const Matrix& A) { return A.cwiseAbs().colwise().sum().maxCoeff(); }

Matrix pade_solve(const Matrix& U, const Matrix& V) {
  // r = (V - U)^{-1} (V + U)
  return (V - U).partialPivLu().solve(V + U);
}

Matrix exp_pade_low(const Matrix& A, const double* b, int m) {
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = A * A;
  Matrix U = b[1] * I;
  Matrix V = b[0] * I;
  Matrix P = A2;  // A^{2k}
  for (int k = 1; 2 * k <= m; ++k) {
    U += b[2 * k + 1] * P;
    V += b[2 * k] * P;
    if (2 * (k + 1) <= m) P = P * A2;
  }
  U = A * U;
  return pade_solve(U, V);
}

Matrix exp_pade13(const Matrix& A) {
  const Eigen::Index n = A.rows();
  const double* b = kPade13;
  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = A * A;
  const Matrix A4 = A2 * A2;
  const Matrix A6 = A4 * A2;
  Matrix U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 +
                  b[5] * A4 + b[3] * A2 + b[1] * I);
  Matrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 +
             b[4] * A4 + b[2] * A2 + b[0] * I;
  return pade_solve(U, V);
}

}  // namespace

Matrix mat_exp(const Matrix& A, double t) {
  require_square(A, "mat_exp");
  if (!std::isfinite(t)) throw InvalidInput("mat_exp: t must be finite");
  const Eigen::Index n = A.rows();
  if (n == 0) return Matrix(0, 0);
  Matrix W = t * A;
  const double nrm = norm_1(W);
  if (nrm <= kTheta3) return exp_pade_low(W, kPade3, 3);
  if (nrm <= kTheta5) return exp_pade_low(W, kPade5, 5);
  if (nrm <= kTheta7) return exp_pade_low(W, kPade7, 7);
  if (nrm <= kTheta9) return exp_pade_low(W, kPade9, 9);
  int squarings = 0;
  if (nrm > kTheta13) {
    // smallest s with nrm / 2^s <= theta13
    std::frexp(nrm / kTheta13, &squarings);
    if (squarings < 0) squarings = 0;
    W /= std::ldexp(1.0, squarings);
  }
  Matrix R = exp_pade13(W);
  for (int i = 0; i < squarings; ++i) R = R * R;
  return R;
}

namespace {

// Single-shot block-exponential Gramian, valid while the block norm is modest.
Matrix gramian_vanloan(const Matrix& Q, const Matrix& B, double t) {
  const Eigen::Index n = B.rows();
  Matrix M = Matrix::Zero(2 * n, 2 * n);
  M.topLeftCorner(n, n) = -B;
  M.topRightCorner(n, n) = Q;
  M.bottomRightCorner(n, n) = B.transpose();
  const Matrix F = mat_exp(M, t);
  const Matrix G =
      F.bottomRightCorner(n, n).transpose() * F.topRightCorner(n, n);
  return 0.5 * (G + G.transpose());
}

}  // namespace

Matrix gramian(const Matrix& Q, const Matrix& B, double t) {
  require_square(Q, "gramian");
  require_square(B, "gramian");
  if (Q.rows() != B.rows())
    throw InvalidInput("gramian: Q and B dimensions differ");
  if (!(t > 0)) throw InvalidInput("gramian: t must be positive");

  const Eigen::Index n = B.rows();
  // l1 norm of the 2N x 2N block matrix [[-B, Q],[0, B^T]], scaled by t.
  double block_norm = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    block_norm = std::max(block_norm, B.col(j).cwiseAbs().sum());
    block_norm = std::max(
        block_norm, Q.col(j).cwiseAbs().sum() + B.row(j).cwiseAbs().sum());
  }
  block_norm *= t;
  Matrix G;
  if (block_norm <= 40.0) {
    G = gramian_vanloan(Q, B, t);
  } else {
    // Halve the interval until the block exponential is safe, then double
    // back up with G(2r) = E G E^T + G, E = e^{rB}.
    int k = static_cast<int>(std::ceil(std::log2(block_norm / 40.0)));
    const double h = t / std::ldexp(1.0, k);
    G = gramian_vanloan(Q, B, h);
    Matrix E = mat_exp(B, h);
    for (int i = 0; i < k; ++i) {
      G = (E * G * E.transpose() + G).eval();
      G = 0.5 * (G + G.transpose());
      if (!G.allFinite())
        throw std::overflow_error(
            "gramian: covariance exceeds double range at t=" +
            std::to_string(t));
      if (i + 1 < k) {
        E = (E * E).eval();
        if (!E.allFinite())
          throw std::overflow_error(
              "gramian: e^{tB} exceeds double range at t=" + std::to_string(t));
      }
    }
  }
  if (!G.allFinite())
    throw std::overflow_error("gramian: covariance exceeds double range at t=" +
                              std::to_string(t));
  (void)n;
  return G;
}

Matrix gramian_quad(const Matrix& Q, const Matrix& B, double t,
                    double rel_tol) {
  require_square(Q, "gramian_quad");
  require_square(B, "gramian_quad");
  if (Q.rows() != B.rows())
    throw InvalidInput("gramian_quad: Q and B dimensions differ");
  if (!(t > 0)) throw InvalidInput("gramian_quad: t must be positive");

  // 16-point Gauss-Legendre nodes/weights on (-1,1), upper half; mirrored.
  static const double kX[] = {0.0950125098376374, 0.2816035507792589,
                              0.4580167776572274, 0.6178762444026438,
                              0.7554044083550030, 0.8656312023878318,
                              0.9445750230732326, 0.9894009349916499};
  static const double kW[] = {0.1894506104550685, 0.1826034150449236,
                              0.1691565193950025, 0.1495959888165767,
                              0.1246289712555339, 0.0951585116824928,
                              0.0622535239386479, 0.0271524594117541};
  const Eigen::Index n = B.rows();
  auto integrate = [&](int panels) {
    Matrix G = Matrix::Zero(n, n);
    const double w = t / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = (p + 0.5) * w;
      for (int j = 0; j < 8; ++j) {
        for (int sgn = -1; sgn <= 1; sgn += 2) {
          const double s = mid + sgn * 0.5 * w * kX[j];
          const Matrix E = mat_exp(B, s);
          G += (0.5 * w * kW[j]) * (E * Q * E.transpose());
        }
      }
    }
    return G;
  };
  Matrix G = integrate(4);
  for (int panels = 8; panels <= 4096; panels *= 2) {
    Matrix G2 = integrate(panels);
    const double diff = (G2 - G).norm();
    G = G2;
    if (diff <= rel_tol * std::max(G.norm(), 1e-300)) break;
  }
  return 0.5 * (G + G.transpose());
}

Matrix sym_factor(const Matrix& S, double tol) {
  require_square(S, "sym_factor");
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidInput("sym_factor: matrix is not symmetric");

  Eigen::LLT<Matrix> llt(S);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sym_factor: eigenvalue iteration failed");
  const Vector& lam = es.eigenvalues();
  if (lam(0) < -tol * scale)
    throw InvalidInput("sym_factor: matrix is indefinite beyond tolerance");
  Vector root = lam.cwiseMax(0.0).cwiseSqrt();
  // Symmetric square root; still satisfies L L^T = S for semidefinite S.
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

int rank_tol(const Matrix& M, double tol) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  if (!(smax > 0)) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * smax) ++r;
  return r;
}

Spectrum spectrum(const Matrix& A) {
  require_square(A, "spectrum");
  Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectrum: QR iteration did not converge");
  Spectrum out;
  const auto& ev = es.eigenvalues();
  out.eigenvalues.reserve(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) out.eigenvalues.push_back(ev(i));
  return out;
}

double log_det_positive(const Matrix& A) {
  require_square(A, "log_det_positive");
  Eigen::PartialPivLU<Matrix> lu(A);
  double logdet = 0.0;
  double sign = lu.permutationP().determinant() > 0 ? 1.0 : -1.0;
  const auto diag = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag(i) < 0) sign = -sign;
    if (diag(i) == 0) {
      sign = 0;
      break;
    }
    logdet += std::log(std::abs(diag(i)));
  }
  if (!(sign > 0))
    throw std::runtime_error("log_det_positive: determinant is not positive");
  return logdet;
}

double log_det_spd(const Matrix& S) {
  require_square(S, "log_det_spd");
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("log_det_spd: matrix is not positive definite");
  const Matrix L = llt.matrixL();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) logdet += std::log(L(i, i));
  return 2.0 * logdet;
}

}  // namespace ouk
