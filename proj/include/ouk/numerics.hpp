#pragma once

#include "ouk/types.hpp"

namespace ouk {

/// e^{tA} by scaling and squaring with diagonal Pade approximants of degree
/// 3/5/7/9/13, picked by the scaled norm. Componentwise relative error is at
/// the 1e-12 level for ||tA|| up to ~50 after scaling.
Matrix mat_exp(const Matrix& A, double t = 1.0);

/// G(t) = integral of e^{sB} Q e^{sB^T} over s in [0,t], i.e. t*K(t).
///
/// Production path is the block-exponential method: exponentiate the 2N x 2N
/// matrix [[-B, Q],[0, B^T]] and assemble G from its blocks. When ||t M||_1 is
/// large the block exponential mixes e^{-tB} and e^{+tB} scales and loses the
/// result to overflow, so the interval is halved k times and G is rebuilt with
/// the composition identity G(2r) = e^{rB} G(r) e^{rB^T} + G(r).
///
/// Throws std::overflow_error when G itself exceeds the double range (strongly
/// expanding B at large t); throws InvalidInput on dimension mismatch or t<=0.
Matrix gramian(const Matrix& Q, const Matrix& B, double t);

/// Cross-check path for gramian: composite Gauss-Legendre in s on [0,t],
/// panels doubled until the result settles to rel_tol in Frobenius norm.
Matrix gramian_quad(const Matrix& Q, const Matrix& B, double t,
                    double rel_tol = 1e-12);

/// L with L L^T = S for symmetric positive semidefinite S. Positive definite
/// input gets the Cholesky factor (lower triangular). Semidefinite input
/// (smallest eigenvalue within -tol*scale of zero) falls back to the symmetric
/// square root with negative eigenvalues clamped. Indefinite input beyond the
/// tolerance is an error.
Matrix sym_factor(const Matrix& S, double tol = 1e-9);

/// Number of singular values exceeding tol * sigma_max; zero matrix has rank 0.
int rank_tol(const Matrix& M, double tol = 1e-10);

/// All eigenvalues with multiplicity (real Schur reduction underneath).
/// Iteration failure is reported as std::runtime_error.
Spectrum spectrum(const Matrix& A);

/// log(det A) for a matrix with positive determinant, via partial-pivot LU.
/// Throws std::runtime_error if det A <= 0.
double log_det_positive(const Matrix& A);

/// log(det S) for symmetric positive definite S, via Cholesky.
double log_det_spd(const Matrix& S);

}  // namespace ouk
