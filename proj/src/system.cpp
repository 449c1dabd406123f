#include "ouk/system.hpp"

#include <cmath>

#include "ouk/numerics.hpp"

namespace ouk {

namespace {

double omega_nd(int n) {
  return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

Matrix kinetic_q(int n) {
  // diag(I_n, 0): diffusion on the first block only.
  Matrix Q = Matrix::Zero(2 * n, 2 * n);
  Q.topLeftCorner(n, n).setIdentity();
  return Q;
}

}  // namespace

OUSystem validate(const std::string& name, int dim, const Matrix& Q,
                  const Matrix& B) {
  std::vector<std::string> bad;
  if (dim < 2) bad.push_back("dimension must be at least 2");
  if (Q.rows() != dim || Q.cols() != dim)
    bad.push_back("Q must be " + std::to_string(dim) + "x" +
                  std::to_string(dim));
  if (B.rows() != dim || B.cols() != dim)
    bad.push_back("B must be " + std::to_string(dim) + "x" +
                  std::to_string(dim));
  if (!Q.allFinite()) bad.push_back("Q has non-finite entries");
  if (!B.allFinite()) bad.push_back("B has non-finite entries");
  if (bad.empty()) {
    const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      bad.push_back("Q is not symmetric");
    else {
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Q + Q.transpose()));
      if (es.eigenvalues()(0) < -1e-10 * scale)
        bad.push_back("Q has a negative eigenvalue (" +
                      std::to_string(es.eigenvalues()(0)) + ")");
    }
  }
  if (!bad.empty())
    throw InvalidInput("invalid system '" + name + "'", std::move(bad));
  OUSystem sys;
  sys.name = name;
  sys.key = name;
  sys.dim = dim;
  sys.Q = 0.5 * (Q + Q.transpose());
  sys.B = B;
  return sys;
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {
      "heat",          "ou",       "kolmogorov", "kramers",
      "smoluchowski",  "friction-kolmogorov",    "degenerate-ou"};
  return names;
}

bool is_builtin(const std::string& name) {
  for (const auto& n : builtin_names())
    if (n == name) return true;
  return false;
}

OUSystem make_system(const std::string& key) {
  std::string name = key;
  int k = 0;  // 0 = use the default size
  const auto colon = key.find(':');
  if (colon != std::string::npos) {
    name = key.substr(0, colon);
    const std::string arg = key.substr(colon + 1);
    try {
      std::size_t used = 0;
      k = std::stoi(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
    } catch (const std::exception&) {
      throw InvalidInput("system key '" + key + "': size suffix must be an integer");
    }
    if (k < 1)
      throw InvalidInput("system key '" + key + "': size must be >= 1");
  }
  if (!is_builtin(name))
    throw InvalidInput("unknown system '" + name + "'; known systems: heat, "
                       "ou, kolmogorov, kramers, smoluchowski, "
                       "friction-kolmogorov, degenerate-ou");

  OUSystem sys;
  sys.name = name;
  if (name == "heat" || name == "ou") {
    const int N = k ? k : 2;
    sys.key = name + ":" + std::to_string(N);
    sys.dim = N;
    sys.Q = Matrix::Identity(N, N);
    sys.B = (name == "ou") ? Matrix(-Matrix::Identity(N, N))
                           : Matrix(Matrix::Zero(N, N));
    return sys;
  }
  if (name == "kramers" || name == "smoluchowski") {
    if (k > 1)
      throw InvalidInput("system '" + name + "' has fixed dimension 2");
    sys.key = name;
    sys.dim = 2;
    sys.Q = kinetic_q(1);
    sys.B = Matrix(2, 2);
    if (name == "kramers")
      sys.B << 0, -1, 1, 0;
    else
      sys.B << -2, -2, 1, 0;
    return sys;
  }
  const int n = k ? k : 1;
  sys.key = name + ":" + std::to_string(n);
  sys.dim = 2 * n;
  sys.Q = kinetic_q(n);
  sys.B = Matrix::Zero(2 * n, 2 * n);
  if (name == "kolmogorov") {
    sys.B.bottomLeftCorner(n, n).setIdentity();
  } else if (name == "friction-kolmogorov") {
    sys.B.topLeftCorner(n, n).setIdentity();
    sys.B.bottomLeftCorner(n, n).setIdentity();
  } else {  // degenerate-ou
    sys.B.topLeftCorner(n, n) = -Matrix::Identity(n, n);
    sys.B.bottomLeftCorner(n, n).setIdentity();
  }
  return sys;
}

bool has_closed_form(const OUSystem& sys) { return is_builtin(sys.name); }

double builtin_volume(const OUSystem& sys, double t) {
  if (!(t > 0)) throw InvalidInput("builtin_volume: t must be positive");
  const int N = sys.dim;
  const double w = omega_nd(N);
  if (sys.name == "heat") return w * std::pow(t, 0.5 * N);
  if (sys.name == "ou")
    return w * std::pow(0.5 * (1.0 - std::exp(-2.0 * t)), 0.5 * N);
  if (sys.name == "kolmogorov") {
    const int n = N / 2;
    return w * std::pow(12.0, -0.5 * n) * std::pow(t, 2.0 * n);
  }
  if (sys.name == "kramers")
    return M_PI * std::sqrt(0.25 * t * t + (std::cos(2.0 * t) - 1.0) / 8.0);
  if (sys.name == "smoluchowski")
    return M_PI / (4.0 * std::sqrt(2.0)) *
           std::sqrt(std::exp(-4.0 * t) + 1.0 -
                     2.0 * std::exp(-2.0 * t) * (2.0 - std::cos(2.0 * t)));
  if (sys.name == "friction-kolmogorov") {
    const int n = N / 2;
    const double e1 = std::exp(t), e2 = std::exp(2.0 * t);
    return w * std::pow(0.5 * t * e2 - 0.5 * t - e2 + 2.0 * e1 - 1.0, 0.5 * n);
  }
  if (sys.name == "degenerate-ou") {
    const int n = N / 2;
    const double e1 = std::exp(-t), e2 = std::exp(-2.0 * t);
    return w *
           std::pow(2.0 * e1 + 0.5 * t - 1.0 - 0.5 * t * e2 - e2, 0.5 * n);
  }
  throw InvalidInput("no closed-form volume for system '" + sys.name + "'");
}

namespace {

Matrix controllability(const OUSystem& sys, int powers) {
  const int N = sys.dim;
  Matrix C(N, static_cast<Eigen::Index>(N) * powers);
  Matrix blk = sys.Q;
  for (int j = 0; j < powers; ++j) {
    C.middleCols(static_cast<Eigen::Index>(N) * j, N) = blk;
    if (j + 1 < powers) blk = sys.B * blk;
  }
  return C;
}

}  // namespace

std::pair<bool, int> kalman_check(const OUSystem& sys) {
  const int r = rank_tol(controllability(sys, sys.dim));
  return {r == sys.dim, r};
}

double hypo_certificate(const OUSystem& sys, double t0) {
  const Matrix G = gramian(sys.Q, sys.B, t0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Filtration filtration(const OUSystem& sys) {
  Filtration f;
  int prev = 0;
  for (int j = 0; j < sys.dim; ++j) {
    const int r = rank_tol(controllability(sys, j + 1));
    f.p.push_back(r - prev);
    f.d0 += (2 * j + 1) * (r - prev);
    prev = r;
    if (r == sys.dim) return f;
  }
  throw GuardError("system '" + sys.name +
                   "' is not hypoelliptic: the controllability matrix never "
                   "reaches full rank");
}

double spectral_abscissa(const OUSystem& sys) {
  return spectrum(sys.B).max_real_part();
}

StructureReport structure_report(const OUSystem& sys) {
  StructureReport rep;
  auto [full, rank] = kalman_check(sys);
  rep.hypoelliptic = full;
  rep.kalman_rank = rank;
  if (full) {
    Filtration f = filtration(sys);
    rep.p = std::move(f.p);
    rep.d0_structural = f.d0;
  }
  rep.trace_B = sys.B.trace();
  rep.trace_ok = rep.trace_B >= -1e-12;
  rep.spec = spectrum(sys.B);
  rep.L0 = rep.spec.max_real_part();
  return rep;
}

}  // namespace ouk
