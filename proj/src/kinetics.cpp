#include "photoiso/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "photoiso/errors.hpp"
#include "photoiso/units.hpp"

namespace photoiso {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double RateNetwork::column_sum_error() const {
  const double scale = std::max(K.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  return K.colwise().sum().cwiseAbs().maxCoeff() / scale;
}

RateNetwork make_network(const RedfieldModel& model, const TorsionalSystem& sys) {
  RateNetwork n;
  n.K = rate_generator(model.w_total());
  n.w_cis = sys.w_cis;
  n.w_trans = sys.w_trans;
  n.w_e = sys.w_e;
  n.energies = sys.energies;
  return n;
}

std::vector<std::vector<int>> communicating_classes(const MatrixXd& K) {
  // Tarjan's strongly connected components; edge i -> j when K(j, i) > 0.
  const int n = static_cast<int>(K.rows());
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<char> on(n, 0);
  std::vector<std::vector<int>> out;
  int counter = 0;
  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on[v] = 1;
    for (int w = 0; w < n; ++w) {
      if (w == v || !(K(w, v) > 0.0)) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> comp;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on[w] = 0;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

namespace {

// GTH elimination on an irreducible class; rates P(i,j) = rate i -> j.
VectorXd gth(MatrixXd P) {
  const int n = static_cast<int>(P.rows());
  if (n == 1) return VectorXd::Ones(1);
  for (int k = n - 1; k >= 1; --k) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += P(k, j);
    if (!(s > 0.0)) throw NumericalError("stationary solve: class is not irreducible");
    for (int i = 0; i < k; ++i) P(i, k) /= s;
    for (int i = 0; i < k; ++i) {
      const double f = P(i, k);
      if (f == 0.0) continue;
      for (int j = 0; j < k; ++j)
        if (j != i) P(i, j) += f * P(k, j);
    }
  }
  VectorXd pi(n);
  pi[0] = 1.0;
  for (int j = 1; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < j; ++i) s += pi[i] * P(i, j);
    pi[j] = s;
  }
  return pi / pi.sum();
}

}  // namespace

VectorXd stationary_distribution(const MatrixXd& K, const VectorXd& p0) {
  const int n = static_cast<int>(K.rows());
  const auto classes = communicating_classes(K);
  std::vector<int> cls(n);
  for (size_t c = 0; c < classes.size(); ++c)
    for (int i : classes[c]) cls[i] = static_cast<int>(c);
  VectorXd out = VectorXd::Zero(n);
  for (size_t c = 0; c < classes.size(); ++c) {
    const auto& idx = classes[c];
    double mass = 0.0;
    for (int i : idx) mass += p0[i];
    bool closed = true;
    for (int i : idx)
      for (int j = 0; j < n; ++j)
        if (cls[j] != static_cast<int>(c) && K(j, i) > 0.0) closed = false;
    if (!closed) {
      if (mass > 0.0) throw NumericalError("stationary solve: initial mass in a transient class");
      continue;
    }
    if (mass == 0.0) continue;
    const int m = static_cast<int>(idx.size());
    MatrixXd P = MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        if (a != b) P(a, b) = K(idx[b], idx[a]);
    const VectorXd pi = gth(P);
    for (int a = 0; a < m; ++a) out[idx[a]] = mass * pi[a];
  }
  return out;
}

VectorXd thermal_cis_populations(const RateNetwork& net, double kT) {
  const int n = net.size();
  VectorXd p = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    if (net.w_cis[i] >= net.w_trans[i] && net.w_cis[i] >= net.w_e[i])
      p[i] = std::exp(-(net.energies[i] - net.energies[0]) / kT);
  if (!(p.sum() > 0.0)) throw NumericalError("no cis-dominant states in the basis");
  return p / p.sum();
}

std::vector<double> LogGrid::times() const {
  if (!(t_min > 0.0) || !(t_max > t_min) || points_per_octave < 1)
    throw ConfigError("invalid logarithmic time grid");
  std::vector<double> t;
  for (int k = 0;; ++k) {
    const double x = t_min * std::exp2(double(k) / points_per_octave);
    if (x > t_max * (1.0 + 1e-12)) break;
    t.push_back(x);
  }
  return t;
}

namespace {

// Set each diagonal entry so that its column sums to one (conservation).
void fix_diagonal(MatrixXd& P) {
  for (int j = 0; j < P.cols(); ++j) {
    const double off = P.col(j).sum() - P(j, j);
    P(j, j) = std::max(0.0, 1.0 - off);
  }
}

MatrixXd uniformized_step(const MatrixXd& K, double sigma, double dt) {
  const int n = static_cast<int>(K.rows());
  MatrixXd B = K / sigma;
  for (int i = 0; i < n; ++i) B(i, i) = std::max(0.0, 1.0 + K(i, i) / sigma);
  const double x = sigma * dt;
  MatrixXd term = MatrixXd::Identity(n, n), sum = term;
  double coef = 1.0;
  for (int k = 1; k < 60; ++k) {
    coef *= x / k;
    term = term * B;
    sum += coef * term;
    if (coef < 1e-18) break;
  }
  MatrixXd P = std::exp(-x) * sum;
  fix_diagonal(P);
  return P;
}

double uniformization_rate(const MatrixXd& K) {
  double s = 0.0;
  for (int i = 0; i < K.rows(); ++i) s = std::max(s, -K(i, i));
  return s;
}

}  // namespace

MatrixXd generator_exponential(const MatrixXd& K, double t) {
  const int n = static_cast<int>(K.rows());
  const double sigma = uniformization_rate(K);
  if (sigma == 0.0 || t == 0.0) return MatrixXd::Identity(n, n);
  int s = 0;
  while (sigma * t / std::exp2(s) > 0.5) ++s;
  MatrixXd P = uniformized_step(K, sigma, t / std::exp2(s));
  for (int k = 0; k < s; ++k) {
    P = P * P;
    fix_diagonal(P);
  }
  return P;
}

PopulationSeries propagate_populations(const RateNetwork& net, const VectorXd& p0, const LogGrid& grid,
                                       bool force_fallback) {
  const int n = net.size();
  if (p0.size() != n) throw ConfigError("initial population vector has wrong size");
  if (p0.minCoeff() < 0.0 || std::abs(p0.sum() - 1.0) > 1e-10)
    throw ConfigError("initial populations must be nonnegative and sum to one");
  const std::vector<double> ts = grid.times();
  const MatrixXd K = net.K * units::second;  // s^-1

  PopulationSeries out;
  auto push = [&](double t, const VectorXd& p) {
    out.t.push_back(t);
    out.P_cis.push_back(net.w_cis.dot(p));
    out.P_trans.push_back(net.w_trans.dot(p));
    out.P_e.push_back(net.w_e.dot(p));
    out.total.push_back(p.sum());
  };
  push(0.0, p0);

  bool spectral = !force_fallback;
  Eigen::EigenSolver<MatrixXd> es;
  if (spectral) {
    es.compute(K);
    if (es.info() != Eigen::Success) {
      spectral = false;
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
      const auto& sv = svd.singularValues();
      const double cond = sv[0] / sv[sv.size() - 1];
      if (!(cond * std::numeric_limits<double>::epsilon() < 1e-10)) {
        spectral = false;
        out.warnings.push_back("eigenbasis ill-conditioned (cond = " + std::to_string(cond) +
                               "); using scaling-and-squaring exponential");
      }
    }
  }

  if (spectral) {
    out.method = "spectral";
    const Eigen::MatrixXcd V = es.eigenvectors();
    const Eigen::VectorXcd lam = es.eigenvalues();
    const Eigen::VectorXcd y = V.partialPivLu().solve(p0.cast<std::complex<double>>());
    VectorXd p = p0;
    for (double t : ts) {
      Eigen::VectorXcd e(n);
      for (int k = 0; k < n; ++k) e[k] = std::exp(lam[k] * t) * y[k];
      p = (V * e).real();
      push(t, p);
    }
    out.final_populations = p;
    return out;
  }

  out.method = "uniformization";
  // t = t_min 2^(j/ppo) 2^m: one base exponential per sub-octave offset,
  // then repeated squaring.
  const int ppo = grid.points_per_octave;
  std::vector<std::pair<double, VectorXd>> samples;
  for (int j = 0; j < ppo; ++j) {
    double t = grid.t_min * std::exp2(double(j) / ppo);
    if (t > ts.back() * (1.0 + 1e-12)) break;
    MatrixXd P = generator_exponential(K, t);
    while (t <= ts.back() * (1.0 + 1e-12)) {
      samples.emplace_back(t, P * p0);
      if (2.0 * t > ts.back() * (1.0 + 1e-12)) break;
      P = P * P;
      fix_diagonal(P);
      t *= 2.0;
    }
  }
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [t, p] : samples) push(t, p);
  out.final_populations = samples.back().second;
  return out;
}

SlopeFit extract_slope_and_onset(const std::vector<double>& t, const std::vector<double>& P,
                                 double threshold) {
  const size_t n = t.size();
  if (n != P.size() || n < 4) throw ConfigError("slope extraction needs >= 4 matching samples");
  const double t_end = t.back();
  std::vector<size_t> sel;
  for (size_t k = 0; k < n; ++k)
    if (t[k] >= t_end / 10.0 * (1.0 - 1e-12)) sel.push_back(k);
  if (sel.size() < 2) throw NumericalError("fewer than two samples in the final decade");
  double tm = 0.0, pm = 0.0;
  for (size_t k : sel) {
    tm += t[k];
    pm += P[k];
  }
  tm /= sel.size();
  pm /= sel.size();
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t k : sel) {
    sxx += (t[k] - tm) * (t[k] - tm);
    sxy += (t[k] - tm) * (P[k] - pm);
    syy += (P[k] - pm) * (P[k] - pm);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = pm - fit.slope * tm;
  fit.fit_points = static_cast<int>(sel.size());
  double sse = 0.0;
  for (size_t k : sel) {
    const double r = P[k] - (fit.slope * t[k] + fit.intercept);
    sse += r * r;
    fit.max_fit_residual = std::max(fit.max_fit_residual, std::abs(r));
  }
  fit.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;

  std::vector<double> rel(n);
  for (size_t k = 0; k < n; ++k) {
    const double line = fit.slope * t[k] + fit.intercept;
    const double d = std::abs(P[k] - line);
    if (d == 0.0) rel[k] = 0.0;
    else if (line <= 0.0) rel[k] = std::numeric_limits<double>::infinity();
    else rel[k] = d / line;
  }
  long bad = -1;
  for (size_t k = 0; k < n; ++k)
    if (!(rel[k] < threshold)) bad = static_cast<long>(k);
  if (bad < 0) {
    fit.t_c = t[0];
  } else if (bad == static_cast<long>(n) - 1) {
    throw NumericalError("no linear regime: residual never settles below threshold");
  } else {
    const size_t k = static_cast<size_t>(bad);
    if (std::isfinite(rel[k]) && t[k] > 0.0 && rel[k + 1] > 0.0) {
      const double r0 = std::log(rel[k]), r1 = std::log(rel[k + 1]);
      const double f = (std::log(threshold) - r0) / (r1 - r0);
      fit.t_c = std::exp(std::log(t[k]) + f * (std::log(t[k + 1]) - std::log(t[k])));
    } else {
      fit.t_c = t[k + 1];
    }
  }
  fit.decades_beyond_tc = fit.t_c > 0 ? std::log10(t_end / fit.t_c) : std::numeric_limits<double>::infinity();
  return fit;
}

// --- three-state model ----------------------------------------------------------

void KineticModel::validate() const {
  if (k1 < 0 || k2 < 0 || k3 < 0 || k4 < 0) throw ConfigError("rate constants must be >= 0");
}
double KineticModel::slope() const { return k1 * k4 / (k2 + k4); }
double KineticModel::onset() const { return 3.0 / (k2 + k4); }

KineticModel reference_three_state(double eta, double k1) {
  KineticModel m;
  m.k1 = k1;
  m.k2 = m.k4 = 0.08 * eta * 1e12;
  m.k3 = m.k4 * 1.87e-9;
  return m;
}

KineticModel fit_three_state(double k1, double slope, double t_c, bool equal_k2_k4) {
  if (!(k1 > 0) || !(t_c > 0)) throw ConfigError("three-state fit needs k1 > 0 and t_c > 0");
  const double total = 3.0 / t_c;  // k2 + k4
  KineticModel m;
  m.k1 = k1;
  if (equal_k2_k4) {
    m.k2 = m.k4 = 0.5 * total;
  } else {
    const double phi = std::clamp(slope / k1, 0.0, 1.0);
    m.k4 = phi * total;
    m.k2 = total - m.k4;
  }
  m.k3 = m.k4 * 1.87e-9;
  return m;
}

Eigen::Matrix3d three_state_generator(const KineticModel& m) {
  Eigen::Matrix3d G;
  G << -m.k1, m.k2, 0.0,
       m.k1, -(m.k2 + m.k4), m.k3,
       0.0, m.k4, -m.k3;
  return G;
}

ThreeStateSeries three_state_solve(const KineticModel& m, const std::vector<double>& t,
                                   const Eigen::Vector3d& p0) {
  m.validate();
  ThreeStateSeries s;
  s.t = t;
  const double S = m.k1 + m.k2 + m.k3 + m.k4;
  const double Pp = m.k1 * m.k3 + m.k1 * m.k4 + m.k2 * m.k3;
  const double disc = S * S - 4.0 * Pp;
  auto push = [&](const Eigen::Vector3d& p) {
    s.PA.push_back(p[0]);
    s.PB.push_back(p[1]);
    s.PC.push_back(p[2]);
  };
  if (!(Pp > 0.0) || !(disc > 0.0)) {
    // reducible or degenerate spectrum: exact exponential per time
    const Eigen::Matrix3d G = three_state_generator(m);
    for (double tt : t) push(generator_exponential(G, tt) * p0);
    return s;
  }
  // eigenvalues 0, lp = P/q (slow), lm = q (fast); stable quadratic roots
  const double q = -0.5 * (S + std::sqrt(disc));
  const double lam[2] = {Pp / q, q};
  Eigen::Vector3d v[2];
  double c[2];
  for (int k = 0; k < 2; ++k) {
    const double l = lam[k];
    const double a = m.k1 + l, b = m.k3 + l;
    v[k] = Eigen::Vector3d(m.k2 * b, a * b, m.k4 * a);           // right
    const Eigen::Vector3d u(m.k1 * b, a * b, m.k3 * a);          // left
    const double norm = m.k1 * m.k2 * b * b + a * a * b * b + m.k3 * m.k4 * a * a;
    c[k] = u.dot(p0) / norm;
  }
  for (double tt : t) {
    Eigen::Vector3d p = p0;
    for (int k = 0; k < 2; ++k) p += c[k] * std::expm1(lam[k] * tt) * v[k];
    push(p);
  }
  return s;
}

// --- response statistics --------------------------------------------------------

double response_probability_binomial(double p, double N, int n0) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability must be in [0, 1]");
  if (N < n0) throw DomainError("N must be >= threshold");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double lp = std::log(p), lq = std::log1p(-p);
  double below = 0.0, logc = 0.0;  // log C(N, n)
  for (int n = 0; n < n0; ++n) {
    if (n > 0) logc += std::log(N - (n - 1)) - std::log(double(n));
    below += std::exp(logc + n * lp + (N - n) * lq);
  }
  return std::clamp(1.0 - below, 0.0, 1.0);
}

double response_probability_poisson(double lambda, int n0) {
  if (!(lambda >= 0.0)) throw DomainError("Poisson mean must be >= 0");
  double term = 1.0, below = 0.0;
  for (int n = 0; n < n0; ++n) {
    if (n > 0) term *= lambda / n;
    below += term;
  }
  return std::clamp(1.0 - std::exp(-lambda) * below, 0.0, 1.0);
}

double response_probability(double p, double N, int n0) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability must be in [0, 1]");
  if (N * p <= 1e6) return response_probability_binomial(p, N, n0);
  return response_probability_poisson(N * p, n0);
}

double response_crossing_time(double slope, double N, double level, int n0) {
  if (!(slope > 0.0)) throw DomainError("slope must be positive");
  double lo = 0.0, hi = 1.0;
  if (response_probability(hi, N, n0) < level) throw NumericalError("level unreachable");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (response_probability(mid, N, n0) < level ? lo : hi) = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi) / slope;
}

std::vector<ResponseCurve> response_curve(double slope_ref, double L_ref, const std::vector<double>& Ls,
                                          double N, const std::vector<double>& t, int n0) {
  std::vector<ResponseCurve> out;
  for (double L : Ls) {
    ResponseCurve c;
    c.L = L;
    c.slope = slope_ref * L / L_ref;
    c.t = t;
    for (double tt : t) c.P3.push_back(response_probability(std::min(1.0, c.slope * tt), N, n0));
    c.t_half = c.slope > 0 ? response_crossing_time(c.slope, N, 0.5, n0)
                           : std::numeric_limits<double>::infinity();
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace photoiso
