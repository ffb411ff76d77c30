#include "softpg/mdp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace softpg::mdp {

void MdpSpec::validate() const {
  if (S < 1 || A < 1) throw std::invalid_argument("mdp: need S >= 1 and A >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("mdp: gamma must be in [0,1)");
  if (transitions.size() != static_cast<size_t>(S) * A * S)
    throw std::invalid_argument("mdp: transition tensor has wrong size");
  if (rewards.rows() != S || rewards.cols() != A)
    throw std::invalid_argument("mdp: reward matrix has wrong shape");
  if (static_cast<int>(rho.size()) != S) throw std::invalid_argument("mdp: rho has wrong size");
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < S; ++s2) {
        const double v = p(s, a, s2);
        if (v < 0.0) throw std::invalid_argument("mdp: negative transition probability");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("mdp: transition row does not sum to 1");
    }
  double rs = 0.0;
  for (double v : rho) rs += v;
  if (std::abs(rs - 1.0) > 1e-12) throw std::invalid_argument("mdp: rho does not sum to 1");
}

namespace {

Eigen::MatrixXd policy_transition(const MdpSpec& spec, const policy::Policy& pi) {
  Eigen::MatrixXd P(spec.S, spec.S);
  for (int s = 0; s < spec.S; ++s)
    for (int s2 = 0; s2 < spec.S; ++s2) {
      double v = 0.0;
      for (int a = 0; a < spec.A; ++a) v += pi(s, a) * spec.p(s, a, s2);
      P(s, s2) = v;
    }
  return P;
}

// Core evaluation with the policy and a finite log-policy matrix supplied by
// the caller (exact log-softmax when coming from logits, guarded log when
// coming from an explicit policy).
EvalCache evaluate_core(const MdpSpec& spec, const policy::Policy& pi, const Matrix& log_pi,
                        double tau) {
  EvalCache cache;
  cache.tau = tau;
  const Eigen::MatrixXd P = policy_transition(spec, pi);
  const Eigen::MatrixXd sys =
      Eigen::MatrixXd::Identity(spec.S, spec.S) - spec.gamma * P;
  const auto lu = sys.partialPivLu();

  Eigen::VectorXd r_pi(spec.S);
  for (int s = 0; s < spec.S; ++s) {
    double v = 0.0;
    for (int a = 0; a < spec.A; ++a) {
      if (pi(s, a) <= 0.0) continue;
      v += pi(s, a) * (spec.rewards(s, a) - tau * log_pi(s, a));
    }
    r_pi(s) = v;
  }
  const Eigen::VectorXd V = lu.solve(r_pi);
  cache.V.assign(V.data(), V.data() + spec.S);

  cache.Q = Matrix(spec.S, spec.A);
  cache.Adv = Matrix(spec.S, spec.A);
  for (int s = 0; s < spec.S; ++s)
    for (int a = 0; a < spec.A; ++a) {
      double ev = 0.0;
      for (int s2 = 0; s2 < spec.S; ++s2) ev += spec.p(s, a, s2) * cache.V[s2];
      cache.Q(s, a) = spec.rewards(s, a) + spec.gamma * ev;
      cache.Adv(s, a) = cache.Q(s, a) - tau * log_pi(s, a) - cache.V[s];
    }

  Eigen::VectorXd rho(spec.S);
  for (int s = 0; s < spec.S; ++s) rho(s) = (1.0 - spec.gamma) * spec.rho[s];
  const Eigen::VectorXd d = sys.transpose().partialPivLu().solve(rho);
  cache.d.assign(d.data(), d.data() + spec.S);

  cache.f = 0.0;
  for (int s = 0; s < spec.S; ++s) cache.f += spec.rho[s] * cache.V[s];

  cache.grad = Matrix(spec.S, spec.A);
  const double scale = 1.0 / (1.0 - spec.gamma);
  for (int s = 0; s < spec.S; ++s)
    for (int a = 0; a < spec.A; ++a)
      cache.grad(s, a) = scale * cache.d[s] * pi(s, a) * cache.Adv(s, a);
  return cache;
}

Matrix guarded_log(const policy::Policy& pi) {
  Matrix lp(pi.rows(), pi.cols());
  for (int s = 0; s < pi.rows(); ++s)
    for (int a = 0; a < pi.cols(); ++a)
      lp(s, a) = pi(s, a) > 1e-300 ? std::log(pi(s, a)) : 0.0;
  return lp;
}

}  // namespace

EvalCache evaluate(const MdpSpec& spec, const policy::Theta& theta, double tau) {
  if (tau < 0.0) throw std::invalid_argument("evaluate: tau must be >= 0");
  return evaluate_core(spec, policy::softmax(theta), policy::log_softmax(theta), tau);
}

EvalCache evaluate_policy(const MdpSpec& spec, const policy::Policy& pi, double tau) {
  if (tau < 0.0) throw std::invalid_argument("evaluate_policy: tau must be >= 0");
  return evaluate_core(spec, pi, guarded_log(pi), tau);
}

double value_of(const MdpSpec& spec, const policy::Theta& theta, double tau) {
  const auto pi = policy::softmax(theta);
  const auto log_pi = policy::log_softmax(theta);
  const Eigen::MatrixXd P = policy_transition(spec, pi);
  const Eigen::MatrixXd sys =
      Eigen::MatrixXd::Identity(spec.S, spec.S) - spec.gamma * P;
  Eigen::VectorXd r_pi(spec.S);
  for (int s = 0; s < spec.S; ++s) {
    double v = 0.0;
    for (int a = 0; a < spec.A; ++a) {
      if (pi(s, a) <= 0.0) continue;
      v += pi(s, a) * (spec.rewards(s, a) - tau * log_pi(s, a));
    }
    r_pi(s) = v;
  }
  const Eigen::VectorXd V = sys.partialPivLu().solve(r_pi);
  double f = 0.0;
  for (int s = 0; s < spec.S; ++s) f += spec.rho[s] * V(s);
  return f;
}

Optimum optimal_values(const MdpSpec& spec, double tau) {
  if (tau < 0.0) throw std::invalid_argument("optimal_values: tau must be >= 0");
  std::vector<double> V(spec.S, 0.0), Vn(spec.S, 0.0);
  Matrix Q(spec.S, spec.A);
  const double tol = 1e-12;
  // The sup-norm contraction factor is gamma; iterate until the update stalls.
  for (int it = 0; it < 2000000; ++it) {
    double diff = 0.0;
    for (int s = 0; s < spec.S; ++s) {
      for (int a = 0; a < spec.A; ++a) {
        double ev = 0.0;
        for (int s2 = 0; s2 < spec.S; ++s2) ev += spec.p(s, a, s2) * V[s2];
        Q(s, a) = spec.rewards(s, a) + spec.gamma * ev;
      }
      double v;
      if (tau == 0.0) {
        v = Q(s, 0);
        for (int a = 1; a < spec.A; ++a) v = std::max(v, Q(s, a));
      } else {
        double mx = Q(s, 0);
        for (int a = 1; a < spec.A; ++a) mx = std::max(mx, Q(s, a));
        double z = 0.0;
        for (int a = 0; a < spec.A; ++a) z += std::exp((Q(s, a) - mx) / tau);
        v = mx + tau * std::log(z);
      }
      diff = std::max(diff, std::abs(v - V[s]));
      Vn[s] = v;
    }
    V = Vn;
    if (diff <= tol * (1.0 - spec.gamma)) break;
  }

  Optimum opt;
  opt.pi = policy::Policy(spec.S, spec.A);
  for (int s = 0; s < spec.S; ++s) {
    for (int a = 0; a < spec.A; ++a) {
      double ev = 0.0;
      for (int s2 = 0; s2 < spec.S; ++s2) ev += spec.p(s, a, s2) * V[s2];
      Q(s, a) = spec.rewards(s, a) + spec.gamma * ev;
    }
    if (tau == 0.0) {
      opt.pi(s, policy::argmax_action(std::span<const double>(Q.row(s), spec.A))) = 1.0;
    } else {
      policy::Theta scaled(1, spec.A);
      for (int a = 0; a < spec.A; ++a) scaled(0, a) = Q(s, a) / tau;
      const auto row = policy::softmax(scaled);
      for (int a = 0; a < spec.A; ++a) opt.pi(s, a) = row(0, a);
    }
  }
  opt.Q = Q;
  opt.value = evaluate_policy(spec, opt.pi, tau).f;
  return opt;
}

MdpGradSample sample_gradient(const MdpSpec& spec, const policy::Theta& theta,
                              const EvalCache& cache, double tau, Rng& rng) {
  const auto pi = policy::softmax(theta);
  const auto log_pi = policy::log_softmax(theta);
  MdpGradSample out;
  out.actions.resize(spec.S);
  out.q_hat = Matrix(spec.S, spec.A);
  out.g_hat = Matrix(spec.S, spec.A);
  const double scale = 1.0 / (1.0 - spec.gamma);
  for (int s = 0; s < spec.S; ++s) {
    const int at = rng.categorical(std::span<const double>(pi.row(s), spec.A));
    out.actions[s] = at;
    const double q = cache.Q(s, at);
    out.q_hat(s, at) = q / pi(s, at);
    // H(pi_s) applied to Q_hat(s,.) collapses to q (e_at - pi_s); the entropy
    // term uses the exact log-softmax row.
    std::vector<double> reg;
    if (tau != 0.0)
      reg = policy::jacobian_apply(std::span<const double>(pi.row(s), spec.A),
                                   std::span<const double>(log_pi.row(s), spec.A));
    for (int a = 0; a < spec.A; ++a) {
      double g = q * ((a == at ? 1.0 : 0.0) - pi(s, a));
      if (tau != 0.0) g -= tau * reg[a];
      out.g_hat(s, a) = scale * cache.d[s] * g;
    }
  }
  return out;
}

double min_q_gap(const Matrix& Q) {
  double gap = std::numeric_limits<double>::infinity();
  for (int s = 0; s < Q.rows(); ++s)
    for (int a = 0; a < Q.cols(); ++a)
      for (int b = a + 1; b < Q.cols(); ++b)
        gap = std::min(gap, std::abs(Q(s, a) - Q(s, b)));
  return gap;
}

namespace {

struct GridBuilder {
  MdpSpec spec;
  GridBuilder(int S, int A, double gamma) {
    spec.S = S;
    spec.A = A;
    spec.gamma = gamma;
    spec.transitions.assign(static_cast<size_t>(S) * A * S, 0.0);
    spec.rewards = Matrix(S, A);
    spec.rho.assign(S, 1.0 / S);
  }
  void arc(int s, int a, int s2, double r) {
    spec.p(s, a, s2) = 1.0;
    spec.rewards(s, a) = r;
  }
};

}  // namespace

MdpSpec make_cliff_world() {
  // 3 x 7 grid, row-major states. Bottom row: start (2,0), cliff cells
  // (2,1)..(2,5), goal (2,6). Actions: 0 up, 1 down, 2 left, 3 right;
  // moving off-grid stays in place. Transitions that land in a cliff cell
  // give -100 and send the agent back to the start; so does any action taken
  // from inside a cliff cell. Reaching the goal gives +1; the goal absorbs.
  const int rows = 3, cols = 7;
  GridBuilder g(rows * cols, 4, 0.9);
  const auto id = [cols](int r, int c) { return r * cols + c; };
  const int start = id(2, 0);
  const int goal = id(2, 6);
  const auto is_cliff = [&](int r, int c) { return r == 2 && c >= 1 && c <= 5; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int s = id(r, c);
      if (s == goal) {
        for (int a = 0; a < 4; ++a) g.arc(s, a, goal, 0.0);
        continue;
      }
      if (is_cliff(r, c)) {
        for (int a = 0; a < 4; ++a) g.arc(s, a, start, -100.0);
        continue;
      }
      const int dr[4] = {-1, 1, 0, 0};
      const int dc[4] = {0, 0, -1, 1};
      for (int a = 0; a < 4; ++a) {
        int nr = r + dr[a], nc = c + dc[a];
        if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) {
          nr = r;
          nc = c;
        }
        if (is_cliff(nr, nc)) {
          g.arc(s, a, start, -100.0);
        } else if (id(nr, nc) == goal) {
          g.arc(s, a, goal, 1.0);
        } else {
          g.arc(s, a, id(nr, nc), 0.0);
        }
      }
    }
  g.spec.name = "cliff_world";
  g.spec.validate();
  return g.spec;
}

MdpSpec make_deep_sea() {
  // 5 x 5 grid, row-major states, start at (0,0). Both actions descend one
  // row: action 0 keeps the column, action 1 also moves one column right and
  // costs -0.02. Only the lower triangle (col <= row) is reachable. The
  // bottom row absorbs; entering the treasure cell (4,0) gives +1.
  const int rows = 5, cols = 5;
  GridBuilder g(rows * cols, 2, 0.9);
  const auto id = [cols](int r, int c) { return r * cols + c; };
  const int treasure = id(4, 0);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int s = id(r, c);
      if (r == rows - 1) {
        for (int a = 0; a < 2; ++a) g.arc(s, a, s, 0.0);
        continue;
      }
      const int down = id(r + 1, c);
      g.arc(s, 0, down, down == treasure ? 1.0 : 0.0);
      const int right_col = std::min(c + 1, cols - 1);
      const int diag = id(r + 1, right_col);
      g.arc(s, 1, diag, -0.02);
    }
  g.spec.name = "deep_sea";
  g.spec.validate();
  return g.spec;
}

MdpSpec make_flat_grad() {
  // 22-node chain. From state s < 21, action 0 advances to s+1 and the other
  // three actions self-loop. The final state absorbs with reward +1 under
  // every action; the transition entering it also pays +1.
  const int n = 22;
  GridBuilder g(n, 4, 22.0 / 23.0);
  for (int s = 0; s < n - 1; ++s) {
    g.arc(s, 0, s + 1, s + 1 == n - 1 ? 1.0 : 0.0);
    for (int a = 1; a < 4; ++a) g.arc(s, a, s, 0.0);
  }
  for (int a = 0; a < 4; ++a) g.arc(n - 1, a, n - 1, 1.0);
  g.spec.name = "flat_grad";
  g.spec.validate();
  return g.spec;
}

MdpSpec make_named(const std::string& name) {
  if (name == "cliff_world") return make_cliff_world();
  if (name == "deep_sea") return make_deep_sea();
  if (name == "flat_grad") return make_flat_grad();
  throw std::invalid_argument("unknown MDP environment: " + name);
}

MdpSpec random_instance(int S, int A, double gamma, uint64_t seed) {
  Rng rng(seed);
  MdpSpec spec;
  spec.S = S;
  spec.A = A;
  spec.gamma = gamma;
  spec.name = "random";
  spec.transitions.assign(static_cast<size_t>(S) * A * S, 0.0);
  spec.rewards = Matrix(S, A);
  spec.rho.assign(S, 1.0 / S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < S; ++s2) {
        const double w = -std::log(1.0 - rng.uniform());
        spec.p(s, a, s2) = w;
        sum += w;
      }
      for (int s2 = 0; s2 < S; ++s2) spec.p(s, a, s2) /= sum;
      // Renormalize exactly so validate()'s 1e-12 row-sum check holds.
      double check = 0.0;
      for (int s2 = 0; s2 < S - 1; ++s2) check += spec.p(s, a, s2);
      spec.p(s, a, S - 1) = 1.0 - check;
      spec.rewards(s, a) = rng.uniform();
    }
  spec.validate();
  return spec;
}

std::string to_instance_file(const MdpSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  os << "kind = mdp\n";
  os << "name = " << spec.name << "\n";
  os << "states = " << spec.S << "\n";
  os << "actions = " << spec.A << "\n";
  os << "gamma = " << spec.gamma << "\n";
  os << "rho =";
  for (double v : spec.rho) os << " " << v;
  os << "\n";
  for (int s = 0; s < spec.S; ++s) {
    os << "r " << s << " =";
    for (int a = 0; a < spec.A; ++a) os << " " << spec.rewards(s, a);
    os << "\n";
  }
  for (int s = 0; s < spec.S; ++s)
    for (int a = 0; a < spec.A; ++a) {
      os << "p " << s << " " << a << " =";
      for (int s2 = 0; s2 < spec.S; ++s2) os << " " << spec.p(s, a, s2);
      os << "\n";
    }
  return os.str();
}

MdpSpec from_instance_file(const std::string& text) {
  MdpSpec spec;
  std::istringstream is(text);
  std::string line;
  const auto values_after_eq = [](const std::string& l) {
    std::vector<double> out;
    const auto eq = l.find('=');
    std::istringstream vs(l.substr(eq + 1));
    double x;
    while (vs >> x) out.push_back(x);
    return out;
  };
  std::vector<std::string> body;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream head(line);
    std::string tag;
    head >> tag;
    if (tag == "kind") {
      if (line.find("mdp") == std::string::npos)
        throw std::invalid_argument("not an mdp instance file");
    } else if (tag == "name") {
      const auto eq = line.find('=');
      std::string v = line.substr(eq + 1);
      const auto b = v.find_first_not_of(" \t\r");
      spec.name = (b == std::string::npos) ? "" : v.substr(b);
      while (!spec.name.empty() && (spec.name.back() == '\r' || spec.name.back() == ' '))
        spec.name.pop_back();
    } else if (tag == "states") {
      spec.S = static_cast<int>(values_after_eq(line)[0]);
    } else if (tag == "actions") {
      spec.A = static_cast<int>(values_after_eq(line)[0]);
    } else if (tag == "gamma") {
      spec.gamma = values_after_eq(line)[0];
    } else if (tag == "rho") {
      spec.rho = values_after_eq(line);
    } else {
      body.push_back(line);
    }
  }
  if (spec.S < 1 || spec.A < 1) throw std::invalid_argument("mdp instance file: missing shape");
  spec.transitions.assign(static_cast<size_t>(spec.S) * spec.A * spec.S, 0.0);
  spec.rewards = Matrix(spec.S, spec.A);
  for (const auto& l : body) {
    std::istringstream head(l);
    std::string tag;
    head >> tag;
    if (tag == "r") {
      int s;
      head >> s;
      const auto v = values_after_eq(l);
      for (int a = 0; a < spec.A; ++a) spec.rewards(s, a) = v[a];
    } else if (tag == "p") {
      int s, a;
      head >> s >> a;
      const auto v = values_after_eq(l);
      for (int s2 = 0; s2 < spec.S; ++s2) spec.p(s, a, s2) = v[s2];
    }
  }
  spec.validate();
  return spec;
}

void save_instance(const MdpSpec& spec, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << to_instance_file(spec);
}

MdpSpec load_instance(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return from_instance_file(buf.str());
}

}  // namespace softpg::mdp
