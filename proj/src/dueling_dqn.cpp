#include "uavris/dueling_dqn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace uavris::dqn {

const char* to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

namespace {

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw ValidationError("checkpoint: unknown activation '" + name + "'");
}

Eigen::VectorXd apply_act(Activation act, const Eigen::VectorXd& z) {
  if (act == Activation::relu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

// Derivative written in terms of the activation output.
Eigen::VectorXd act_grad_from_output(Activation act, const Eigen::VectorXd& h) {
  if (act == Activation::relu)
    return (h.array() > 0.0).cast<double>().matrix();
  return (1.0 - h.array().square()).matrix();
}

struct ForwardCache {
  std::vector<Eigen::VectorXd> h;  // h[0] = input, h[k+1] = trunk output k
  Eigen::VectorXd adv;
  double value = 0.0;
  Eigen::VectorXd q;
};

void forward_cached(const QNetwork& net, const Eigen::VectorXd& s, ForwardCache& c) {
  if (s.size() != net.input_dim())
    throw ValidationError("q-network: input width mismatch");
  c.h.assign(1, s);
  for (size_t k = 0; k < net.w.size(); ++k)
    c.h.push_back(apply_act(net.act, net.w[k] * c.h.back() + net.b[k]));
  const Eigen::VectorXd& top = c.h.back();
  c.value = (net.wv * top + net.bv)(0);
  c.adv = net.wa * top + net.ba;
  c.q = (c.adv.array() - c.adv.mean() + c.value).matrix();
}

/// Gradient mirror of a network's parameters.
struct Grads {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
  Eigen::MatrixXd wv, wa;
  Eigen::VectorXd bv, ba;

  explicit Grads(const QNetwork& net) {
    for (size_t k = 0; k < net.w.size(); ++k) {
      w.push_back(Eigen::MatrixXd::Zero(net.w[k].rows(), net.w[k].cols()));
      b.push_back(Eigen::VectorXd::Zero(net.b[k].size()));
    }
    wv = Eigen::MatrixXd::Zero(net.wv.rows(), net.wv.cols());
    bv = Eigen::VectorXd::Zero(net.bv.size());
    wa = Eigen::MatrixXd::Zero(net.wa.rows(), net.wa.cols());
    ba = Eigen::VectorXd::Zero(net.ba.size());
  }
};

// Accumulates d(loss)/d(params) for one sample given d(loss)/dQ[a] = g.
void backward_sample(const QNetwork& net, const ForwardCache& c, int a, double g, Grads& gr) {
  const int na = net.num_actions();
  const double dv = g;  // dQ/dV = 1
  Eigen::VectorXd dadv = Eigen::VectorXd::Constant(na, -g / na);
  dadv(a) += g;  // dQ[a]/dA = e_a - 1/na

  const Eigen::VectorXd& top = c.h.back();
  gr.wv.row(0) += dv * top.transpose();
  gr.bv(0) += dv;
  gr.wa += dadv * top.transpose();
  gr.ba += dadv;

  Eigen::VectorXd dh = net.wv.transpose() * dv + net.wa.transpose() * dadv;
  for (int k = (int)net.w.size() - 1; k >= 0; --k) {
    const Eigen::VectorXd dz =
        dh.cwiseProduct(act_grad_from_output(net.act, c.h[(size_t)k + 1]));
    gr.w[k] += dz * c.h[(size_t)k].transpose();
    gr.b[k] += dz;
    dh = net.w[k].transpose() * dz;
  }
}

void ensure_adam(AdamState& st, const QNetwork& net) {
  if (!st.mw.empty()) return;
  for (size_t k = 0; k < net.w.size(); ++k) {
    st.mw.push_back(Eigen::MatrixXd::Zero(net.w[k].rows(), net.w[k].cols()));
    st.vw.push_back(Eigen::MatrixXd::Zero(net.w[k].rows(), net.w[k].cols()));
    st.mb.push_back(Eigen::VectorXd::Zero(net.b[k].size()));
    st.vb.push_back(Eigen::VectorXd::Zero(net.b[k].size()));
  }
  st.mwv = Eigen::MatrixXd::Zero(net.wv.rows(), net.wv.cols());
  st.vwv = st.mwv;
  st.mwa = Eigen::MatrixXd::Zero(net.wa.rows(), net.wa.cols());
  st.vwa = st.mwa;
  st.mbv = Eigen::VectorXd::Zero(net.bv.size());
  st.vbv = st.mbv;
  st.mba = Eigen::VectorXd::Zero(net.ba.size());
  st.vba = st.mba;
}

template <typename P, typename G>
void adam_update(P& param, G& m, G& v, const G& grad, double lr, const DqnHyperparams& hp,
                 long t) {
  m = hp.adam_beta1 * m + (1.0 - hp.adam_beta1) * grad;
  v = hp.adam_beta2 * v.array().matrix() +
      (1.0 - hp.adam_beta2) * grad.array().square().matrix();
  const double c1 = 1.0 - std::pow(hp.adam_beta1, (double)t);
  const double c2 = 1.0 - std::pow(hp.adam_beta2, (double)t);
  param.array() -=
      lr * (m.array() / c1) / ((v.array() / c2).sqrt() + hp.adam_eps);
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  out << m.rows() << " " << m.cols();
  char buf[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%a", m(r, c));
      out << " " << buf;
    }
  out << "\n";
}

Eigen::MatrixXd read_matrix(std::istream& in) {
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0)
    throw ValidationError("checkpoint: bad matrix header");
  Eigen::MatrixXd m(rows, cols);
  std::string tok;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!(in >> tok)) throw ValidationError("checkpoint: truncated matrix");
      m(r, c) = std::strtod(tok.c_str(), nullptr);
    }
  return m;
}

}  // namespace

QNetwork make_network(int input, const std::vector<int>& hidden, int num_actions,
                      Activation act, Rng& rng) {
  if (input < 1 || num_actions < 1)
    throw ConfigError("q-network: input and action counts must be positive");
  for (int hwidth : hidden)
    if (hwidth < 1) throw ConfigError("q-network: hidden widths must be positive");
  QNetwork net;
  net.act = act;
  auto init = [&rng](int rows, int cols) {
    const double lim = std::sqrt(6.0 / (rows + cols));
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-lim, lim);
    return m;
  };
  int prev = input;
  for (int hwidth : hidden) {
    net.w.push_back(init(hwidth, prev));
    net.b.push_back(Eigen::VectorXd::Zero(hwidth));
    prev = hwidth;
  }
  net.wv = init(1, prev);
  net.bv = Eigen::VectorXd::Zero(1);
  net.wa = init(num_actions, prev);
  net.ba = Eigen::VectorXd::Zero(num_actions);
  return net;
}

Eigen::VectorXd forward(const QNetwork& net, const Eigen::VectorXd& s) {
  ForwardCache c;
  forward_cached(net, s, c);
  return c.q;
}

int greedy_action(const QNetwork& net, const Eigen::VectorXd& s) {
  const Eigen::VectorXd q = forward(net, s);
  int best = 0;
  for (int a = 1; a < q.size(); ++a)
    if (q(a) > q(best)) best = a;
  return best;
}

bool same_parameters(const QNetwork& a, const QNetwork& b, double tol) {
  auto eq = [tol](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() &&
           ((x - y).cwiseAbs().maxCoeff() <= tol || x.size() == 0);
  };
  if (a.w.size() != b.w.size()) return false;
  for (size_t k = 0; k < a.w.size(); ++k)
    if (!eq(a.w[k], b.w[k]) || !eq(a.b[k], b.b[k])) return false;
  return eq(a.wv, b.wv) && eq(a.bv, b.bv) && eq(a.wa, b.wa) && eq(a.ba, b.ba);
}

void DqnHyperparams::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("hyperparams: gamma must be in [0,1)");
  if (!(learning_rate > 0.0)) throw ConfigError("hyperparams: learning rate must be positive");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 &&
        epsilon_end <= 1.0))
    throw ConfigError("hyperparams: epsilon bounds must lie in [0,1]");
  if (replay_capacity < 1) throw ConfigError("hyperparams: replay capacity must be positive");
  if (batch_size < 1 || batch_size > replay_capacity)
    throw ConfigError("hyperparams: batch size must fit the replay capacity");
  if (target_replace < 1)
    throw ConfigError("hyperparams: target replace frequency must be positive");
  if (episodes < 1) throw ConfigError("hyperparams: need at least one episode");
  if (steps_per_episode < 0) throw ConfigError("hyperparams: steps per episode cannot be negative");
}

double DqnHyperparams::epsilon_at(long global_step, long horizon_steps) const {
  long decay = epsilon_decay_steps > 0 ? epsilon_decay_steps : horizon_steps / 2;
  if (decay < 1) decay = 1;
  const double f = std::min(1.0, (double)global_step / (double)decay);
  return epsilon_start + (epsilon_end - epsilon_start) * f;
}

ReplayBuffer::ReplayBuffer(int capacity) : cap_(capacity) {
  if (capacity < 1) throw ConfigError("replay buffer: capacity must be positive");
  buf_.reserve((size_t)capacity);
}

void ReplayBuffer::push(Experience e) {
  if ((int)buf_.size() < cap_) {
    buf_.push_back(std::move(e));
  } else {
    buf_[(size_t)(pushes_ % cap_)] = std::move(e);
  }
  ++pushes_;
}

const Experience& ReplayBuffer::at(int i) const {
  if (i < 0 || i >= (int)buf_.size())
    throw ValidationError("replay buffer: index out of range");
  if ((int)buf_.size() < cap_) return buf_[(size_t)i];  // not yet wrapped
  return buf_[(size_t)((pushes_ + i) % cap_)];          // pushes_ % cap_ is the oldest slot
}

std::vector<int> ReplayBuffer::sample_indices(int batch, Rng& rng) const {
  if (batch > (int)buf_.size())
    throw ValidationError("replay buffer: batch exceeds stored entries");
  // Partial Fisher-Yates over the index range: uniform without replacement.
  std::vector<int> idx((size_t)buf_.size());
  for (int i = 0; i < (int)idx.size(); ++i) idx[(size_t)i] = i;
  for (int i = 0; i < batch; ++i)
    std::swap(idx[(size_t)i], idx[(size_t)rng.uniform_int(i, (int)idx.size() - 1)]);
  idx.resize((size_t)batch);
  return idx;
}

double td_target(double reward, const Eigen::VectorXd& next, const QNetwork& target,
                 double gamma, bool terminal) {
  if (terminal || gamma == 0.0) return reward;
  return reward + gamma * forward(target, next).maxCoeff();
}

double train_step(QNetwork& net, const Batch& batch, double learning_rate, Optimizer opt,
                  const DqnHyperparams& hp, AdamState* adam) {
  const int n = (int)batch.s.size();
  if (n == 0 || (int)batch.a.size() != n || (int)batch.y.size() != n)
    throw ValidationError("train step: batch fields must be non-empty and aligned");
  Grads gr(net);
  double loss = 0.0;
  ForwardCache c;
  for (int i = 0; i < n; ++i) {
    forward_cached(net, batch.s[(size_t)i], c);
    const int a = batch.a[(size_t)i];
    if (a < 0 || a >= net.num_actions())
      throw ValidationError("train step: action index out of range");
    const double err = c.q(a) - batch.y[(size_t)i];
    loss += err * err / n;
    backward_sample(net, c, a, 2.0 * err / n, gr);
  }
  if (!std::isfinite(loss)) {
    std::ostringstream os;
    os << "train step: non-finite loss " << loss << " over a batch of " << n;
    throw TrainingError(os.str());
  }
  if (opt == Optimizer::sgd) {
    for (size_t k = 0; k < net.w.size(); ++k) {
      net.w[k] -= learning_rate * gr.w[k];
      net.b[k] -= learning_rate * gr.b[k];
    }
    net.wv -= learning_rate * gr.wv;
    net.bv -= learning_rate * gr.bv;
    net.wa -= learning_rate * gr.wa;
    net.ba -= learning_rate * gr.ba;
  } else {
    if (adam == nullptr) throw ConfigError("train step: adaptive mode needs moment state");
    ensure_adam(*adam, net);
    ++adam->t;
    for (size_t k = 0; k < net.w.size(); ++k) {
      adam_update(net.w[k], adam->mw[k], adam->vw[k], gr.w[k], learning_rate, hp, adam->t);
      adam_update(net.b[k], adam->mb[k], adam->vb[k], gr.b[k], learning_rate, hp, adam->t);
    }
    adam_update(net.wv, adam->mwv, adam->vwv, gr.wv, learning_rate, hp, adam->t);
    adam_update(net.bv, adam->mbv, adam->vbv, gr.bv, learning_rate, hp, adam->t);
    adam_update(net.wa, adam->mwa, adam->vwa, gr.wa, learning_rate, hp, adam->t);
    adam_update(net.ba, adam->mba, adam->vba, gr.ba, learning_rate, hp, adam->t);
  }
  return loss;
}

Eigen::VectorXd encode_state(const EnvState& state, const NetworkConfig& cfg) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(kEncodedDim);
  int idx = 0;
  auto push = [&f, &idx](double val) {
    if (idx < kEncodedDim) f(idx++) = val;
  };
  auto span_norm = [](double v, double lo, double hi) {
    return hi > lo ? (v - lo) / (hi - lo) : 0.0;
  };
  // Log-compress link gains (typical magnitudes 1e-16..1e-3) into [0, 1].
  auto logmap = [](double v) {
    return std::clamp((std::log10(v + 1e-30) + 30.0) / 30.0, 0.0, 1.0);
  };
  const GridSpec& g = cfg.grid;
  for (const Position& q : state.uav_positions) {
    push(span_norm(q.x, g.x_min, g.x_max));
    push(span_norm(q.y, g.y_min, g.y_max));
    push(span_norm(q.z, g.h_min, g.h_max));
  }
  const ChannelSet& cs = state.channels;
  for (int j = 0; j < cs.num_sbs; ++j)
    for (int i = 0; i < cs.num_sues / std::max(1, cs.num_sbs); ++i) {
      double mean = 0.0;
      for (int l = 0; l < cs.mmw_subcarriers; ++l)
        mean += cs.h(l, j, j * (cs.num_sues / std::max(1, cs.num_sbs)) + i).norm();
      push(logmap(mean / std::max(1, cs.mmw_subcarriers)));
    }
  for (int x = 0; x < cs.muw_subcarriers; ++x)
    for (int m = 0; m < cs.num_mues; ++m) {
      double cascade = 0.0;
      for (int u = 0; u < cs.num_uav; ++u)
        cascade += cs.g_mbs_ris(x, u).norm() * cs.g_ris_mue(x, u, m).norm();
      push(logmap(cascade));
    }
  push((double)state.slot / std::max(1, cfg.num_slots));
  return f;
}

SimulatorTrainEnv::SimulatorTrainEnv(Environment& env) : env_(env) {}

int SimulatorTrainEnv::num_agents() const { return env_.config().num_uav; }

long SimulatorTrainEnv::num_actions() const { return env_.action_space().total(); }

int SimulatorTrainEnv::horizon() const { return env_.config().num_slots; }

Eigen::VectorXd SimulatorTrainEnv::reset(int episode) {
  state_ = env_.reset(episode);
  return encode_state(state_, env_.config());
}

TrainEnv::Outcome SimulatorTrainEnv::step(const std::vector<long>& actions) {
  std::vector<Action> acts(actions.size());
  for (size_t u = 0; u < actions.size(); ++u)
    acts[u] = env_.action_space().decode(actions[u]);
  StepResult r = env_.step(state_, acts);
  state_ = r.next;
  Outcome out;
  out.next = encode_state(state_, env_.config());
  out.reward = r.reward;
  const bool feasible = r.inner.status != sca::ScaStatus::infeasible;
  out.feasible = feasible;
  out.p_total_w = feasible ? r.inner.p_total_w : std::numeric_limits<double>::quiet_NaN();
  return out;
}

TrainingResult run_training(TrainEnv& env, const DqnHyperparams& hp, std::uint64_t seed,
                            const std::function<void(const StepEvent&)>& on_step) {
  hp.validate();
  const int agents = env.num_agents();
  const long num_actions = env.num_actions();
  const int steps = hp.steps_per_episode > 0 ? hp.steps_per_episode : env.horizon();
  if (agents < 1 || num_actions < 1 || steps < 1)
    throw ConfigError("training: environment must expose agents, actions, and a horizon");
  const long horizon_steps = (long)hp.episodes * steps;

  std::vector<QNetwork> online, target;
  std::vector<ReplayBuffer> buffers;
  std::vector<AdamState> adam(agents);
  std::vector<Rng> sample_rng;
  for (int u = 0; u < agents; ++u) {
    Rng init_rng(derive_seed(seed, (std::uint64_t)u, 0x171));
    online.push_back(make_network(env.encoded_dim(), hp.hidden, (int)num_actions,
                                  hp.activation, init_rng));
    target.push_back(online.back());
    buffers.emplace_back(hp.replay_capacity);
    sample_rng.emplace_back(derive_seed(seed, (std::uint64_t)u, 0x5a3));
  }
  Rng act_rng(derive_seed(seed, 0xac7));

  TrainingResult result;
  for (int ep = 0; ep < hp.episodes; ++ep) {
    Eigen::VectorXd s;
    try {
      s = env.reset(ep);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "episode " << ep << ": reset failed: " << e.what();
      throw TrainingError(os.str());
    }
    double reward_sum = 0.0, p_sum = 0.0, loss_sum = 0.0, eps = hp.epsilon_start;
    int p_count = 0, loss_count = 0;
    for (int t = 0; t < steps; ++t) {
      eps = hp.epsilon_at(result.global_steps, horizon_steps);
      std::vector<long> actions((size_t)agents);
      for (int u = 0; u < agents; ++u) {
        actions[(size_t)u] = act_rng.uniform() < eps
                                 ? (long)act_rng.uniform_int(0, (int)num_actions - 1)
                                 : (long)greedy_action(online[(size_t)u], s);
      }
      TrainEnv::Outcome out;
      try {
        out = env.step(actions);
      } catch (const std::exception& e) {
        std::ostringstream os;
        os << "episode " << ep << " step " << t << ": " << e.what();
        throw TrainingError(os.str());
      }
      const bool terminal = (t == steps - 1);
      for (int u = 0; u < agents; ++u)
        buffers[(size_t)u].push(
            Experience{s, actions[(size_t)u], out.reward, out.next, terminal});

      bool trained = false;
      if (buffers[0].size() >= hp.batch_size) {
        for (int u = 0; u < agents; ++u) {
          Batch batch;
          for (int i : buffers[(size_t)u].sample_indices(hp.batch_size, sample_rng[(size_t)u])) {
            const Experience& e = buffers[(size_t)u].at(i);
            batch.s.push_back(e.s);
            batch.a.push_back((int)e.action);
            batch.y.push_back(
                td_target(e.reward, e.next, target[(size_t)u], hp.gamma, e.terminal));
          }
          try {
            loss_sum += train_step(online[(size_t)u], batch, hp.learning_rate, hp.optimizer,
                                   hp, &adam[(size_t)u]);
          } catch (const TrainingError& e) {
            std::ostringstream os;
            os << "episode " << ep << " step " << t << " agent " << u << ": " << e.what();
            throw TrainingError(os.str());
          }
          ++loss_count;
        }
        trained = true;
        ++result.trained_steps;
      }
      ++result.global_steps;
      bool replaced = false;
      if (result.global_steps % hp.target_replace == 0) {
        for (int u = 0; u < agents; ++u) target[(size_t)u] = online[(size_t)u];
        replaced = true;
      }
      reward_sum += out.reward;
      if (out.feasible && std::isfinite(out.p_total_w)) {
        p_sum += out.p_total_w;
        ++p_count;
      }
      if (on_step) {
        StepEvent ev;
        ev.episode = ep;
        ev.step = t;
        ev.global_step = result.global_steps;
        ev.epsilon = eps;
        ev.reward = out.reward;
        ev.trained = trained;
        ev.target_replaced = replaced;
        ev.actions = &actions;
        ev.online = &online;
        ev.target = &target;
        on_step(ev);
      }
      s = out.next;
    }
    EpisodeStats st;
    st.episode = ep;
    st.mean_reward = reward_sum / steps;
    st.mean_p_total_w =
        p_count > 0 ? p_sum / p_count : std::numeric_limits<double>::quiet_NaN();
    st.epsilon = eps;
    st.mean_loss =
        loss_count > 0 ? loss_sum / loss_count : std::numeric_limits<double>::quiet_NaN();
    result.history.push_back(st);
  }
  result.policies = std::move(online);
  return result;
}

void write_training_csv(std::ostream& out, const std::vector<EpisodeStats>& history) {
  out << "episode,mean_reward,mean_p_total_dbm,epsilon,mean_loss\n";
  for (const EpisodeStats& st : history) {
    const double dbm = st.mean_p_total_w > 0.0 && std::isfinite(st.mean_p_total_w)
                           ? watts_to_dbm(st.mean_p_total_w)
                           : std::numeric_limits<double>::quiet_NaN();
    out << st.episode << "," << st.mean_reward << "," << dbm << "," << st.epsilon << ","
        << st.mean_loss << "\n";
  }
}

void save_checkpoint(std::ostream& out, const std::vector<QNetwork>& nets) {
  out << "uavris-qnet 1\n" << nets.size() << "\n";
  for (const QNetwork& net : nets) {
    out << to_string(net.act) << " " << net.w.size() << "\n";
    for (size_t k = 0; k < net.w.size(); ++k) {
      write_matrix(out, net.w[k]);
      write_matrix(out, net.b[k]);
    }
    write_matrix(out, net.wv);
    write_matrix(out, net.bv);
    write_matrix(out, net.wa);
    write_matrix(out, net.ba);
  }
}

std::vector<QNetwork> load_checkpoint(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "uavris-qnet" || version != 1)
    throw ValidationError("checkpoint: unrecognized header");
  size_t count = 0;
  if (!(in >> count)) throw ValidationError("checkpoint: missing network count");
  std::vector<QNetwork> nets;
  for (size_t i = 0; i < count; ++i) {
    std::string act;
    size_t layers = 0;
    if (!(in >> act >> layers)) throw ValidationError("checkpoint: truncated network header");
    QNetwork net;
    net.act = activation_from_name(act);
    for (size_t k = 0; k < layers; ++k) {
      net.w.push_back(read_matrix(in));
      net.b.push_back(read_matrix(in).col(0));
    }
    net.wv = read_matrix(in);
    net.bv = read_matrix(in).col(0);
    net.wa = read_matrix(in);
    net.ba = read_matrix(in).col(0);
    nets.push_back(std::move(net));
  }
  return nets;
}

Eigen::MatrixXd tabular_q_learning(const TabularMdp& mdp, double gamma, double alpha,
                                   long updates, Rng& rng) {
  if (mdp.num_states < 1 || mdp.num_actions < 1)
    throw ConfigError("tabular mode: state and action counts must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ConfigError("tabular mode: gamma must be in [0,1)");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(mdp.num_states, mdp.num_actions);
  for (long k = 0; k < updates; ++k) {
    const int s = rng.uniform_int(0, mdp.num_states - 1);
    const int a = rng.uniform_int(0, mdp.num_actions - 1);
    const int s2 = mdp.next.at((size_t)s).at((size_t)a);
    const double target = mdp.reward.at((size_t)s).at((size_t)a) + gamma * q.row(s2).maxCoeff();
    q(s, a) += alpha * (target - q(s, a));
  }
  return q;
}

}  // namespace uavris::dqn
