#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavris/mdp_env.hpp"

namespace uavris::dqn {

/// Raised when a training step produces a non-finite loss or the loop cannot
/// continue; the message carries episode/step context.
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Activation { relu, tanh };
const char* to_string(Activation a);

enum class Optimizer { sgd, adam };

/// Fully-connected trunk with a scalar value head and a per-action advantage
/// head. Q(s, a) = V(s) + A(s, a) - mean_a' A(s, a'): the mean-centering makes
/// the two heads identifiable.
struct QNetwork {
  std::vector<Eigen::MatrixXd> w;  // trunk weights, layer k: widths[k+1] x widths[k]
  std::vector<Eigen::VectorXd> b;
  Eigen::MatrixXd wv;  // value head, 1 x last width
  Eigen::VectorXd bv;
  Eigen::MatrixXd wa;  // advantage head, actions x last width
  Eigen::VectorXd ba;
  Activation act = Activation::relu;

  int input_dim() const { return w.empty() ? (int)wa.cols() : (int)w.front().cols(); }
  int num_actions() const { return (int)wa.rows(); }
};

/// Scaled-uniform initialization; widths default to {128, 64, 32, 32} via
/// DqnHyperparams.
QNetwork make_network(int input, const std::vector<int>& hidden, int num_actions,
                      Activation act, Rng& rng);

/// Q-values, one per action.
Eigen::VectorXd forward(const QNetwork& net, const Eigen::VectorXd& s);

/// Argmax over forward(); ties break to the lowest action index.
int greedy_action(const QNetwork& net, const Eigen::VectorXd& s);

bool same_parameters(const QNetwork& a, const QNetwork& b, double tol = 0.0);

struct DqnHyperparams {
  double gamma = 0.9;          // discount, in [0, 1)
  double learning_rate = 0.01;  // gradient-descent rate
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  long epsilon_decay_steps = 0;  // 0: linear decay over the first half of training
  int replay_capacity = 2000;
  int batch_size = 32;
  int target_replace = 20;  // copy online -> target every this many environment steps
  int episodes = 40;
  int steps_per_episode = 0;  // 0: the environment's own horizon
  std::vector<int> hidden{128, 64, 32, 32};
  Activation activation = Activation::relu;
  Optimizer optimizer = Optimizer::sgd;
  double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;

  void validate() const;  // throws ConfigError
  double epsilon_at(long global_step, long horizon_steps) const;
};

/// One stored experience of a single agent: encoded endpoint states, that
/// agent's action index, the shared reward, and whether the episode ended.
struct Experience {
  Eigen::VectorXd s;
  long action = 0;
  double reward = 0.0;
  Eigen::VectorXd next;
  bool terminal = false;
};

/// Fixed-capacity ring; once full, each push evicts the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);
  void push(Experience e);
  int size() const { return (int)buf_.size(); }
  int capacity() const { return cap_; }
  long total_pushes() const { return pushes_; }
  /// Chronological access: index 0 is the oldest entry still stored.
  const Experience& at(int i) const;
  /// Uniform sample of `batch` distinct chronological indices.
  std::vector<int> sample_indices(int batch, Rng& rng) const;

 private:
  std::vector<Experience> buf_;
  int cap_ = 0;
  long pushes_ = 0;
};

/// r + gamma * max_a Q_target(s', a), or just r on terminal transitions.
double td_target(double reward, const Eigen::VectorXd& next, const QNetwork& target,
                 double gamma, bool terminal);

/// Numeric mini-batch for one gradient step.
struct Batch {
  std::vector<Eigen::VectorXd> s;
  std::vector<int> a;      // action whose Q-value is regressed
  std::vector<double> y;   // TD targets
};

/// First/second-moment accumulators for the adaptive-moment optimizer,
/// mirroring the network's parameter list.
struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  Eigen::MatrixXd mwv, vwv, mwa, vwa;
  Eigen::VectorXd mbv, vbv, mba, vba;
  long t = 0;
};

/// Mean-squared TD error over the batch; applies one descent update in place
/// and returns the pre-update loss. Throws TrainingError on a non-finite loss.
/// `adam` must be non-null when opt == Optimizer::adam.
double train_step(QNetwork& net, const Batch& batch, double learning_rate, Optimizer opt,
                  const DqnHyperparams& hp, AdamState* adam = nullptr);

/// Environment surface the trainer drives: encoded observations in, joint
/// action indices out. Implementations own their episode state.
class TrainEnv {
 public:
  virtual ~TrainEnv() = default;
  virtual int num_agents() const = 0;
  virtual long num_actions() const = 0;
  virtual int encoded_dim() const = 0;
  virtual int horizon() const = 0;  // steps per episode
  struct Outcome {
    Eigen::VectorXd next;
    double reward = 0.0;
    double p_total_w = 0.0;  // NaN when the step has no power reading
    bool feasible = false;
  };
  virtual Eigen::VectorXd reset(int episode) = 0;
  virtual Outcome step(const std::vector<long>& actions) = 0;
};

/// Number of observation features fed to the networks.
inline constexpr int kEncodedDim = 32;

/// Deterministic fixed-width observation: normalized agent coordinates, then
/// log-compressed serving-link gains per small-cell user, then log-compressed
/// cascade gains per (carrier, scheduled user), then the slot fraction,
/// zero-padded or truncated to exactly kEncodedDim entries. Finite for any
/// finite (even all-zero) geometry.
Eigen::VectorXd encode_state(const EnvState& state, const NetworkConfig& cfg);

/// Adapter running the slot simulator as a TrainEnv.
class SimulatorTrainEnv : public TrainEnv {
 public:
  explicit SimulatorTrainEnv(Environment& env);
  int num_agents() const override;
  long num_actions() const override;
  int encoded_dim() const override { return kEncodedDim; }
  int horizon() const override;
  Eigen::VectorXd reset(int episode) override;
  Outcome step(const std::vector<long>& actions) override;

 private:
  Environment& env_;
  EnvState state_;
};

struct EpisodeStats {
  int episode = 0;
  double mean_reward = 0.0;
  double mean_p_total_w = 0.0;  // over feasible steps; NaN when none
  double epsilon = 0.0;
  double mean_loss = 0.0;  // over trained steps; NaN before training starts
};

struct StepEvent {
  int episode = 0;
  int step = 0;
  long global_step = 0;  // counts completed environment steps, starting at 1
  double epsilon = 0.0;
  double reward = 0.0;
  bool trained = false;
  bool target_replaced = false;
  const std::vector<long>* actions = nullptr;
  const std::vector<QNetwork>* online = nullptr;
  const std::vector<QNetwork>* target = nullptr;
};

struct TrainingResult {
  std::vector<QNetwork> policies;  // final online networks, one per agent
  std::vector<EpisodeStats> history;
  long global_steps = 0;
  long trained_steps = 0;
};

/// Independent Q-learning over the shared environment: every agent owns its
/// network, target copy, and replay ring; actions are epsilon-greedy; one
/// gradient step per agent per environment step once a batch is available;
/// targets refresh every `target_replace` steps. Environment failures are
/// rethrown as TrainingError with episode/step context.
TrainingResult run_training(TrainEnv& env, const DqnHyperparams& hp, std::uint64_t seed,
                            const std::function<void(const StepEvent&)>& on_step = {});

/// `episode,mean_reward,mean_p_total_dbm,epsilon,mean_loss` rows.
void write_training_csv(std::ostream& out, const std::vector<EpisodeStats>& history);

/// Versioned text checkpoint of all agents' networks; exact round-trip.
void save_checkpoint(std::ostream& out, const std::vector<QNetwork>& nets);
std::vector<QNetwork> load_checkpoint(std::istream& in);

/// Explicit finite MDP with deterministic transitions, for reference-mode
/// learning and oracle comparisons.
struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  std::vector<std::vector<int>> next;      // [s][a]
  std::vector<std::vector<double>> reward;  // [s][a]
};

/// Reference mode: asynchronous one-step Q-updates on uniformly sampled
/// (state, action) pairs. Returns the learned Q table (states x actions).
Eigen::MatrixXd tabular_q_learning(const TabularMdp& mdp, double gamma, double alpha,
                                   long updates, Rng& rng);

}  // namespace uavris::dqn
