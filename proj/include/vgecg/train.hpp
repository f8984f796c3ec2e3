#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "vgecg/gnn.hpp"

namespace vgecg {

// Raised when the training loss becomes NaN or infinite.
class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  std::size_t epochs = 150;
  double lr = 0.001;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool shuffle = true;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;            // sample-weighted mean over the epoch
  double train_accuracy = 0.0;  // fraction in [0, 1], from the training forward passes

  bool operator==(const EpochLog&) const = default;
};

// Adam with bias correction over every weight matrix and bias vector.
class AdamOptimizer {
 public:
  AdamOptimizer(const GcnModel& model, double lr, double beta1, double beta2, double epsilon);
  void step(GcnModel& model, const ModelGrads& grads);

 private:
  double lr_, beta1_, beta2_, epsilon_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_w_, v_w_, m_b_, v_b_;
};

struct TrainResult {
  GcnModel model;
  std::vector<EpochLog> log;
};

// Minibatch training in a seeded, fixed batch order on a single thread.
TrainResult train(GcnModel model, std::span<const BeatGraph> graphs, const TrainConfig& config);

void write_loss_log_csv(std::ostream& out, std::span<const EpochLog> log);

// Argmax predictions in input order, evaluated in batches.
std::vector<std::size_t> predict_graphs(const GcnModel& model, std::span<const BeatGraph> graphs,
                                        std::size_t batch_size = 256);

}  // namespace vgecg
