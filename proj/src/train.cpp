#include "vgecg/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <spdlog/spdlog.h>

namespace vgecg {

AdamOptimizer::AdamOptimizer(const GcnModel& model, double lr, double beta1, double beta2, double epsilon)
    : lr_(lr), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (const auto& l : model.layers()) {
    m_w_.emplace_back(l.weight.size(), 0.0);
    v_w_.emplace_back(l.weight.size(), 0.0);
    m_b_.emplace_back(l.bias.size(), 0.0);
    v_b_.emplace_back(l.bias.size(), 0.0);
  }
}

void AdamOptimizer::step(GcnModel& model, const ModelGrads& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](std::vector<double>& param, const std::vector<double>& grad, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * grad[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * grad[i] * grad[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      param[i] -= lr_ * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
  };
  auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weight.values(), grads.weight[l].values(), m_w_[l], v_w_[l]);
    update(layers[l].bias, grads.bias[l], m_b_[l], v_b_[l]);
  }
}

TrainResult train(GcnModel model, std::span<const BeatGraph> graphs, const TrainConfig& config) {
  if (config.epochs == 0) throw std::invalid_argument("train: epochs must be >= 1");
  if (config.batch_size == 0) throw std::invalid_argument("train: batch size must be >= 1");
  if (graphs.empty()) throw std::invalid_argument("train: no training graphs");

  std::mt19937_64 order_rng(config.seed);
  std::mt19937_64 sample_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  AdamOptimizer adam(model, config.lr, config.beta1, config.beta2, config.epsilon);
  std::vector<std::size_t> order(graphs.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::vector<const BeatGraph*> members;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), order_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      members.clear();
      for (std::size_t i = start; i < stop; ++i) members.push_back(&graphs[order[i]]);
      const GraphBatch batch = make_batch(std::span<const BeatGraph* const>(members));

      ForwardTrace trace;
      const Matrix probs = model.forward(batch, &sample_rng, &trace);
      const double loss = cross_entropy(probs, batch.labels);
      if (!std::isfinite(loss))
        throw TrainingDivergence("loss became " + std::to_string(loss) + " in epoch " + std::to_string(epoch) +
                                 " at batch starting " + std::to_string(start));
      loss_sum += loss * static_cast<double>(batch.num_graphs);
      for (std::size_t i = 0; i < batch.num_graphs; ++i) {
        const auto r = probs.row(i);
        const auto pred = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
        correct += pred == batch.labels[i];
      }
      adam.step(model, model.backward(batch, trace));
    }
    EpochLog entry{epoch, loss_sum / static_cast<double>(graphs.size()),
                   static_cast<double>(correct) / static_cast<double>(graphs.size())};
    spdlog::debug("epoch {:4d} loss {:.6f} acc {:.4f}", entry.epoch, entry.loss, entry.train_accuracy);
    result.log.push_back(entry);
  }
  result.model = std::move(model);
  return result;
}

void write_loss_log_csv(std::ostream& out, std::span<const EpochLog> log) {
  out << "epoch,loss,train_acc\n";
  const auto old = out.precision(17);
  for (const auto& e : log) out << e.epoch << ',' << e.loss << ',' << e.train_accuracy << '\n';
  out.precision(old);
}

std::vector<std::size_t> predict_graphs(const GcnModel& model, std::span<const BeatGraph> graphs,
                                        std::size_t batch_size) {
  std::vector<std::size_t> out;
  out.reserve(graphs.size());
  for (std::size_t start = 0; start < graphs.size(); start += batch_size) {
    const auto chunk = graphs.subspan(start, std::min(batch_size, graphs.size() - start));
    const auto preds = model.predict(make_batch(chunk));
    out.insert(out.end(), preds.begin(), preds.end());
  }
  return out;
}

}  // namespace vgecg
