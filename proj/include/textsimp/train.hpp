#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "textsimp/masking_types.hpp"
#include "textsimp/model.hpp"

namespace textsimp {

struct TrainConfig {
    int epochs = 10;
    int batch_size = 4;
    int grad_accum = 4;
    double learning_rate = 5e-5;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    uint64_t seed = 0;
    bool shuffle = true;

    void validate() const;
    std::map<std::string, std::string> to_kv() const;
};

struct LossTrace {
    // one entry per optimizer step: (step number, mean loss of the window)
    std::vector<std::pair<long, double>> steps;
    void write_csv(const std::string& path) const;
};

// Adam over a ParamStore. step() receives gradients of the SUMMED loss
// and the number of prediction targets in the window; the mean-loss
// gradient is grad_sum/targets, so accumulation windows that cover the
// same instances produce bit-identical updates regardless of micro-batch
// split. Parameters are f32-snapped after every update.
class Adam {
public:
    Adam(ParamStore& store, const TrainConfig& tc);
    void step(const std::vector<nn::Mat>& grad_sums, long targets);
    long steps_taken() const { return t_; }

private:
    ParamStore& store_;
    double lr_, beta1_, beta2_, eps_;
    std::vector<nn::Mat> m_, v_;
    long t_ = 0;
};

// Sum-gradient accumulator across micro-batches, aligned with the store's
// tensor order.
class GradBuffer {
public:
    explicit GradBuffer(const ParamStore& store);
    void add(const ParamNodes& nodes);  // += every used node's gradient
    void clear();
    const std::vector<nn::Mat>& sums() const { return sums_; }
    long targets = 0;
    double loss_sum = 0.0;
    int micro_batches = 0;

private:
    std::vector<nn::Mat> sums_;
};

// Generic micro-batch driver shared by every trainable model. items are
// indices 0..n_items-1; the callback builds the summed loss for one
// micro-batch on the given tape and returns (loss node, target count).
// Steps every grad_accum micro-batches, with a flush at each epoch end.
// Item order is reshuffled per epoch from (seed, "order", epoch) when
// shuffle is set. Throws NumericError naming the step on non-finite loss.
using MicroBatchFn =
    std::function<std::pair<nn::Node*, long>(nn::Tape&, ParamNodes&, const std::vector<int>& item_indices, int epoch)>;

void train_loop(ParamStore& store, int n_items, const TrainConfig& tc, const MicroBatchFn& fn,
                LossTrace* trace);

// MLM fine-tuning entry point. The provider supplies the epoch's
// instances (enabling fresh mask draws per epoch); the count must stay
// constant across epochs.
using EpochProvider = std::function<const std::vector<MaskedInstance>&(int epoch)>;

ModelParams train_mlm(ModelParams params, const EpochProvider& provider, const TrainConfig& tc,
                      LossTrace* trace = nullptr);
ModelParams train_mlm(ModelParams params, const std::vector<MaskedInstance>& instances,
                      const TrainConfig& tc, LossTrace* trace = nullptr);

}  // namespace textsimp
