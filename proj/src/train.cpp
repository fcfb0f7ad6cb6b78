#include "textsimp/train.hpp"

#include <cmath>
#include <fstream>

#include "textsimp/errors.hpp"
#include "textsimp/rng.hpp"

namespace textsimp {

void TrainConfig::validate() const {
    if (epochs < 0) throw UsageError("epochs must be >= 0");
    if (batch_size < 1) throw UsageError("batch_size must be >= 1");
    if (grad_accum < 1) throw UsageError("grad_accum must be >= 1");
    if (learning_rate <= 0.0) throw UsageError("learning_rate must be positive");
    if (adam_eps <= 0.0) throw UsageError("adam_eps must be positive");
    if (adam_beta1 <= 0.0 || adam_beta1 >= 1.0 || adam_beta2 <= 0.0 || adam_beta2 >= 1.0)
        throw UsageError("adam betas must lie in (0,1)");
}

std::map<std::string, std::string> TrainConfig::to_kv() const {
    return {
        {"epochs", std::to_string(epochs)},
        {"batch_size", std::to_string(batch_size)},
        {"grad_accum", std::to_string(grad_accum)},
        {"learning_rate", std::to_string(learning_rate)},
        {"adam_beta1", std::to_string(adam_beta1)},
        {"adam_beta2", std::to_string(adam_beta2)},
        {"adam_eps", std::to_string(adam_eps)},
        {"seed", std::to_string(seed)},
        {"shuffle", shuffle ? "1" : "0"},
    };
}

void LossTrace::write_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "step,loss\n";
    for (const auto& [step, loss] : steps) out << step << "," << loss << "\n";
    if (!out) throw IoError("write failed: " + path);
}

Adam::Adam(ParamStore& store, const TrainConfig& tc)
    : store_(store),
      lr_(tc.learning_rate),
      beta1_(tc.adam_beta1),
      beta2_(tc.adam_beta2),
      eps_(tc.adam_eps) {
    for (const ParamTensor& t : store.tensors()) {
        m_.emplace_back(t.value.rows, t.value.cols);
        v_.emplace_back(t.value.rows, t.value.cols);
    }
}

void Adam::step(const std::vector<nn::Mat>& grad_sums, long targets) {
    if (targets <= 0) throw UsageError("optimizer step with no prediction targets");
    ++t_;
    const double inv = 1.0 / static_cast<double>(targets);
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < grad_sums.size(); ++i) {
        nn::Mat& theta = store_.tensors()[i].value;
        for (size_t j = 0; j < theta.size(); ++j) {
            const double g = grad_sums[i].a[j] * inv;
            m_[i].a[j] = beta1_ * m_[i].a[j] + (1.0 - beta1_) * g;
            v_[i].a[j] = beta2_ * v_[i].a[j] + (1.0 - beta2_) * g * g;
            const double mhat = m_[i].a[j] / bc1;
            const double vhat = v_[i].a[j] / bc2;
            theta.a[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
    store_.snap_f32();
}

GradBuffer::GradBuffer(const ParamStore& store) {
    for (const ParamTensor& t : store.tensors()) sums_.emplace_back(t.value.rows, t.value.cols);
}

void GradBuffer::add(const ParamNodes& nodes) {
    for (const auto& [index, node] : nodes.used()) {
        nn::Mat& dst = sums_[index];
        for (size_t j = 0; j < dst.size(); ++j) dst.a[j] += node->grad.a[j];
    }
}

void GradBuffer::clear() {
    for (nn::Mat& m : sums_)
        for (double& v : m.a) v = 0.0;
    targets = 0;
    loss_sum = 0.0;
    micro_batches = 0;
}

void train_loop(ParamStore& store, int n_items, const TrainConfig& tc, const MicroBatchFn& fn,
                LossTrace* trace) {
    tc.validate();
    if (n_items < 1) throw UsageError("nothing to train on");

    Adam adam(store, tc);
    GradBuffer buffer(store);

    std::vector<int> order(n_items);
    for (int i = 0; i < n_items; ++i) order[i] = i;

    const auto flush = [&]() {
        if (buffer.micro_batches == 0) return;
        adam.step(buffer.sums(), buffer.targets);
        if (trace != nullptr)
            trace->steps.emplace_back(adam.steps_taken(),
                                      buffer.loss_sum / static_cast<double>(buffer.targets));
        buffer.clear();
    };

    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        if (tc.shuffle) {
            for (int i = 0; i < n_items; ++i) order[i] = i;
            Rng rng(derive_seed(tc.seed, "order", static_cast<uint64_t>(epoch)));
            rng.shuffle(order);
        }
        for (int start = 0; start < n_items; start += tc.batch_size) {
            const int end = std::min(start + tc.batch_size, n_items);
            const std::vector<int> batch(order.begin() + start, order.begin() + end);

            nn::Tape tape;
            ParamNodes pn(tape, store);
            const auto [loss, targets] = fn(tape, pn, batch, epoch);
            const double loss_value = loss->val.at(0, 0);
            if (!std::isfinite(loss_value))
                throw NumericError("non-finite loss at optimizer step " +
                                   std::to_string(adam.steps_taken() + 1) + " (epoch " +
                                   std::to_string(epoch) + ")");
            tape.backward(loss);
            buffer.add(pn);
            buffer.targets += targets;
            buffer.loss_sum += loss_value;
            ++buffer.micro_batches;
            if (buffer.micro_batches == tc.grad_accum) flush();
        }
        flush();  // epoch boundary: step on whatever accumulated
    }
}

ModelParams train_mlm(ModelParams params, const EpochProvider& provider, const TrainConfig& tc,
                      LossTrace* trace) {
    const std::vector<MaskedInstance>& first = provider(0);
    if (first.empty()) throw UsageError("no training instances");
    const int n_items = static_cast<int>(first.size());

    int cached_epoch = 0;
    const std::vector<MaskedInstance>* cached = &first;

    train_loop(
        params.store, n_items, tc,
        [&](nn::Tape& tape, ParamNodes& pn, const std::vector<int>& items, int epoch) {
            if (epoch != cached_epoch) {
                cached = &provider(epoch);
                cached_epoch = epoch;
                if (static_cast<int>(cached->size()) != n_items)
                    throw UsageError("epoch provider changed the instance count");
            }
            std::vector<const MaskedInstance*> batch;
            batch.reserve(items.size());
            for (const int i : items) batch.push_back(&(*cached)[i]);
            return mlm_batch_loss(tape, pn, params, batch);
        },
        trace);
    return params;
}

ModelParams train_mlm(ModelParams params, const std::vector<MaskedInstance>& instances,
                      const TrainConfig& tc, LossTrace* trace) {
    return train_mlm(
        params, [&instances](int) -> const std::vector<MaskedInstance>& { return instances; }, tc,
        trace);
}

}  // namespace textsimp
