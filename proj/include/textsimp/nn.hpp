#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace textsimp::nn {

// Row-major dense matrix of doubles. Activations and gradients run in
// double; master parameters are stored as f32-representable doubles so
// checkpoints round-trip bit-exactly (see ParamTensor).
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
    size_t size() const { return a.size(); }
};

class Tape;

struct Node {
    Mat val;
    Mat grad;
    std::function<void()> back;  // reads this->grad, accumulates into parents
};

// Reverse-mode tape. Nodes are created in forward (topological) order;
// backward() walks the tape in reverse. One tape per forward pass.
class Tape {
public:
    Node* leaf(Mat value);

    Node* lookup(Node* table, const std::vector<int>& ids);
    Node* select_rows(Node* x, const std::vector<int>& rows);
    Node* add(Node* x, Node* y);
    Node* add_rowvec(Node* x, Node* bias);  // bias is [1, c], broadcast over rows
    Node* matmul(Node* x, Node* y);         // [m,k] x [k,n]
    Node* matmul_nt(Node* x, Node* y);      // [m,k] x [n,k]^T -> [m,n]
    Node* scale(Node* x, double c);
    Node* slice_cols(Node* x, int start, int width);
    Node* concat_cols(const std::vector<Node*>& xs);
    Node* gelu(Node* x);
    // Additive mask (0 / -inf pattern) applied before the row softmax;
    // pass nullptr for no mask. The mask is a constant, same shape as x.
    Node* softmax_rows(Node* x, const Mat* add_mask);
    Node* layernorm(Node* x, Node* gamma, Node* beta, double eps = 1e-12);
    // Scalar [1,1] node: sum over rows of -log softmax(row)[target].
    Node* cross_entropy_sum(Node* logits, const std::vector<int>& targets);

    void backward(Node* loss);

    size_t node_count() const { return nodes_.size(); }

private:
    Node* make(Mat value);
    std::vector<std::unique_ptr<Node>> nodes_;
};

// Numerically stable row softmax into `out` (max-subtracted).
void softmax_row_inplace(double* row, int n);

// log(sum(exp(row))) with max-subtraction.
double log_sum_exp(const double* row, int n);

}  // namespace textsimp::nn
