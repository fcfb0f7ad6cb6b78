#include "textsimp/nn.hpp"

#include <cassert>
#include <cmath>

namespace textsimp::nn {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

void softmax_row_inplace(double* row, int n) {
    double mx = row[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, row[i]);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        row[i] = std::exp(row[i] - mx);
        sum += row[i];
    }
    for (int i = 0; i < n; ++i) row[i] /= sum;
}

double log_sum_exp(const double* row, int n) {
    double mx = row[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, row[i]);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += std::exp(row[i] - mx);
    return mx + std::log(sum);
}

Node* Tape::make(Mat value) {
    auto node = std::make_unique<Node>();
    node->val = std::move(value);
    node->grad = Mat(node->val.rows, node->val.cols);
    nodes_.push_back(std::move(node));
    return nodes_.back().get();
}

Node* Tape::leaf(Mat value) { return make(std::move(value)); }

Node* Tape::lookup(Node* table, const std::vector<int>& ids) {
    const int d = table->val.cols;
    Mat out(static_cast<int>(ids.size()), d);
    for (size_t i = 0; i < ids.size(); ++i)
        for (int c = 0; c < d; ++c) out.at(static_cast<int>(i), c) = table->val.at(ids[i], c);
    Node* n = make(std::move(out));
    n->back = [n, table, ids, d]() {
        for (size_t i = 0; i < ids.size(); ++i)
            for (int c = 0; c < d; ++c)
                table->grad.at(ids[i], c) += n->grad.at(static_cast<int>(i), c);
    };
    return n;
}

Node* Tape::select_rows(Node* x, const std::vector<int>& rows) {
    const int d = x->val.cols;
    Mat out(static_cast<int>(rows.size()), d);
    for (size_t i = 0; i < rows.size(); ++i)
        for (int c = 0; c < d; ++c) out.at(static_cast<int>(i), c) = x->val.at(rows[i], c);
    Node* n = make(std::move(out));
    n->back = [n, x, rows, d]() {
        for (size_t i = 0; i < rows.size(); ++i)
            for (int c = 0; c < d; ++c) x->grad.at(rows[i], c) += n->grad.at(static_cast<int>(i), c);
    };
    return n;
}

Node* Tape::add(Node* x, Node* y) {
    assert(x->val.rows == y->val.rows && x->val.cols == y->val.cols);
    Mat out = x->val;
    for (size_t i = 0; i < out.size(); ++i) out.a[i] += y->val.a[i];
    Node* n = make(std::move(out));
    n->back = [n, x, y]() {
        for (size_t i = 0; i < n->grad.size(); ++i) {
            x->grad.a[i] += n->grad.a[i];
            y->grad.a[i] += n->grad.a[i];
        }
    };
    return n;
}

Node* Tape::add_rowvec(Node* x, Node* bias) {
    assert(bias->val.rows == 1 && bias->val.cols == x->val.cols);
    Mat out = x->val;
    for (int r = 0; r < out.rows; ++r)
        for (int c = 0; c < out.cols; ++c) out.at(r, c) += bias->val.at(0, c);
    Node* n = make(std::move(out));
    n->back = [n, x, bias]() {
        for (int r = 0; r < n->grad.rows; ++r)
            for (int c = 0; c < n->grad.cols; ++c) {
                x->grad.at(r, c) += n->grad.at(r, c);
                bias->grad.at(0, c) += n->grad.at(r, c);
            }
    };
    return n;
}

Node* Tape::matmul(Node* x, Node* y) {
    assert(x->val.cols == y->val.rows);
    const int m = x->val.rows, k = x->val.cols, c = y->val.cols;
    Mat out(m, c);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) {
            const double xv = x->val.at(i, j);
            if (xv == 0.0) continue;
            for (int l = 0; l < c; ++l) out.at(i, l) += xv * y->val.at(j, l);
        }
    Node* n = make(std::move(out));
    n->back = [n, x, y, m, k, c]() {
        // dX += G Y^T ; dY += X^T G
        for (int i = 0; i < m; ++i)
            for (int l = 0; l < c; ++l) {
                const double g = n->grad.at(i, l);
                if (g == 0.0) continue;
                for (int j = 0; j < k; ++j) {
                    x->grad.at(i, j) += g * y->val.at(j, l);
                    y->grad.at(j, l) += x->val.at(i, j) * g;
                }
            }
    };
    return n;
}

Node* Tape::matmul_nt(Node* x, Node* y) {
    assert(x->val.cols == y->val.cols);
    const int m = x->val.rows, k = x->val.cols, c = y->val.rows;
    Mat out(m, c);
    for (int i = 0; i < m; ++i)
        for (int l = 0; l < c; ++l) {
            double s = 0.0;
            for (int j = 0; j < k; ++j) s += x->val.at(i, j) * y->val.at(l, j);
            out.at(i, l) = s;
        }
    Node* n = make(std::move(out));
    n->back = [n, x, y, m, k, c]() {
        // out = X Y^T : dX += G Y ; dY += G^T X
        for (int i = 0; i < m; ++i)
            for (int l = 0; l < c; ++l) {
                const double g = n->grad.at(i, l);
                if (g == 0.0) continue;
                for (int j = 0; j < k; ++j) {
                    x->grad.at(i, j) += g * y->val.at(l, j);
                    y->grad.at(l, j) += g * x->val.at(i, j);
                }
            }
    };
    return n;
}

Node* Tape::scale(Node* x, double c) {
    Mat out = x->val;
    for (double& v : out.a) v *= c;
    Node* n = make(std::move(out));
    n->back = [n, x, c]() {
        for (size_t i = 0; i < n->grad.size(); ++i) x->grad.a[i] += c * n->grad.a[i];
    };
    return n;
}

Node* Tape::slice_cols(Node* x, int start, int width) {
    assert(start >= 0 && start + width <= x->val.cols);
    Mat out(x->val.rows, width);
    for (int r = 0; r < out.rows; ++r)
        for (int c = 0; c < width; ++c) out.at(r, c) = x->val.at(r, start + c);
    Node* n = make(std::move(out));
    n->back = [n, x, start, width]() {
        for (int r = 0; r < n->grad.rows; ++r)
            for (int c = 0; c < width; ++c) x->grad.at(r, start + c) += n->grad.at(r, c);
    };
    return n;
}

Node* Tape::concat_cols(const std::vector<Node*>& xs) {
    assert(!xs.empty());
    const int rows = xs[0]->val.rows;
    int total = 0;
    for (Node* x : xs) {
        assert(x->val.rows == rows);
        total += x->val.cols;
    }
    Mat out(rows, total);
    int off = 0;
    for (Node* x : xs) {
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < x->val.cols; ++c) out.at(r, off + c) = x->val.at(r, c);
        off += x->val.cols;
    }
    Node* n = make(std::move(out));
    n->back = [n, xs, rows]() {
        int off = 0;
        for (Node* x : xs) {
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < x->val.cols; ++c) x->grad.at(r, c) += n->grad.at(r, off + c);
            off += x->val.cols;
        }
    };
    return n;
}

Node* Tape::gelu(Node* x) {
    // exact form: 0.5 x (1 + erf(x / sqrt(2)))
    Mat out = x->val;
    for (double& v : out.a) v = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
    Node* n = make(std::move(out));
    n->back = [n, x]() {
        for (size_t i = 0; i < n->grad.size(); ++i) {
            const double v = x->val.a[i];
            const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
            const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
            x->grad.a[i] += n->grad.a[i] * (cdf + v * pdf);
        }
    };
    return n;
}

Node* Tape::softmax_rows(Node* x, const Mat* add_mask) {
    Mat out = x->val;
    if (add_mask != nullptr) {
        assert(add_mask->rows == out.rows && add_mask->cols == out.cols);
        for (size_t i = 0; i < out.size(); ++i) out.a[i] += add_mask->a[i];
    }
    for (int r = 0; r < out.rows; ++r) softmax_row_inplace(&out.a[static_cast<size_t>(r) * out.cols], out.cols);
    Node* n = make(std::move(out));
    n->back = [n, x]() {
        // dx = p * (g - sum(g * p)) per row
        for (int r = 0; r < n->val.rows; ++r) {
            double dot = 0.0;
            for (int c = 0; c < n->val.cols; ++c) dot += n->grad.at(r, c) * n->val.at(r, c);
            for (int c = 0; c < n->val.cols; ++c)
                x->grad.at(r, c) += n->val.at(r, c) * (n->grad.at(r, c) - dot);
        }
    };
    return n;
}

Node* Tape::layernorm(Node* x, Node* gamma, Node* beta, double eps) {
    assert(gamma->val.rows == 1 && gamma->val.cols == x->val.cols);
    assert(beta->val.rows == 1 && beta->val.cols == x->val.cols);
    const int rows = x->val.rows, d = x->val.cols;
    Mat out(rows, d);
    Mat xhat(rows, d);
    std::vector<double> inv_std(rows);
    for (int r = 0; r < rows; ++r) {
        double mean = 0.0;
        for (int c = 0; c < d; ++c) mean += x->val.at(r, c);
        mean /= d;
        double var = 0.0;
        for (int c = 0; c < d; ++c) {
            const double dvi = x->val.at(r, c) - mean;
            var += dvi * dvi;
        }
        var /= d;
        inv_std[r] = 1.0 / std::sqrt(var + eps);
        for (int c = 0; c < d; ++c) {
            xhat.at(r, c) = (x->val.at(r, c) - mean) * inv_std[r];
            out.at(r, c) = xhat.at(r, c) * gamma->val.at(0, c) + beta->val.at(0, c);
        }
    }
    Node* n = make(std::move(out));
    n->back = [n, x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std), rows, d]() {
        for (int r = 0; r < rows; ++r) {
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (int c = 0; c < d; ++c) {
                const double dy = n->grad.at(r, c) * gamma->val.at(0, c);
                sum_dy += dy;
                sum_dy_xhat += dy * xhat.at(r, c);
                gamma->grad.at(0, c) += n->grad.at(r, c) * xhat.at(r, c);
                beta->grad.at(0, c) += n->grad.at(r, c);
            }
            for (int c = 0; c < d; ++c) {
                const double dy = n->grad.at(r, c) * gamma->val.at(0, c);
                x->grad.at(r, c) +=
                    inv_std[r] * (dy - sum_dy / d - xhat.at(r, c) * sum_dy_xhat / d);
            }
        }
    };
    return n;
}

Node* Tape::cross_entropy_sum(Node* logits, const std::vector<int>& targets) {
    assert(static_cast<int>(targets.size()) == logits->val.rows);
    const int rows = logits->val.rows, v = logits->val.cols;
    double loss = 0.0;
    for (int r = 0; r < rows; ++r) {
        const double lse = log_sum_exp(&logits->val.a[static_cast<size_t>(r) * v], v);
        loss += lse - logits->val.at(r, targets[r]);
    }
    Mat out(1, 1);
    out.at(0, 0) = loss;
    Node* n = make(std::move(out));
    n->back = [n, logits, targets, rows, v]() {
        const double g = n->grad.at(0, 0);
        if (g == 0.0) return;
        std::vector<double> p(v);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < v; ++c) p[c] = logits->val.at(r, c);
            softmax_row_inplace(p.data(), v);
            for (int c = 0; c < v; ++c) logits->grad.at(r, c) += g * p[c];
            logits->grad.at(r, targets[r]) -= g;
        }
    };
    return n;
}

void Tape::backward(Node* loss) {
    assert(loss->val.rows == 1 && loss->val.cols == 1);
    loss->grad.at(0, 0) = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it)
        if ((*it)->back) (*it)->back();
}

}  // namespace textsimp::nn
