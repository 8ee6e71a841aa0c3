#include "eigengan/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace eigengan::ad {

namespace {

enum class Broadcast { Same, Row, Column, Scalar };

// Classifies how `small` broadcasts onto `big`; throws if it does not.
Broadcast classify(const Matrix& big, const Matrix& small, const char* op) {
    if (big.same_shape(small)) return Broadcast::Same;
    if (small.rows() == 1 && small.cols() == 1) return Broadcast::Scalar;
    if (small.rows() == 1 && small.cols() == big.cols()) return Broadcast::Row;
    if (small.cols() == 1 && small.rows() == big.rows()) return Broadcast::Column;
    throw ShapeError(std::string(op) + ": cannot broadcast " + small.shape_string() + " onto " +
                     big.shape_string());
}

// Result shape of a binary element-wise op (the larger operand's shape).
bool first_is_big(const Matrix& a, const Matrix& b) { return a.size() >= b.size(); }

template <class F>
Matrix binary(const Matrix& a, const Matrix& b, const char* name, F f) {
    const bool a_big = first_is_big(a, b);
    const Matrix& big = a_big ? a : b;
    const Matrix& small = a_big ? b : a;
    const Broadcast kind = classify(big, small, name);
    Matrix out(big.rows(), big.cols());
    const std::size_t cols = big.cols();
    for (std::size_t r = 0; r < big.rows(); ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            double s = 0.0;
            switch (kind) {
                case Broadcast::Same: s = small(r, c); break;
                case Broadcast::Row: s = small[c]; break;
                case Broadcast::Column: s = small[r]; break;
                case Broadcast::Scalar: s = small[0]; break;
            }
            const double x = big(r, c);
            out(r, c) = a_big ? f(x, s) : f(s, x);
        }
    }
    return out;
}

template <class F>
Matrix unary(const Matrix& a, F f) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
    return out;
}

double softplus_value(double x) {
    // log(1 + e^x) without overflow for large |x|.
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid_value(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Matrix reduce_rows(const Matrix& a) {
    Matrix out(a.rows(), 1);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double acc = 0.0;
        for (double v : a.row_span(r)) acc += v;
        out[r] = acc;
    }
    return out;
}

Matrix reduce_cols(const Matrix& a) {
    Matrix out(1, a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto row = a.row_span(r);
        for (std::size_t c = 0; c < a.cols(); ++c) out[c] += row[c];
    }
    return out;
}

double total(const Matrix& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v;
    return acc;
}

// Sums a gradient back down to the shape of an operand that was broadcast into it.
Var unbroadcast(Var g, std::size_t rows, std::size_t cols) {
    const Matrix& gv = g.value();
    if (gv.rows() == rows && gv.cols() == cols) return g;
    const Broadcast kind = classify(gv, Matrix(rows, cols), "unbroadcast");
    switch (kind) {
        case Broadcast::Row: return col_sum(g);
        case Broadcast::Column: return row_sum(g);
        case Broadcast::Scalar: return sum(g);
        case Broadcast::Same: break;
    }
    return g;
}

}  // namespace

Graph& Var::graph() const {
    if (graph_ == nullptr) throw ContractError("Var: use of an unbound variable");
    return *graph_;
}

const Matrix& Var::value() const { return graph().value(*this); }

void Graph::check_owned(Var v) const {
    if (v.graph_ != this || v.id_ >= nodes_.size())
        throw ContractError("Graph: variable belongs to a different graph");
}

Var Graph::constant(Matrix value) {
    nodes_.push_back({std::move(value), Op::Constant, kNone, kNone, 0.0, false});
    return handle(static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Graph::parameter(Matrix value) {
    nodes_.push_back({std::move(value), Op::Parameter, kNone, kNone, 0.0, true});
    return handle(static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Graph::operand(Var v, std::size_t which) const {
    check_owned(v);
    const Node& n = nodes_[v.id_];
    const std::uint32_t id = which == 0 ? n.a : n.b;
    if (which > 1 || id == kNone) return {};
    return {const_cast<Graph*>(this), id};
}

Var Graph::node(std::uint32_t id) const {
    if (id >= nodes_.size()) throw ContractError("node: id out of range");
    return {const_cast<Graph*>(this), id};
}

const Matrix& Graph::value(Var v) const {
    check_owned(v);
    return nodes_[v.id_].value;
}

bool Graph::requires_grad(Var v) const {
    check_owned(v);
    return nodes_[v.id_].requires_grad;
}

Var Graph::record(Op op, Matrix value, Var a, Var b, double param) {
    check_owned(a);
    bool rg = nodes_[a.id_].requires_grad;
    if (b.valid()) {
        check_owned(b);
        rg = rg || nodes_[b.id_].requires_grad;
    }
    if (!recording_ || !rg) return constant(std::move(value));
    nodes_.push_back({std::move(value), op, a.id_, b.valid() ? b.id_ : kNone, param, true});
    return handle(static_cast<std::uint32_t>(nodes_.size() - 1));
}

void Graph::accumulate(std::vector<std::uint32_t>& grads, std::uint32_t target, Var contribution) {
    if (grads[target] == kNone) {
        grads[target] = contribution.id_;
    } else {
        grads[target] = add(handle(grads[target]), contribution).id_;
    }
}

std::vector<std::uint32_t> Graph::sweep(Var loss, const std::vector<char>& needed) {
    check_owned(loss);
    if (!nodes_[loss.id_].value.same_shape(Matrix::scalar(0.0)))
        throw ContractError("backward: loss must be 1x1, got " + nodes_[loss.id_].value.shape_string());

    const std::uint32_t root = loss.id_;
    std::vector<std::uint32_t> grads(root + 1, kNone);
    grads[root] = constant(Matrix::scalar(1.0)).id_;

    for (std::uint32_t i = root + 1; i-- > 0;) {
        if (grads[i] == kNone || !needed[i]) continue;
        // Copy what we need before recording new nodes.
        const Op op = nodes_[i].op;
        const std::uint32_t ia = nodes_[i].a;
        const std::uint32_t ib = nodes_[i].b;
        const double p = nodes_[i].param;
        if (op == Op::Constant || op == Op::Parameter) continue;

        const Var g = handle(grads[i]);
        const Var self = handle(i);
        const Var a = handle(ia);
        const Var b = ib == kNone ? Var{} : handle(ib);
        const bool need_a = needed[ia];
        const bool need_b = ib != kNone && needed[ib];
        const std::size_t ar = nodes_[ia].value.rows(), ac = nodes_[ia].value.cols();
        const std::size_t br = ib == kNone ? 0 : nodes_[ib].value.rows();
        const std::size_t bc = ib == kNone ? 0 : nodes_[ib].value.cols();
        const double an = static_cast<double>(ar * ac);

        auto mask = [&](auto pred) {
            const Matrix& x = nodes_[ia].value;
            Matrix m(x.rows(), x.cols());
            for (std::size_t k = 0; k < x.size(); ++k) m[k] = pred(x[k]);
            return constant(std::move(m));
        };

        switch (op) {
            case Op::MatMul:
                if (need_a) accumulate(grads, ia, matmul(g, transpose(b)));
                if (need_b) accumulate(grads, ib, matmul(transpose(a), g));
                break;
            case Op::Transpose:
                accumulate(grads, ia, transpose(g));
                break;
            case Op::Expand:
                accumulate(grads, ia, unbroadcast(g, ar, ac));
                break;
            case Op::Add:
                if (need_a) accumulate(grads, ia, unbroadcast(g, ar, ac));
                if (need_b) accumulate(grads, ib, unbroadcast(g, br, bc));
                break;
            case Op::Sub:
                if (need_a) accumulate(grads, ia, unbroadcast(g, ar, ac));
                if (need_b) accumulate(grads, ib, unbroadcast(scale(g, -1.0), br, bc));
                break;
            case Op::Hadamard:
                if (need_a) accumulate(grads, ia, unbroadcast(hadamard(g, b), ar, ac));
                if (need_b) accumulate(grads, ib, unbroadcast(hadamard(g, a), br, bc));
                break;
            case Op::Scale:
                accumulate(grads, ia, scale(g, p));
                break;
            case Op::AddScalar:
                accumulate(grads, ia, g);
                break;
            case Op::LeakyRelu:
                accumulate(grads, ia, hadamard(g, mask([p](double x) { return x > 0.0 ? 1.0 : p; })));
                break;
            case Op::Relu:
                accumulate(grads, ia, hadamard(g, mask([](double x) { return x > 0.0 ? 1.0 : 0.0; })));
                break;
            case Op::ClampMax:
                accumulate(grads, ia, hadamard(g, mask([p](double x) { return x < p ? 1.0 : 0.0; })));
                break;
            case Op::Exp:
                accumulate(grads, ia, hadamard(g, self));
                break;
            case Op::Softplus:
                accumulate(grads, ia, hadamard(g, sigmoid(a)));
                break;
            case Op::Sigmoid:
                accumulate(grads, ia, hadamard(g, hadamard(self, add_scalar(scale(self, -1.0), 1.0))));
                break;
            case Op::Square:
                accumulate(grads, ia, hadamard(g, scale(a, 2.0)));
                break;
            case Op::Sqrt:
                accumulate(grads, ia, hadamard(g, scale(reciprocal(self), 0.5)));
                break;
            case Op::Reciprocal:
                accumulate(grads, ia, hadamard(g, scale(square(self), -1.0)));
                break;
            case Op::Sum:
            case Op::RowSum:
            case Op::ColSum:
                accumulate(grads, ia, expand(g, ar, ac));
                break;
            case Op::Mean:
                accumulate(grads, ia, scale(expand(g, ar, ac), 1.0 / an));
                break;
            case Op::FrobeniusSquared:
                accumulate(grads, ia, hadamard(expand(g, ar, ac), scale(a, 2.0)));
                break;
            case Op::Constant:
            case Op::Parameter:
                break;
        }
    }
    return grads;
}

void Graph::backward(Var loss) {
    check_owned(loss);
    std::vector<char> needed(loss.id_ + 1, 0);
    for (std::uint32_t i = 0; i <= loss.id_; ++i) needed[i] = nodes_[i].requires_grad ? 1 : 0;

    const bool was_recording = recording_;
    recording_ = false;
    std::vector<std::uint32_t> grads;
    try {
        grads = sweep(loss, needed);
    } catch (...) {
        recording_ = was_recording;
        throw;
    }
    recording_ = was_recording;

    if (leaf_grads_.size() < grads.size()) leaf_grads_.resize(grads.size());
    for (std::uint32_t i = 0; i < grads.size(); ++i) {
        if (nodes_[i].op != Op::Parameter || grads[i] == kNone) continue;
        const Matrix& g = nodes_[grads[i]].value;
        if (leaf_grads_[i].empty()) {
            leaf_grads_[i] = g;
        } else {
            for (std::size_t k = 0; k < g.size(); ++k) leaf_grads_[i][k] += g[k];
        }
    }
}

Matrix Graph::grad(Var param) const {
    check_owned(param);
    if (param.id_ < leaf_grads_.size() && !leaf_grads_[param.id_].empty()) return leaf_grads_[param.id_];
    const Matrix& v = nodes_[param.id_].value;
    return Matrix::zeros(v.rows(), v.cols());
}

void Graph::zero_grad() { leaf_grads_.clear(); }

std::vector<Var> Graph::gradients(Var loss, std::span<const Var> wrt, bool create_graph) {
    check_owned(loss);
    // A node is needed when one of the targets lies in its ancestry.
    std::vector<char> needed(loss.id_ + 1, 0);
    for (Var w : wrt) {
        check_owned(w);
        if (w.id_ <= loss.id_) needed[w.id_] = 1;
    }
    for (std::uint32_t i = 0; i <= loss.id_; ++i) {
        if (needed[i]) continue;
        const Node& n = nodes_[i];
        if (n.a != kNone && needed[n.a]) needed[i] = 1;
        if (n.b != kNone && needed[n.b]) needed[i] = 1;
    }

    const bool was_recording = recording_;
    recording_ = create_graph;
    std::vector<std::uint32_t> grads;
    try {
        grads = sweep(loss, needed);
    } catch (...) {
        recording_ = was_recording;
        throw;
    }
    recording_ = was_recording;

    std::vector<Var> out;
    out.reserve(wrt.size());
    for (Var w : wrt) {
        if (w.id_ < grads.size() && grads[w.id_] != kNone) {
            out.push_back(handle(grads[w.id_]));
        } else {
            const Matrix& v = nodes_[w.id_].value;
            out.push_back(constant(Matrix::zeros(v.rows(), v.cols())));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

Var matmul(Var a, Var b) {
    Graph& g = a.graph();
    return g.record(Op::MatMul, eigengan::matmul(a.value(), b.value()), a, b);
}

Var transpose(Var a) { return a.graph().record(Op::Transpose, a.value().transposed(), a); }

Var expand(Var a, std::size_t rows, std::size_t cols) {
    const Matrix target(rows, cols);
    const Matrix& x = a.value();
    const Broadcast kind = classify(target, x, "expand");
    Matrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            switch (kind) {
                case Broadcast::Same: out(r, c) = x(r, c); break;
                case Broadcast::Row: out(r, c) = x[c]; break;
                case Broadcast::Column: out(r, c) = x[r]; break;
                case Broadcast::Scalar: out(r, c) = x[0]; break;
            }
        }
    return a.graph().record(Op::Expand, std::move(out), a);
}

Var add(Var a, Var b) {
    return a.graph().record(Op::Add, binary(a.value(), b.value(), "add", std::plus<>{}), a, b);
}

Var sub(Var a, Var b) {
    return a.graph().record(Op::Sub, binary(a.value(), b.value(), "sub", std::minus<>{}), a, b);
}

Var hadamard(Var a, Var b) {
    return a.graph().record(Op::Hadamard, binary(a.value(), b.value(), "hadamard", std::multiplies<>{}),
                            a, b);
}

Var scale(Var a, double s) {
    return a.graph().record(Op::Scale, unary(a.value(), [s](double x) { return s * x; }), a, {}, s);
}

Var add_scalar(Var a, double s) {
    return a.graph().record(Op::AddScalar, unary(a.value(), [s](double x) { return x + s; }), a, {}, s);
}

Var leaky_relu(Var a, double alpha) {
    return a.graph().record(Op::LeakyRelu,
                            unary(a.value(), [alpha](double x) { return x > 0.0 ? x : alpha * x; }), a,
                            {}, alpha);
}

Var relu(Var a) {
    return a.graph().record(Op::Relu, unary(a.value(), [](double x) { return x > 0.0 ? x : 0.0; }), a);
}

Var exp(Var a) {
    return a.graph().record(Op::Exp, unary(a.value(), [](double x) { return std::exp(x); }), a);
}

Var softplus(Var a) { return a.graph().record(Op::Softplus, unary(a.value(), softplus_value), a); }

Var sigmoid(Var a) { return a.graph().record(Op::Sigmoid, unary(a.value(), sigmoid_value), a); }

Var square(Var a) {
    return a.graph().record(Op::Square, unary(a.value(), [](double x) { return x * x; }), a);
}

Var sqrt(Var a) {
    return a.graph().record(Op::Sqrt, unary(a.value(), [](double x) { return std::sqrt(x); }), a);
}

Var reciprocal(Var a) {
    return a.graph().record(Op::Reciprocal,
                            unary(a.value(), [](double x) { return x == 0.0 ? 0.0 : 1.0 / x; }), a);
}

Var clamp_max(Var a, double limit) {
    return a.graph().record(Op::ClampMax,
                            unary(a.value(), [limit](double x) { return std::min(x, limit); }), a, {},
                            limit);
}

Var sum(Var a) { return a.graph().record(Op::Sum, Matrix::scalar(total(a.value())), a); }

Var mean(Var a) {
    const Matrix& x = a.value();
    if (x.empty()) throw ShapeError("mean: empty input");
    return a.graph().record(Op::Mean, Matrix::scalar(total(x) / static_cast<double>(x.size())), a);
}

Var frobenius_squared(Var a) {
    return a.graph().record(Op::FrobeniusSquared, Matrix::scalar(eigengan::frobenius_squared(a.value())),
                            a);
}

Var row_sum(Var a) { return a.graph().record(Op::RowSum, reduce_rows(a.value()), a); }

Var col_sum(Var a) { return a.graph().record(Op::ColSum, reduce_cols(a.value()), a); }

}  // namespace eigengan::ad
