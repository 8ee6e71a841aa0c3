#pragma once

// Define-by-run reverse-mode differentiation over dense matrices.
//
// A Graph is an append-only arena of nodes. Nodes only ever reference
// lower-indexed parents, so descending index order is a valid reverse
// topological order and no explicit sort is needed.
//
// Backward rules are written in terms of the same differentiable
// operations as the forward pass. With `create_graph` set, the gradient
// computation is itself recorded and can be differentiated again (this is
// what the R1 and gradient penalties need). Without it, the same rules run
// with recording switched off and produce plain constant nodes.

#include "eigengan/matrix.hpp"

#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <vector>

namespace eigengan::ad {

enum class Op : std::uint8_t {
    Constant,
    Parameter,
    MatMul,
    Transpose,
    Add,
    Sub,
    Hadamard,
    Scale,
    AddScalar,
    LeakyRelu,
    Relu,
    Exp,
    Softplus,
    Sigmoid,
    Square,
    Sqrt,
    Reciprocal,
    ClampMax,
    Sum,
    Mean,
    FrobeniusSquared,
    RowSum,
    ColSum,
    Expand,
};

class Graph;

/// Lightweight handle to a node. Only valid while its Graph is alive.
class Var {
public:
    Var() = default;

    bool valid() const noexcept { return graph_ != nullptr; }
    Graph& graph() const;
    std::uint32_t id() const noexcept { return id_; }
    const Matrix& value() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }

private:
    friend class Graph;
    Var(Graph* g, std::uint32_t id) : graph_(g), id_(id) {}

    Graph* graph_ = nullptr;
    std::uint32_t id_ = std::numeric_limits<std::uint32_t>::max();
};

class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    Var constant(Matrix value);
    Var scalar(double v) { return constant(Matrix::scalar(v)); }
    /// Leaf whose gradient is accumulated by backward().
    Var parameter(Matrix value);

    const Matrix& value(Var v) const;
    bool requires_grad(Var v) const;
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Accumulates d(loss)/d(p) into every parameter leaf p reachable from loss.
    void backward(Var loss);
    /// Accumulated gradient of a parameter leaf; zeros if nothing reached it.
    Matrix grad(Var param) const;
    void zero_grad();

    /// Gradients of loss with respect to arbitrary nodes, returned as nodes.
    /// With create_graph the returned nodes are differentiable.
    std::vector<Var> gradients(Var loss, std::span<const Var> wrt, bool create_graph = false);

    // Node construction, used by the operation free functions.
    Var record(Op op, Matrix value, Var a, Var b = {}, double param = 0.0);
    Op op(Var v) const { return nodes_.at(v.id()).op; }
    /// Operand `which` (0 or 1) of a recorded node; invalid Var for leaves and unary ops.
    Var operand(Var v, std::size_t which) const;
    /// Scalar argument of scale, add_scalar, leaky_relu and clamp_max nodes.
    double param(Var v) const { return nodes_.at(v.id()).param; }
    /// Handle of the node with the given id.
    Var node(std::uint32_t id) const;

private:
    struct Node {
        Matrix value;
        Op op;
        std::uint32_t a;
        std::uint32_t b;
        double param;
        bool requires_grad;
    };
    static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

    Var handle(std::uint32_t id) { return {this, id}; }
    void check_owned(Var v) const;
    /// Runs the reverse sweep; returns per-node gradient ids (kNone where absent).
    std::vector<std::uint32_t> sweep(Var loss, const std::vector<char>& needed);
    void accumulate(std::vector<std::uint32_t>& grads, std::uint32_t target, Var contribution);

    std::deque<Node> nodes_;  // stable references across push_back
    std::vector<Matrix> leaf_grads_;
    bool recording_ = true;
};

// Products and structure.
Var matmul(Var a, Var b);
Var transpose(Var a);
/// Broadcasts a 1×1, 1×n or m×1 operand up to an m×n shape.
Var expand(Var a, std::size_t rows, std::size_t cols);

// Element-wise. Binary ops accept equal shapes, or one operand that is a row
// vector matching the columns, a column vector matching the rows, or 1×1.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var leaky_relu(Var a, double alpha = 0.2);
Var relu(Var a);
Var exp(Var a);
Var softplus(Var a);
Var sigmoid(Var a);
Var square(Var a);
/// Gradient is taken as zero where the input is exactly zero.
Var sqrt(Var a);
/// 1/x, defined as 0 at x == 0.
Var reciprocal(Var a);
Var clamp_max(Var a, double limit);

// Reductions.
Var sum(Var a);
Var mean(Var a);
Var frobenius_squared(Var a);
Var row_sum(Var a);
Var col_sum(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return hadamard(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }

}  // namespace eigengan::ad
