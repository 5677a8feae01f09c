#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/matrix.hpp"

namespace scmc::diff {

using NodeId = int;

enum class Op {
    Input,
    MatMul,
    Transpose,
    Add,
    Sub,
    AddRowVec,
    Scale,
    Hadamard,
    ScalarMul,
    Tanh,
    Relu,
    Exp,
    Log,
    RowSum,
    Sum,
    FrobSq,
    Trace,
    CosineGram,
    SoftmaxRow,
    Elem,
    AffinityProject,
};

struct Node {
    Op op;
    NodeId a = -1;
    NodeId b = -1;
    double alpha = 0.0;          // Scale factor
    std::size_t ei = 0, ej = 0;  // Elem indices
    Matrix value;
    Matrix grad;
    bool trainable = false;
    std::string name;
    // Forward-pass caches consumed by the adjoint (CosineGram row norms,
    // AffinityProject row sums / fallback flags).
    Matrix cache_a, cache_b;
    std::vector<double> aux;
    std::vector<char> flags;
};

// Expression tape: nodes are appended in construction order, which is by
// definition topological. Shapes are checked at construction so forward()
// can never hit a shape error. One tape = one scalar objective.
class Tape {
public:
    NodeId input(const std::string& name, std::size_t rows, std::size_t cols,
                 bool trainable = false);
    NodeId constant(Matrix m, const std::string& name = "const");

    // Rebinding an input invalidates the current forward pass.
    void bind(NodeId id, const Matrix& m);

    NodeId matmul(NodeId a, NodeId b);
    NodeId transpose(NodeId a);
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId add_rowvec(NodeId m, NodeId v);  // broadcast 1xC bias over rows
    NodeId scale(NodeId a, double s);
    NodeId hadamard(NodeId a, NodeId b);
    NodeId scalar_mul(NodeId s, NodeId m);  // s is 1x1
    NodeId tanh(NodeId a);
    NodeId relu(NodeId a);
    NodeId exp(NodeId a);
    NodeId log(NodeId a);
    NodeId rowsum(NodeId a);   // NxM -> Nx1
    NodeId sum(NodeId a);      // -> 1x1
    NodeId frob_sq(NodeId a);  // -> 1x1
    NodeId trace(NodeId a);    // -> 1x1
    // S_ij = cos(row_i(U), row_j(W)); rows with norm < 1e-12 give 0 with
    // zero gradient.
    NodeId cosine_gram(NodeId u, NodeId w);
    NodeId softmax_row(NodeId a);  // 1xV
    NodeId elem(NodeId a, std::size_t i, std::size_t j);
    // relu, zero diagonal, row-normalize; rows with off-diagonal sum below
    // 1e-12 become the uniform off-diagonal row (constant, zero gradient).
    NodeId affinity_project(NodeId a);

    void set_root(NodeId id);

    // Computes every cached value in topological order; returns the root
    // scalar. Throws if an intermediate goes non-finite, naming the node.
    double forward();

    // Reverse pass; requires a completed forward pass.
    void backward();

    const Matrix& value_of(NodeId id) const { return nodes_.at(id).value; }
    const Matrix& grad_of(NodeId id) const;
    std::size_t node_count() const { return nodes_.size(); }

    // Gradients of the root w.r.t. every trainable input, keyed by name.
    std::map<std::string, Matrix> gradients() const;

    struct GradCheckEntry {
        std::string name;
        double max_rel_err;
        bool pass;
    };
    // Central finite differences against the reverse-mode gradients.
    // Requires h in (0, 1e-2]. Relative error uses a unit floor:
    // |g - fd| / max(1, |g|, |fd|). A nonzero probe cap limits each input
    // to that many evenly spaced elements (deterministic selection),
    // keeping checks on large weight matrices affordable; 0 probes all.
    std::vector<GradCheckEntry> grad_check(double h, double tol,
                                           std::size_t max_probes_per_input = 0);

private:
    NodeId push(Node n);
    Node& at(NodeId id) { return nodes_[id]; }
    void eval(Node& n);
    void adjoint(Node& n);
    void check_operand(NodeId id) const;

    std::vector<Node> nodes_;
    NodeId root_ = -1;
    bool forward_done_ = false;
    bool backward_done_ = false;
};

}  // namespace scmc::diff
