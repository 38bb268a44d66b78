#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace vclab {

using Shape = std::vector<int>;

size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorNode;

// Value-semantics handle to a node of the autograd graph. Ops create fresh
// nodes that keep shared ownership of their inputs, so the graph reachable
// from a loss stays alive until backward() has run. All storage is f64.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

    // Leaf constructors.
    static Tensor zeros(const Shape& shape, bool requires_grad = false);
    static Tensor full(const Shape& shape, double value, bool requires_grad = false);
    static Tensor from_values(const Shape& shape, std::vector<double> values,
                              bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const;
    size_t numel() const;
    int dim(int i) const;
    bool requires_grad() const;

    std::vector<double>& values();
    const std::vector<double>& values() const;

    // Gradient storage; sized lazily on first accumulation.
    bool has_grad() const;
    std::vector<double>& grad();
    const std::vector<double>& grad() const;
    void zero_grad();

    double item() const;  // numel() == 1 only

    TensorNode* node() const { return node_.get(); }
    const std::shared_ptr<TensorNode>& node_ptr() const { return node_; }

private:
    std::shared_ptr<TensorNode> node_;
};

struct TensorNode {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // empty until touched
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<TensorNode>> parents;
    // Accumulates d(loss)/d(parent) into each parent's grad, reading this
    // node's grad. Set only on non-leaf nodes.
    std::function<void()> backward_fn;

    void ensure_grad();
};

// Reverse-mode sweep from a scalar root: seeds d(root)/d(root) = 1 and
// visits every reachable node exactly once in reverse topological order.
void backward(const Tensor& root);

// While a NoGradGuard is alive, ops skip recording backward closures and
// parent links (inference mode). Thread-local.
bool grad_enabled();
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

// Throws if any entry of t is NaN or infinite.
void check_finite(const Tensor& t, const char* what);

}  // namespace vclab
