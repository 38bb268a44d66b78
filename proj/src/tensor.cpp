#include "vclab/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace vclab {

size_t shape_numel(const Shape& shape) {
    size_t n = 1;
    for (int d : shape) {
        if (d < 0) throw std::invalid_argument("negative dimension in shape " + shape_str(shape));
        n *= static_cast<size_t>(d);
    }
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

void TensorNode::ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
}

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
    return full(shape, 0.0, requires_grad);
}

Tensor Tensor::full(const Shape& shape, double v, bool requires_grad) {
    auto node = std::make_shared<TensorNode>();
    node->shape = shape;
    node->value.assign(shape_numel(shape), v);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::from_values(const Shape& shape, std::vector<double> values, bool requires_grad) {
    if (values.size() != shape_numel(shape)) {
        throw std::invalid_argument("from_values: " + std::to_string(values.size()) +
                                    " values for shape " + shape_str(shape));
    }
    auto node = std::make_shared<TensorNode>();
    node->shape = shape;
    node->value = std::move(values);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_values({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }
size_t Tensor::numel() const { return node_->value.size(); }

int Tensor::dim(int i) const {
    int nd = static_cast<int>(node_->shape.size());
    if (i < 0) i += nd;
    if (i < 0 || i >= nd) throw std::out_of_range("Tensor::dim: axis out of range");
    return node_->shape[static_cast<size_t>(i)];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

std::vector<double>& Tensor::values() { return node_->value; }
const std::vector<double>& Tensor::values() const { return node_->value; }

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::vector<double>& Tensor::grad() {
    node_->ensure_grad();
    return node_->grad;
}

const std::vector<double>& Tensor::grad() const {
    node_->ensure_grad();
    return node_->grad;
}

void Tensor::zero_grad() {
    if (!node_->grad.empty()) node_->grad.assign(node_->value.size(), 0.0);
}

double Tensor::item() const {
    if (numel() != 1) {
        throw std::logic_error("Tensor::item: tensor has shape " + shape_str(shape()));
    }
    return node_->value[0];
}

namespace {

thread_local bool g_grad_enabled = true;

// Iterative post-order DFS; recursion would overflow on long training tapes.
void topo_order(TensorNode* root, std::vector<TensorNode*>& order) {
    std::unordered_set<TensorNode*> visited;
    std::vector<std::pair<TensorNode*, size_t>> stack;
    stack.emplace_back(root, 0);
    visited.insert(root);
    while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        if (next_child < node->parents.size()) {
            TensorNode* child = node->parents[next_child].get();
            ++next_child;
            if (visited.insert(child).second) stack.emplace_back(child, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
}

}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

void backward(const Tensor& root) {
    if (!root.defined()) throw std::invalid_argument("backward: undefined tensor");
    if (root.numel() != 1) {
        throw std::invalid_argument("backward: root must be scalar, got shape " +
                                    shape_str(root.shape()));
    }
    std::vector<TensorNode*> order;
    topo_order(root.node(), order);
    root.node()->ensure_grad();
    root.node()->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorNode* node = *it;
        if (node->backward_fn && !node->grad.empty()) node->backward_fn();
    }
}

void check_finite(const Tensor& t, const char* what) {
    for (double v : t.values()) {
        if (!std::isfinite(v)) {
            throw std::runtime_error(std::string(what) + ": non-finite value");
        }
    }
}

}  // namespace vclab
