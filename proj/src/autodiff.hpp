#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "common.hpp"

namespace morpho::ad {

using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

// Owns the trainable tensors of a model. Iteration order is insertion order,
// which fixes the checkpoint layout and the optimizer's update order.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, Index rows, Index cols);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  Parameter* find(const std::string& name);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  void zero_grad();

  // Uniform(-bound, bound) initialisation.
  void init_uniform(Parameter& p, double bound, Rng& rng);
  // Adds a parameter initialised from its own stream, seeded by (seed, name),
  // so that values do not depend on which other parameters exist.
  Parameter& add_uniform(const std::string& name, Index rows, Index cols, double bound,
                         std::uint64_t seed);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, Parameter*> index_;
};

enum class Op : std::uint8_t {
  Input, Param, MatMul, Add, Sub, Mul, Scale, ScaleBy, Tanh, Sigmoid, Relu,
  Softmax, LogSoftmax, Dropout, SelectCols, ConcatRows, ConcatCols, Rows, Cols,
  Transpose, Sum, MeanCols, CrossEntropy, BilinearLabel
};
const char* op_name(Op op);

class Graph;

// Handle to a node of a Graph. Cheap to copy; only valid while its graph is.
class Var {
 public:
  Var() = default;
  Var(Graph* g, int id) : graph_(g), id_(id) {}

  const Matrix& value() const;
  const Matrix& grad() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Real scalar() const;
  Op op() const;
  std::vector<Var> parents() const;

  Graph* graph() const { return graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  Graph* graph_ = nullptr;
  int id_ = -1;
};

// A tape of nodes in creation order, which is a topological order. Built
// once per example and discarded after backward.
class Graph {
 public:
  explicit Graph(bool training = false, Rng* rng = nullptr) : training_(training), rng_(rng) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool training() const { return training_; }
  Rng* rng() const { return rng_; }
  std::size_t size() const { return nodes_.size(); }

  // Inputs are constants unless requires_grad is set, in which case their
  // gradient is available through Var::grad() after backward.
  Var input(Matrix value, bool requires_grad = false);
  // Parameter leaves are shared: repeated calls return the same node.
  Var param(Parameter& p);

  // Reverse-mode accumulation from a 1x1 node. Gradients of parameters are
  // added to Parameter::grad (so calling twice doubles them); gradients of
  // interior nodes are recomputed from zero on every call.
  void backward(Var loss);

  // Node access used by the op implementations.
  struct Node {
    Op op = Op::Input;
    Matrix value;
    Matrix grad;
    std::vector<int> parents;
    Parameter* param = nullptr;
    std::vector<int> index;  // SelectCols columns / CrossEntropy targets
    Matrix aux;              // cached forward quantities
    Real scalar = 0;
    Index offset = 0;
    bool requires_grad = false;
  };
  const Matrix& value_of(int id) const;
  Matrix& grad_of(int id);
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  Var push(Node n);

 private:
  void backward_node(int id);

  std::vector<Node> nodes_;
  std::unordered_map<Parameter*, int> param_nodes_;
  bool training_;
  Rng* rng_;
};

// Forward operations. Shape errors name the op and both shapes.
Var matmul(Var a, Var b);
// Elementwise sum/difference; `b` may also be a column vector (broadcast over
// the columns of `a`) or a 1x1 scalar.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, Real c);
Var scale_by(Var s, Var a);  // s is 1x1
Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);
Var softmax(Var a);      // column-wise
Var log_softmax(Var a);  // column-wise
// Inverted dropout: at train time keeps each entry with probability 1-p and
// divides by 1-p; identity in eval mode.
Var dropout(Var a, Real p);
Var select_cols(Var a, std::vector<int> columns);
Var embedding_lookup(Var table, std::vector<int> ids) ;
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var rows(Var a, Index start, Index count);
Var cols(Var a, Index start, Index count);
Var transpose(Var a);
Var sum(Var a);
Var mean_cols(Var a);
// Mean over columns of -log softmax(logits[:, t])[targets[t]].
Var cross_entropy(Var logits, std::vector<int> targets);
// out(l, j) = dep(:, j)^T U_l head(:, j) with U_l the l-th block of d rows
// of `stacked` ((L*d) x d).
Var bilinear_label(Var dep, Var head, Var stacked);

struct AdamConfig {
  double lr = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip = 5.0;  // global gradient-norm clip, <= 0 disables
};

struct AdamState {
  std::int64_t step = 0;
  std::int64_t skipped = 0;  // updates dropped for non-finite gradients
  std::unordered_map<const Parameter*, std::pair<Matrix, Matrix>> moments;
};

// One Adam update with bias correction over every parameter, then zeroes the
// gradients. Returns false (and counts a skip) if any gradient is non-finite.
bool adam_step(ParameterStore& params, AdamState& state, const AdamConfig& cfg);

}  // namespace morpho::ad
