#include "autodiff.hpp"

#include <cmath>

namespace morpho::ad {
namespace {

std::string shape(const Matrix& m) {
  return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

[[noreturn]] void shape_error(Op op, const Matrix& a, const Matrix& b) {
  fail(ErrorCode::Shape, std::string(op_name(op)) + ": incompatible shapes " + shape(a) + " and " +
                             shape(b));
}

Graph& graph_of(Var a) {
  if (!a.valid()) fail(ErrorCode::InvalidArgument, "operation on an empty Var");
  return *a.graph();
}

Graph& same_graph(Var a, Var b) {
  Graph& g = graph_of(a);
  if (b.graph() != &g) fail(ErrorCode::InvalidArgument, "operands belong to different graphs");
  return g;
}

Var unary(Op op, Var a, Matrix value) {
  Graph& g = graph_of(a);
  Graph::Node n;
  n.op = op;
  n.value = std::move(value);
  n.parents = {a.id()};
  return g.push(std::move(n));
}

Var binary(Op op, Var a, Var b, Matrix value) {
  Graph& g = same_graph(a, b);
  Graph::Node n;
  n.op = op;
  n.value = std::move(value);
  n.parents = {a.id(), b.id()};
  return g.push(std::move(n));
}

enum class Broadcast { None, Column, Scalar };

Broadcast broadcast_kind(Op op, const Matrix& a, const Matrix& b) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::None;
  if (b.rows() == a.rows() && b.cols() == 1) return Broadcast::Column;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::Scalar;
  shape_error(op, a, b);
}

Matrix softmax_cols(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    Real mx = x.col(c).maxCoeff();
    y.col(c) = (x.col(c).array() - mx).exp().matrix();
    y.col(c) /= y.col(c).sum();
  }
  return y;
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::Input: return "input";
    case Op::Param: return "param";
    case Op::MatMul: return "matmul";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Scale: return "scale";
    case Op::ScaleBy: return "scale_by";
    case Op::Tanh: return "tanh";
    case Op::Sigmoid: return "sigmoid";
    case Op::Relu: return "relu";
    case Op::Softmax: return "softmax";
    case Op::LogSoftmax: return "log_softmax";
    case Op::Dropout: return "dropout";
    case Op::SelectCols: return "select_cols";
    case Op::ConcatRows: return "concat_rows";
    case Op::ConcatCols: return "concat_cols";
    case Op::Rows: return "rows";
    case Op::Cols: return "cols";
    case Op::Transpose: return "transpose";
    case Op::Sum: return "sum";
    case Op::MeanCols: return "mean_cols";
    case Op::CrossEntropy: return "cross_entropy";
    case Op::BilinearLabel: return "bilinear_label";
  }
  return "?";
}

// ---------------------------------------------------------------- params

Parameter& ParameterStore::add(const std::string& name, Index rows, Index cols) {
  if (index_.count(name)) fail(ErrorCode::InvalidArgument, "duplicate parameter '" + name + "'");
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = Matrix::Zero(rows, cols);
  p->grad = Matrix::Zero(rows, cols);
  Parameter* raw = p.get();
  params_.push_back(std::move(p));
  index_[name] = raw;
  return *raw;
}

Parameter* ParameterStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : it->second;
}

Parameter& ParameterStore::get(const std::string& name) {
  if (Parameter* p = find(name)) return *p;
  fail(ErrorCode::InvalidArgument, "unknown parameter '" + name + "'");
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorCode::InvalidArgument, "unknown parameter '" + name + "'");
  return *it->second;
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->grad.setZero();
}

void ParameterStore::init_uniform(Parameter& p, double bound, Rng& rng) {
  for (Index j = 0; j < p.value.cols(); ++j)
    for (Index i = 0; i < p.value.rows(); ++i)
      p.value(i, j) = static_cast<Real>(rng.uniform(-bound, bound));
}

Parameter& ParameterStore::add_uniform(const std::string& name, Index rows, Index cols,
                                       double bound, std::uint64_t seed) {
  Parameter& p = add(name, rows, cols);
  Rng rng(seed ^ fnv1a64(name));
  init_uniform(p, bound, rng);
  return p;
}

// ---------------------------------------------------------------- graph

const Matrix& Var::value() const { return graph_->value_of(id_); }
const Matrix& Var::grad() const { return graph_->grad_of(id_); }
Real Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) fail(ErrorCode::Shape, "scalar(): value has shape " + shape(v));
  return v(0, 0);
}
Op Var::op() const { return graph_->node(id_).op; }
std::vector<Var> Var::parents() const {
  std::vector<Var> out;
  for (int p : graph_->node(id_).parents) out.emplace_back(graph_, p);
  return out;
}

const Matrix& Graph::value_of(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.param ? n.param->value : n.value;
}

Matrix& Graph::grad_of(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.param ? n.param->grad : n.grad;
}

Var Graph::push(Node n) {
  if (!n.param) {
    for (int p : n.parents)
      if (nodes_[static_cast<std::size_t>(p)].requires_grad) n.requires_grad = true;
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::input(Matrix value, bool requires_grad) {
  Node n;
  n.op = Op::Input;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

Var Graph::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var(this, it->second);
  Node n;
  n.op = Op::Param;
  n.param = &p;
  n.requires_grad = true;
  Var v = push(std::move(n));
  param_nodes_[&p] = v.id();
  return v;
}

void Graph::backward(Var loss) {
  if (loss.graph() != this) fail(ErrorCode::InvalidArgument, "backward: loss belongs to another graph");
  const Matrix& lv = value_of(loss.id());
  if (lv.size() != 1) fail(ErrorCode::Shape, "backward: loss must be scalar, got " + shape(lv));
  for (auto& n : nodes_)
    if (!n.param) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  if (!nodes_[static_cast<std::size_t>(loss.id())].requires_grad) return;
  grad_of(loss.id())(0, 0) += Real(1);
  for (int id = loss.id(); id >= 0; --id) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad || n.op == Op::Param || n.op == Op::Input) continue;
    backward_node(id);
  }
}

void Graph::backward_node(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  const Matrix& g = n.grad;
  auto needs = [&](std::size_t k) {
    return nodes_[static_cast<std::size_t>(n.parents[k])].requires_grad;
  };
  auto pg = [&](std::size_t k) -> Matrix& { return grad_of(n.parents[k]); };
  auto pv = [&](std::size_t k) -> const Matrix& { return value_of(n.parents[k]); };

  switch (n.op) {
    case Op::Input:
    case Op::Param:
      break;
    case Op::MatMul:
      if (needs(0)) pg(0).noalias() += g * pv(1).transpose();
      if (needs(1)) pg(1).noalias() += pv(0).transpose() * g;
      break;
    case Op::Add:
    case Op::Sub: {
      const Real sign = n.op == Op::Add ? Real(1) : Real(-1);
      if (needs(0)) pg(0) += g;
      if (needs(1)) {
        const Matrix& b = pv(1);
        if (b.rows() == g.rows() && b.cols() == g.cols()) pg(1) += sign * g;
        else if (b.cols() == 1 && b.rows() == g.rows()) pg(1) += sign * g.rowwise().sum();
        else pg(1)(0, 0) += sign * g.sum();
      }
      break;
    }
    case Op::Mul:
      if (needs(0)) pg(0).array() += g.array() * pv(1).array();
      if (needs(1)) pg(1).array() += g.array() * pv(0).array();
      break;
    case Op::Scale:
      if (needs(0)) pg(0) += n.scalar * g;
      break;
    case Op::ScaleBy:
      if (needs(0)) pg(0)(0, 0) += (g.array() * pv(1).array()).sum();
      if (needs(1)) pg(1) += pv(0)(0, 0) * g;
      break;
    case Op::Tanh:
      if (needs(0)) pg(0).array() += g.array() * (Real(1) - n.value.array().square());
      break;
    case Op::Sigmoid:
      if (needs(0)) pg(0).array() += g.array() * n.value.array() * (Real(1) - n.value.array());
      break;
    case Op::Relu:
      if (needs(0)) pg(0).array() += (pv(0).array() > Real(0)).select(g.array(), Real(0));
      break;
    case Op::Softmax:
      if (needs(0)) {
        Matrix& d = pg(0);
        for (Index c = 0; c < g.cols(); ++c) {
          Real dot = g.col(c).dot(n.value.col(c));
          d.col(c).array() += n.value.col(c).array() * (g.col(c).array() - dot);
        }
      }
      break;
    case Op::LogSoftmax:
      if (needs(0)) {
        Matrix& d = pg(0);
        for (Index c = 0; c < g.cols(); ++c) {
          Real total = g.col(c).sum();
          d.col(c).array() += g.col(c).array() - n.value.col(c).array().exp() * total;
        }
      }
      break;
    case Op::Dropout:
      if (needs(0)) pg(0).array() += g.array() * n.aux.array();
      break;
    case Op::SelectCols:
      if (needs(0)) {
        Matrix& d = pg(0);
        for (std::size_t j = 0; j < n.index.size(); ++j) d.col(n.index[j]) += g.col(static_cast<Index>(j));
      }
      break;
    case Op::ConcatRows: {
      Index off = 0;
      for (std::size_t k = 0; k < n.parents.size(); ++k) {
        Index r = pv(k).rows();
        if (needs(k)) pg(k) += g.middleRows(off, r);
        off += r;
      }
      break;
    }
    case Op::ConcatCols: {
      Index off = 0;
      for (std::size_t k = 0; k < n.parents.size(); ++k) {
        Index c = pv(k).cols();
        if (needs(k)) pg(k) += g.middleCols(off, c);
        off += c;
      }
      break;
    }
    case Op::Rows:
      if (needs(0)) pg(0).middleRows(n.offset, g.rows()) += g;
      break;
    case Op::Cols:
      if (needs(0)) pg(0).middleCols(n.offset, g.cols()) += g;
      break;
    case Op::Transpose:
      if (needs(0)) pg(0) += g.transpose();
      break;
    case Op::Sum:
      if (needs(0)) pg(0).array() += g(0, 0);
      break;
    case Op::MeanCols:
      if (needs(0)) {
        Matrix& d = pg(0);
        const Real inv = Real(1) / static_cast<Real>(d.cols());
        d.colwise() += g.col(0) * inv;
      }
      break;
    case Op::CrossEntropy:
      if (needs(0)) {
        // aux holds softmax(logits)
        Matrix& d = pg(0);
        const Real s = g(0, 0) / static_cast<Real>(n.index.size());
        d += s * n.aux;
        for (std::size_t t = 0; t < n.index.size(); ++t) d(n.index[t], static_cast<Index>(t)) -= s;
      }
      break;
    case Op::BilinearLabel: {
      // parents: dep (d x n), head (d x n), stacked ((L*d) x d); aux = stacked * head
      const Matrix& dep = pv(0);
      const Index d = dep.rows();
      const Index labels = g.rows();
      Matrix d_uh(labels * d, g.cols());
      for (Index l = 0; l < labels; ++l)
        d_uh.middleRows(l * d, d) = dep.array().rowwise() * g.row(l).array();
      if (needs(0)) {
        Matrix& dd = pg(0);
        for (Index l = 0; l < labels; ++l)
          dd.array() += n.aux.middleRows(l * d, d).array().rowwise() * g.row(l).array();
      }
      if (needs(1)) pg(1).noalias() += pv(2).transpose() * d_uh;
      if (needs(2)) pg(2).noalias() += d_uh * pv(1).transpose();
      break;
    }
  }
}

// ---------------------------------------------------------------- ops

Var matmul(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) shape_error(Op::MatMul, av, bv);
  Matrix out = av * bv;
  return binary(Op::MatMul, a, b, std::move(out));
}

Var add(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  Matrix out;
  switch (broadcast_kind(Op::Add, av, bv)) {
    case Broadcast::None: out = av + bv; break;
    case Broadcast::Column: out = av.colwise() + bv.col(0); break;
    case Broadcast::Scalar: out = av.array() + bv(0, 0); break;
  }
  return binary(Op::Add, a, b, std::move(out));
}

Var sub(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  Matrix out;
  switch (broadcast_kind(Op::Sub, av, bv)) {
    case Broadcast::None: out = av - bv; break;
    case Broadcast::Column: out = av.colwise() - bv.col(0); break;
    case Broadcast::Scalar: out = av.array() - bv(0, 0); break;
  }
  return binary(Op::Sub, a, b, std::move(out));
}

Var mul(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) shape_error(Op::Mul, av, bv);
  Matrix out = av.cwiseProduct(bv);
  return binary(Op::Mul, a, b, std::move(out));
}

Var scale(Var a, Real c) {
  Graph::Node n;
  n.op = Op::Scale;
  n.value = a.value() * c;
  n.scalar = c;
  n.parents = {a.id()};
  return graph_of(a).push(std::move(n));
}

Var scale_by(Var s, Var a) {
  const Matrix& sv = s.value();
  if (sv.size() != 1) shape_error(Op::ScaleBy, sv, a.value());
  Matrix out = a.value() * sv(0, 0);
  return binary(Op::ScaleBy, s, a, std::move(out));
}

Var tanh(Var a) { return unary(Op::Tanh, a, a.value().array().tanh().matrix()); }

Var sigmoid(Var a) {
  Matrix out = (Real(1) / (Real(1) + (-a.value().array()).exp())).matrix();
  return unary(Op::Sigmoid, a, std::move(out));
}

Var relu(Var a) { return unary(Op::Relu, a, a.value().cwiseMax(Real(0))); }

Var softmax(Var a) { return unary(Op::Softmax, a, softmax_cols(a.value())); }

Var log_softmax(Var a) {
  const Matrix& x = a.value();
  Matrix y(x.rows(), x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    Real mx = x.col(c).maxCoeff();
    Real lse = mx + std::log((x.col(c).array() - mx).exp().sum());
    y.col(c) = x.col(c).array() - lse;
  }
  return unary(Op::LogSoftmax, a, std::move(y));
}

Var dropout(Var a, Real p) {
  Graph& g = graph_of(a);
  if (!g.training() || p <= Real(0)) return a;
  if (p >= Real(1)) fail(ErrorCode::InvalidArgument, "dropout probability must be < 1");
  if (!g.rng()) fail(ErrorCode::InvalidArgument, "dropout in training mode requires an Rng");
  const Matrix& x = a.value();
  Matrix mask(x.rows(), x.cols());
  const Real keep = Real(1) / (Real(1) - p);
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i) mask(i, j) = g.rng()->uniform() < double(p) ? Real(0) : keep;
  Graph::Node n;
  n.op = Op::Dropout;
  n.value = x.cwiseProduct(mask);
  n.aux = std::move(mask);
  n.parents = {a.id()};
  return g.push(std::move(n));
}

Var select_cols(Var a, std::vector<int> columns) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] < 0 || columns[j] >= x.cols())
      fail(ErrorCode::Shape, "select_cols: column " + std::to_string(columns[j]) + " outside " + shape(x));
    out.col(static_cast<Index>(j)) = x.col(columns[j]);
  }
  Graph::Node n;
  n.op = Op::SelectCols;
  n.value = std::move(out);
  n.index = std::move(columns);
  n.parents = {a.id()};
  return graph_of(a).push(std::move(n));
}

Var embedding_lookup(Var table, std::vector<int> ids) { return select_cols(table, std::move(ids)); }

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorCode::InvalidArgument, "concat_rows: no operands");
  Graph& g = graph_of(parts[0]);
  Index r = 0;
  const Index c = parts[0].cols();
  for (const Var& p : parts) {
    if (p.graph() != &g) fail(ErrorCode::InvalidArgument, "concat_rows: operands from different graphs");
    if (p.cols() != c) shape_error(Op::ConcatRows, parts[0].value(), p.value());
    r += p.rows();
  }
  Graph::Node n;
  n.op = Op::ConcatRows;
  n.value.resize(r, c);
  Index off = 0;
  for (const Var& p : parts) {
    n.value.middleRows(off, p.rows()) = p.value();
    off += p.rows();
    n.parents.push_back(p.id());
  }
  return g.push(std::move(n));
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorCode::InvalidArgument, "concat_cols: no operands");
  Graph& g = graph_of(parts[0]);
  Index c = 0;
  const Index r = parts[0].rows();
  for (const Var& p : parts) {
    if (p.graph() != &g) fail(ErrorCode::InvalidArgument, "concat_cols: operands from different graphs");
    if (p.rows() != r) shape_error(Op::ConcatCols, parts[0].value(), p.value());
    c += p.cols();
  }
  Graph::Node n;
  n.op = Op::ConcatCols;
  n.value.resize(r, c);
  Index off = 0;
  for (const Var& p : parts) {
    n.value.middleCols(off, p.cols()) = p.value();
    off += p.cols();
    n.parents.push_back(p.id());
  }
  return g.push(std::move(n));
}

Var rows(Var a, Index start, Index count) {
  const Matrix& x = a.value();
  if (start < 0 || count < 0 || start + count > x.rows())
    fail(ErrorCode::Shape, "rows: range [" + std::to_string(start) + ", " + std::to_string(start + count) +
                               ") outside " + shape(x));
  Graph::Node n;
  n.op = Op::Rows;
  n.value = x.middleRows(start, count);
  n.offset = start;
  n.parents = {a.id()};
  return graph_of(a).push(std::move(n));
}

Var cols(Var a, Index start, Index count) {
  const Matrix& x = a.value();
  if (start < 0 || count < 0 || start + count > x.cols())
    fail(ErrorCode::Shape, "cols: range [" + std::to_string(start) + ", " + std::to_string(start + count) +
                               ") outside " + shape(x));
  Graph::Node n;
  n.op = Op::Cols;
  n.value = x.middleCols(start, count);
  n.offset = start;
  n.parents = {a.id()};
  return graph_of(a).push(std::move(n));
}

Var transpose(Var a) { return unary(Op::Transpose, a, a.value().transpose()); }

Var sum(Var a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return unary(Op::Sum, a, std::move(out));
}

Var mean_cols(Var a) {
  const Matrix& x = a.value();
  if (x.cols() == 0) fail(ErrorCode::Shape, "mean_cols: no columns");
  return unary(Op::MeanCols, a, x.rowwise().mean());
}

Var cross_entropy(Var logits, std::vector<int> targets) {
  const Matrix& x = logits.value();
  if (static_cast<Index>(targets.size()) != x.cols() || x.cols() == 0)
    fail(ErrorCode::Shape, "cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                               shape(x));
  Matrix p = softmax_cols(x);
  double loss = 0.0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t] < 0 || targets[t] >= x.rows())
      fail(ErrorCode::Shape, "cross_entropy: target " + std::to_string(targets[t]) + " outside " + shape(x));
    const auto col = x.col(static_cast<Index>(t));
    Real mx = col.maxCoeff();
    double lse = double(mx) + std::log(double((col.array() - mx).exp().sum()));
    loss += lse - double(x(targets[t], static_cast<Index>(t)));
  }
  Graph::Node n;
  n.op = Op::CrossEntropy;
  n.value = Matrix::Constant(1, 1, static_cast<Real>(loss / double(targets.size())));
  n.aux = std::move(p);
  n.index = std::move(targets);
  n.parents = {logits.id()};
  return graph_of(logits).push(std::move(n));
}

Var bilinear_label(Var dep, Var head, Var stacked) {
  const Matrix& dv = dep.value();
  const Matrix& hv = head.value();
  const Matrix& uv = stacked.value();
  const Index d = dv.rows();
  if (hv.rows() != d || hv.cols() != dv.cols()) shape_error(Op::BilinearLabel, dv, hv);
  if (uv.cols() != d || d == 0 || uv.rows() % d != 0) shape_error(Op::BilinearLabel, uv, hv);
  Graph& g = same_graph(dep, head);
  if (stacked.graph() != &g) fail(ErrorCode::InvalidArgument, "bilinear_label: operands from different graphs");
  const Index labels = uv.rows() / d;
  Matrix uh = uv * hv;
  Matrix out(labels, dv.cols());
  for (Index l = 0; l < labels; ++l)
    out.row(l) = uh.middleRows(l * d, d).cwiseProduct(dv).colwise().sum();
  Graph::Node n;
  n.op = Op::BilinearLabel;
  n.value = std::move(out);
  n.aux = std::move(uh);
  n.parents = {dep.id(), head.id(), stacked.id()};
  return g.push(std::move(n));
}

// ---------------------------------------------------------------- adam

bool adam_step(ParameterStore& params, AdamState& state, const AdamConfig& cfg) {
  auto all = params.all();
  double norm2 = 0.0;
  for (Parameter* p : all) {
    if (!p->grad.allFinite()) {
      ++state.skipped;
      params.zero_grad();
      return false;
    }
    norm2 += double(p->grad.squaredNorm());
  }
  Real clip_scale = 1;
  if (cfg.clip > 0 && std::sqrt(norm2) > cfg.clip) clip_scale = static_cast<Real>(cfg.clip / std::sqrt(norm2));
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, double(state.step));
  const Real b1 = static_cast<Real>(cfg.beta1), b2 = static_cast<Real>(cfg.beta2);
  for (Parameter* p : all) {
    auto& [m, v] = state.moments[p];
    if (m.size() == 0) {
      m = Matrix::Zero(p->value.rows(), p->value.cols());
      v = Matrix::Zero(p->value.rows(), p->value.cols());
    }
    if (clip_scale != Real(1)) p->grad *= clip_scale;
    m = b1 * m + (Real(1) - b1) * p->grad;
    v = b2 * v + (Real(1) - b2) * p->grad.cwiseProduct(p->grad);
    const Real step = static_cast<Real>(cfg.lr / bc1);
    const Real denom_scale = static_cast<Real>(1.0 / std::sqrt(bc2));
    p->value.array() -= step * m.array() / (v.array().sqrt() * denom_scale + static_cast<Real>(cfg.eps));
    p->grad.setZero();
  }
  return true;
}

}  // namespace morpho::ad
