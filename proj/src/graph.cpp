#include "pinn/graph.hpp"

#include <cassert>
#include <cmath>
#include <cstring>

namespace pinn {

int op_arity(Op op) {
  switch (op) {
    case Op::kConst:
    case Op::kInput:
    case Op::kParam:
      return 0;
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv:
      return 2;
    default:
      return 1;
  }
}

std::string_view op_name(Op op) {
  switch (op) {
    case Op::kConst: return "const";
    case Op::kInput: return "input";
    case Op::kParam: return "param";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kDiv: return "div";
    case Op::kNeg: return "neg";
    case Op::kPowInt: return "pow-int";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    case Op::kTanh: return "tanh";
    case Op::kCosh: return "cosh";
    case Op::kSqrt: return "sqrt";
    case Op::kSoftplus: return "softplus";
    case Op::kSigmoid: return "sigmoid";
  }
  return "?";
}

double stable_softplus(double x) {
  // max(x,0) + log1p(exp(-|x|)); immune to overflow for large |x|.
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double powi_value(double x, int k) {
  if (k < 0) return 1.0 / powi_value(x, -k);
  double result = 1.0;
  double base = x;
  unsigned n = static_cast<unsigned>(k);
  while (n != 0) {
    if (n & 1u) result *= base;
    n >>= 1;
    if (n != 0) base *= base;
  }
  return result;
}

namespace {

double apply_unary(Op op, double a) {
  switch (op) {
    case Op::kNeg: return -a;
    case Op::kExp: return std::exp(a);
    case Op::kLog: return std::log(a);
    case Op::kSin: return std::sin(a);
    case Op::kCos: return std::cos(a);
    case Op::kTanh: return std::tanh(a);
    case Op::kCosh: return std::cosh(a);
    case Op::kSqrt: return std::sqrt(a);
    case Op::kSoftplus: return stable_softplus(a);
    case Op::kSigmoid: return stable_sigmoid(a);
    default: assert(false); return 0.0;
  }
}

double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::kAdd: return a + b;
    case Op::kSub: return a - b;
    case Op::kMul: return a * b;
    case Op::kDiv: return a / b;
    default: assert(false); return 0.0;
  }
}

std::uint64_t bits_of(double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, sizeof(u));
  return u;
}

}  // namespace

std::size_t Graph::NodeKeyHash::operator()(const NodeKey& k) const {
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(k.op);
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.a)));
  mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.b)));
  mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.aux)));
  mix(k.vbits);
  return static_cast<std::size_t>(h);
}

Graph::Graph() {
  nodes_.reserve(1024);
  dorder_.reserve(1024);
}

std::int32_t Graph::check(ExprNode n) const {
  if (n.graph != this) throw GraphError("node belongs to a different graph");
  if (n.id < 0 || n.id >= size()) throw GraphError("invalid node id");
  return n.id;
}

std::int32_t Graph::push(Node n) {
  nodes_.push_back(n);
  dorder_.push_back(0);
  return static_cast<std::int32_t>(nodes_.size()) - 1;
}

std::int32_t Graph::intern(Op op, std::int32_t a, std::int32_t b, std::int32_t aux, double value) {
  NodeKey key{op, a, b, aux, bits_of(value)};
  auto it = cse_.find(key);
  if (it != cse_.end()) return it->second;
  std::int32_t id = push(Node{op, a, b, aux, value});
  cse_.emplace(key, id);
  return id;
}

std::int32_t Graph::make_const(double v) { return intern(Op::kConst, -1, -1, 0, v); }

bool Graph::is_const(std::int32_t id, double v) const {
  return nodes_[id].op == Op::kConst && nodes_[id].value == v;
}

double Graph::const_value(ExprNode n) const {
  std::int32_t id = check(n);
  if (nodes_[id].op != Op::kConst) throw GraphError("node is not a constant");
  return nodes_[id].value;
}

// Simplifying builder. Folds constants (finite results only, so domain
// errors still surface at evaluation) and applies the algebraic identities
// that keep symbolically generated derivative graphs small.
std::int32_t Graph::make(Op op, std::int32_t a, std::int32_t b, int aux) {
  const int arity = op_arity(op);
  if (arity == 2) {
    const bool ca = is_const(a), cb = is_const(b);
    if (ca && cb) {
      double v = apply_binary(op, nodes_[a].value, nodes_[b].value);
      if (std::isfinite(v)) return make_const(v);
    }
    switch (op) {
      case Op::kAdd:
        if (ca && nodes_[a].value == 0.0) return b;
        if (cb && nodes_[b].value == 0.0) return a;
        if (a > b) std::swap(a, b);
        break;
      case Op::kSub:
        if (cb && nodes_[b].value == 0.0) return a;
        if (a == b) return make_const(0.0);
        if (ca && nodes_[a].value == 0.0) return make(Op::kNeg, b, -1);
        break;
      case Op::kMul:
        if ((ca && nodes_[a].value == 0.0) || (cb && nodes_[b].value == 0.0)) return make_const(0.0);
        if (ca && nodes_[a].value == 1.0) return b;
        if (cb && nodes_[b].value == 1.0) return a;
        if (ca && nodes_[a].value == -1.0) return make(Op::kNeg, b, -1);
        if (cb && nodes_[b].value == -1.0) return make(Op::kNeg, a, -1);
        if (a > b) std::swap(a, b);
        break;
      case Op::kDiv:
        // The zero short-circuit follows symbolic-derivative semantics: a
        // structurally-zero numerator removes the term.
        if (ca && nodes_[a].value == 0.0) return make_const(0.0);
        if (cb && nodes_[b].value == 1.0) return a;
        break;
      default: break;
    }
    return intern(op, a, b, 0, 0.0);
  }

  // unary
  if (op == Op::kPowInt) {
    if (aux == 0) return make_const(1.0);
    if (aux == 1) return a;
    if (is_const(a)) {
      double v = powi_value(nodes_[a].value, aux);
      if (std::isfinite(v)) return make_const(v);
    }
    return intern(op, a, -1, aux, 0.0);
  }
  if (op == Op::kNeg && nodes_[a].op == Op::kNeg) return nodes_[a].a;
  if (is_const(a)) {
    double v = apply_unary(op, nodes_[a].value);
    if (std::isfinite(v)) return make_const(v);
  }
  return intern(op, a, -1, 0, 0.0);
}

ExprNode Graph::input(std::string_view name) {
  auto it = slot_of_.find(std::string(name));
  int slot;
  if (it == slot_of_.end()) {
    slot = static_cast<int>(input_names_.size());
    input_names_.emplace_back(name);
    slot_of_.emplace(input_names_.back(), slot);
    input_node_.push_back(intern(Op::kInput, -1, -1, slot, 0.0));
  } else {
    slot = it->second;
  }
  return ExprNode{this, input_node_[slot]};
}

ExprNode Graph::param(int index) {
  if (index < 0) throw GraphError("parameter index must be non-negative");
  param_max_ = std::max(param_max_, index);
  auto [it, inserted] = param_node_.try_emplace(index, -1);
  if (inserted) it->second = intern(Op::kParam, -1, -1, index, 0.0);
  return ExprNode{this, it->second};
}

ExprNode Graph::constant(double value) { return ExprNode{this, make_const(value)}; }

ExprNode Graph::build(Op op, std::span<const ExprNode> children, int aux) {
  const int arity = op_arity(op);
  if (op == Op::kConst || op == Op::kInput || op == Op::kParam)
    throw GraphError("leaf nodes are created via constant()/input()/param()");
  if (static_cast<int>(children.size()) != arity)
    throw GraphError(std::string("arity mismatch for ") + std::string(op_name(op)));
  std::int32_t a = check(children[0]);
  std::int32_t b = arity == 2 ? check(children[1]) : -1;
  std::int32_t id = make(op, a, b, aux);
  // Conservative propagation of derivative-order metadata through manual
  // composition of derivative results.
  std::uint8_t d = dorder_[a];
  if (b >= 0) d = std::max(d, dorder_[b]);
  dorder_[id] = std::max(dorder_[id], d);
  return ExprNode{this, id};
}

#define PINN_BIN(NAME, OP)                                     \
  ExprNode Graph::NAME(ExprNode a, ExprNode b) {               \
    ExprNode kids[2] = {a, b};                                 \
    return build(Op::OP, kids);                                \
  }
PINN_BIN(add, kAdd)
PINN_BIN(sub, kSub)
PINN_BIN(mul, kMul)
PINN_BIN(div, kDiv)
#undef PINN_BIN

#define PINN_UN(NAME, OP)                                      \
  ExprNode Graph::NAME(ExprNode a) {                           \
    ExprNode kids[1] = {a};                                    \
    return build(Op::OP, kids);                                \
  }
PINN_UN(neg, kNeg)
PINN_UN(exp, kExp)
PINN_UN(log, kLog)
PINN_UN(sin, kSin)
PINN_UN(cos, kCos)
PINN_UN(tanh, kTanh)
PINN_UN(cosh, kCosh)
PINN_UN(sqrt, kSqrt)
PINN_UN(softplus, kSoftplus)
PINN_UN(sigmoid, kSigmoid)
#undef PINN_UN

ExprNode Graph::powi(ExprNode a, int exponent) {
  ExprNode kids[1] = {a};
  return build(Op::kPowInt, kids, exponent);
}

// Symbolic derivative with respect to input slot, memoized per (node, slot).
std::int32_t Graph::diff(std::int32_t id, int slot) {
  assert(slot >= 0 && slot < 64);
  const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(id)) << 6) |
                            static_cast<std::uint64_t>(slot);
  auto it = deriv_cache_.find(key);
  if (it != deriv_cache_.end()) return it->second;

  const Node n = nodes_[id];  // copy: nodes_ may reallocate below
  std::int32_t res;
  switch (n.op) {
    case Op::kConst:
    case Op::kParam:
      res = make_const(0.0);
      break;
    case Op::kInput:
      res = make_const(n.aux == slot ? 1.0 : 0.0);
      break;
    case Op::kAdd:
      res = make(Op::kAdd, diff(n.a, slot), diff(n.b, slot));
      break;
    case Op::kSub:
      res = make(Op::kSub, diff(n.a, slot), diff(n.b, slot));
      break;
    case Op::kMul: {
      std::int32_t da = diff(n.a, slot), db = diff(n.b, slot);
      res = make(Op::kAdd, make(Op::kMul, da, n.b), make(Op::kMul, nodes_[id].a, db));
      break;
    }
    case Op::kDiv: {
      std::int32_t da = diff(n.a, slot), db = diff(n.b, slot);
      std::int32_t t1 = make(Op::kDiv, da, n.b);
      std::int32_t t2 = make(Op::kDiv, make(Op::kMul, n.a, db), make(Op::kMul, n.b, n.b));
      res = make(Op::kSub, t1, t2);
      break;
    }
    case Op::kNeg:
      res = make(Op::kNeg, diff(n.a, slot), -1);
      break;
    case Op::kPowInt: {
      std::int32_t da = diff(n.a, slot);
      std::int32_t deriv = make(Op::kMul, make_const(static_cast<double>(n.aux)),
                                make(Op::kPowInt, n.a, -1, n.aux - 1));
      res = make(Op::kMul, deriv, da);
      break;
    }
    case Op::kExp:
      res = make(Op::kMul, id, diff(n.a, slot));
      break;
    case Op::kLog:
      res = make(Op::kDiv, diff(n.a, slot), n.a);
      break;
    case Op::kSin:
      res = make(Op::kMul, make(Op::kCos, n.a, -1), diff(n.a, slot));
      break;
    case Op::kCos:
      res = make(Op::kNeg, make(Op::kMul, make(Op::kSin, n.a, -1), diff(n.a, slot)), -1);
      break;
    case Op::kTanh: {
      std::int32_t one_minus = make(Op::kSub, make_const(1.0), make(Op::kPowInt, id, -1, 2));
      res = make(Op::kMul, one_minus, diff(n.a, slot));
      break;
    }
    case Op::kCosh: {
      // sinh = tanh * cosh keeps the derivative inside the primitive set.
      std::int32_t sinh = make(Op::kMul, make(Op::kTanh, n.a, -1), id);
      res = make(Op::kMul, sinh, diff(n.a, slot));
      break;
    }
    case Op::kSqrt:
      res = make(Op::kDiv, diff(n.a, slot), make(Op::kMul, make_const(2.0), id));
      break;
    case Op::kSoftplus:
      res = make(Op::kMul, make(Op::kSigmoid, n.a, -1), diff(n.a, slot));
      break;
    case Op::kSigmoid: {
      std::int32_t deriv = make(Op::kMul, id, make(Op::kSub, make_const(1.0), id));
      res = make(Op::kMul, deriv, diff(n.a, slot));
      break;
    }
    default:
      throw GraphError("cannot differentiate node");
  }
  deriv_cache_.emplace(key, res);
  if (nodes_[res].op != Op::kConst)
    dorder_[res] = std::max<std::uint8_t>(dorder_[res], static_cast<std::uint8_t>(dorder_[id] + 1));
  return res;
}

ExprNode Graph::d(ExprNode node, std::string_view name, int order) {
  std::int32_t id = check(node);
  if (order != 1 && order != 2) throw GraphError("derivative order must be 1 or 2");
  int slot = input_slot(name);
  if (slot < 0) throw GraphError("unknown input '" + std::string(name) + "'");
  if (dorder_[id] + order > 2)
    throw GraphError("combined input-derivative order would exceed 2");
  std::int32_t r = id;
  for (int k = 0; k < order; ++k) r = diff(r, slot);
  return ExprNode{this, r};
}

int Graph::input_slot(std::string_view name) const {
  auto it = slot_of_.find(std::string(name));
  return it == slot_of_.end() ? -1 : it->second;
}

ExprNode Graph::substitute(ExprNode root, const std::unordered_map<std::string, double>& values) {
  std::int32_t top = check(root);
  std::vector<double> by_slot(input_names_.size());
  std::vector<std::uint8_t> subst(input_names_.size(), 0);
  for (const auto& [name, v] : values) {
    int slot = input_slot(name);
    if (slot < 0) throw GraphError("unknown input '" + name + "'");
    by_slot[slot] = v;
    subst[slot] = 1;
  }
  std::vector<std::uint8_t> mark(top + 1, 0);
  mark_reachable(top, mark);
  std::vector<std::int32_t> remap(top + 1, -1);
  for (std::int32_t id = 0; id <= top; ++id) {
    if (!mark[id]) continue;
    const Node n = nodes_[id];
    if (n.op == Op::kInput && subst[n.aux]) {
      remap[id] = make_const(by_slot[n.aux]);
      continue;
    }
    const std::int32_t a = n.a >= 0 ? remap[n.a] : -1;
    const std::int32_t b = n.b >= 0 ? remap[n.b] : -1;
    if (a == n.a && b == n.b) {
      remap[id] = id;  // untouched subtree
    } else {
      remap[id] = make(n.op, a, b, n.aux);
    }
  }
  return ExprNode{this, remap[top]};
}

void Graph::mark_reachable(std::int32_t root, std::vector<std::uint8_t>& mark) const {
  std::vector<std::int32_t> stack{root};
  while (!stack.empty()) {
    std::int32_t id = stack.back();
    stack.pop_back();
    if (mark[id]) continue;
    mark[id] = 1;
    const Node& n = nodes_[id];
    if (n.a >= 0) stack.push_back(n.a);
    if (n.b >= 0) stack.push_back(n.b);
  }
}

void Graph::forward_values(std::int32_t root, const Bindings& bindings,
                           const std::vector<std::uint8_t>& mark,
                           std::vector<double>& values) const {
  for (std::int32_t id = 0; id <= root; ++id) {
    if (!mark[id]) continue;
    const Node& n = nodes_[id];
    double v;
    switch (n.op) {
      case Op::kConst:
        v = n.value;
        break;
      case Op::kInput: {
        auto it = bindings.inputs.find(input_names_[n.aux]);
        if (it == bindings.inputs.end())
          throw EvalError("unbound input '" + input_names_[n.aux] + "'");
        v = it->second;
        break;
      }
      case Op::kParam:
        if (n.aux >= static_cast<std::int32_t>(bindings.params.size()))
          throw EvalError("missing value for parameter " + std::to_string(n.aux));
        v = bindings.params[n.aux];
        break;
      case Op::kPowInt:
        v = powi_value(values[n.a], n.aux);
        break;
      default:
        v = op_arity(n.op) == 2 ? apply_binary(n.op, values[n.a], values[n.b])
                                : apply_unary(n.op, values[n.a]);
        break;
    }
    if (!std::isfinite(v))
      throw EvalError("non-finite value at node " + std::to_string(id) + " (" +
                      std::string(op_name(n.op)) + ")");
    values[id] = v;
  }
}

double Graph::eval(ExprNode node, const Bindings& bindings) const {
  std::int32_t root = check(node);
  std::vector<std::uint8_t> mark(root + 1, 0);
  mark_reachable(root, mark);
  std::vector<double> values(root + 1, 0.0);
  forward_values(root, bindings, mark, values);
  return values[root];
}

std::vector<double> Graph::param_grad(ExprNode node, const Bindings& bindings) const {
  std::int32_t root = check(node);
  std::vector<std::uint8_t> mark(root + 1, 0);
  mark_reachable(root, mark);
  std::vector<double> values(root + 1, 0.0);
  forward_values(root, bindings, mark, values);

  std::vector<double> adj(root + 1, 0.0);
  std::vector<double> grad(std::max(param_count(), 0), 0.0);
  adj[root] = 1.0;
  for (std::int32_t id = root; id >= 0; --id) {
    if (!mark[id]) continue;
    const double a = adj[id];
    if (a == 0.0) continue;
    const Node& n = nodes_[id];
    switch (n.op) {
      case Op::kConst:
      case Op::kInput:
        break;
      case Op::kParam:
        grad[n.aux] += a;
        break;
      case Op::kAdd:
        adj[n.a] += a;
        adj[n.b] += a;
        break;
      case Op::kSub:
        adj[n.a] += a;
        adj[n.b] -= a;
        break;
      case Op::kMul:
        adj[n.a] += a * values[n.b];
        adj[n.b] += a * values[n.a];
        break;
      case Op::kDiv:
        adj[n.a] += a / values[n.b];
        adj[n.b] -= a * values[id] / values[n.b];
        break;
      case Op::kNeg:
        adj[n.a] -= a;
        break;
      case Op::kPowInt:
        adj[n.a] += a * static_cast<double>(n.aux) * powi_value(values[n.a], n.aux - 1);
        break;
      case Op::kExp:
        adj[n.a] += a * values[id];
        break;
      case Op::kLog:
        adj[n.a] += a / values[n.a];
        break;
      case Op::kSin:
        adj[n.a] += a * std::cos(values[n.a]);
        break;
      case Op::kCos:
        adj[n.a] -= a * std::sin(values[n.a]);
        break;
      case Op::kTanh:
        adj[n.a] += a * (1.0 - values[id] * values[id]);
        break;
      case Op::kCosh:
        adj[n.a] += a * std::tanh(values[n.a]) * values[id];
        break;
      case Op::kSqrt:
        adj[n.a] += a * 0.5 / values[id];
        break;
      case Op::kSoftplus:
        adj[n.a] += a * stable_sigmoid(values[n.a]);
        break;
      case Op::kSigmoid:
        adj[n.a] += a * values[id] * (1.0 - values[id]);
        break;
    }
  }
  for (int i = 0; i < static_cast<int>(grad.size()); ++i) {
    if (!std::isfinite(grad[i]))
      throw GradError("non-finite gradient for parameter " + std::to_string(i), i);
  }
  return grad;
}

namespace {
Graph* graph_of(ExprNode a, ExprNode b) {
  if (!a.valid() || !b.valid()) throw GraphError("invalid node handle");
  if (a.graph != b.graph) throw GraphError("node belongs to a different graph");
  return a.graph;
}
}  // namespace

ExprNode operator+(ExprNode a, ExprNode b) { return graph_of(a, b)->add(a, b); }
ExprNode operator-(ExprNode a, ExprNode b) { return graph_of(a, b)->sub(a, b); }
ExprNode operator*(ExprNode a, ExprNode b) { return graph_of(a, b)->mul(a, b); }
ExprNode operator/(ExprNode a, ExprNode b) { return graph_of(a, b)->div(a, b); }
ExprNode operator-(ExprNode a) { return a.graph->neg(a); }
ExprNode operator+(double a, ExprNode b) { return b.graph->add(b.graph->constant(a), b); }
ExprNode operator+(ExprNode a, double b) { return a.graph->add(a, a.graph->constant(b)); }
ExprNode operator-(double a, ExprNode b) { return b.graph->sub(b.graph->constant(a), b); }
ExprNode operator-(ExprNode a, double b) { return a.graph->sub(a, a.graph->constant(b)); }
ExprNode operator*(double a, ExprNode b) { return b.graph->mul(b.graph->constant(a), b); }
ExprNode operator*(ExprNode a, double b) { return a.graph->mul(a, a.graph->constant(b)); }
ExprNode operator/(double a, ExprNode b) { return b.graph->div(b.graph->constant(a), b); }
ExprNode operator/(ExprNode a, double b) { return a.graph->div(a, a.graph->constant(b)); }

}  // namespace pinn
