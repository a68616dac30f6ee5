#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pinn {

/// Primitive operations of the scalar expression graph.
enum class Op : std::uint8_t {
  kConst,
  kInput,
  kParam,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kPowInt,
  kExp,
  kLog,
  kSin,
  kCos,
  kTanh,
  kCosh,
  kSqrt,
  kSoftplus,
  kSigmoid,
};

int op_arity(Op op);
std::string_view op_name(Op op);

class Graph;

/// Cheap handle to a node in a Graph. Handles from different graphs must
/// not be mixed; the builder checks.
struct ExprNode {
  Graph* graph = nullptr;
  std::int32_t id = -1;
  bool valid() const { return graph != nullptr && id >= 0; }
};

/// Input values for evaluation: named input bindings plus the current
/// parameter vector (indexed by parameter leaf index).
struct Bindings {
  std::unordered_map<std::string, double> inputs;
  std::span<const double> params;
};

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when evaluation produces NaN/Inf or hits an unbound input.
struct EvalError : GraphError {
  using GraphError::GraphError;
};

/// Raised when a gradient component is non-finite; carries the parameter index.
struct GradError : GraphError {
  GradError(const std::string& msg, int index) : GraphError(msg), param_index(index) {}
  int param_index;
};

/// Append-only scalar expression graph with exact symbolic input
/// derivatives (nested up to total order 2) and reverse-mode gradients
/// with respect to parameter leaves. Derivatives are lowered eagerly to
/// primitive nodes, so a derivative node is itself differentiable again,
/// including with respect to parameters.
class Graph {
 public:
  Graph();

  // ---- leaves -------------------------------------------------------------
  ExprNode input(std::string_view name);
  ExprNode param(int index);
  ExprNode constant(double value);

  // ---- builders -----------------------------------------------------------
  /// Generic builder; checks arity and graph ownership. `aux` is the
  /// exponent for kPowInt and ignored otherwise.
  ExprNode build(Op op, std::span<const ExprNode> children, int aux = 0);

  ExprNode add(ExprNode a, ExprNode b);
  ExprNode sub(ExprNode a, ExprNode b);
  ExprNode mul(ExprNode a, ExprNode b);
  ExprNode div(ExprNode a, ExprNode b);
  ExprNode neg(ExprNode a);
  ExprNode powi(ExprNode a, int exponent);
  ExprNode exp(ExprNode a);
  ExprNode log(ExprNode a);
  ExprNode sin(ExprNode a);
  ExprNode cos(ExprNode a);
  ExprNode tanh(ExprNode a);
  ExprNode cosh(ExprNode a);
  ExprNode sqrt(ExprNode a);
  ExprNode softplus(ExprNode a);
  ExprNode sigmoid(ExprNode a);

  /// Exact derivative of `node` with respect to the named input, order 1
  /// or 2. The combined derivative order along any path is capped at 2;
  /// mixed second derivatives are expressed as d(d(f,"t",1),"x",1).
  ExprNode d(ExprNode node, std::string_view input, int order);

  /// Clone of the subgraph under `root` with the given input leaves replaced
  /// by constants. Folding specializes everything that depended only on the
  /// substituted inputs while parameter dependence stays symbolic.
  ExprNode substitute(ExprNode root, const std::unordered_map<std::string, double>& values);

  // ---- evaluation ---------------------------------------------------------
  /// Deterministic scalar evaluation. Unbound reachable inputs and
  /// non-finite values raise EvalError.
  double eval(ExprNode node, const Bindings& bindings) const;

  /// Exact gradient of a scalar node with respect to every parameter
  /// leaf (reverse mode). Entry i corresponds to parameter index i.
  std::vector<double> param_grad(ExprNode node, const Bindings& bindings) const;

  // ---- introspection ------------------------------------------------------
  std::int32_t size() const { return static_cast<std::int32_t>(nodes_.size()); }
  int param_count() const { return param_max_ + 1; }
  int input_slot(std::string_view name) const;  // -1 when absent
  const std::vector<std::string>& input_names() const { return input_names_; }
  Op op_of(ExprNode n) const { return nodes_[check(n)].op; }
  double const_value(ExprNode n) const;

 private:
  friend class BatchExec;

  struct Node {
    Op op;
    std::int32_t a = -1;
    std::int32_t b = -1;
    std::int32_t aux = 0;  // input slot / param index / integer exponent
    double value = 0.0;    // kConst payload
  };

  struct NodeKey {
    Op op;
    std::int32_t a, b, aux;
    std::uint64_t vbits;
    bool operator==(const NodeKey&) const = default;
  };
  struct NodeKeyHash {
    std::size_t operator()(const NodeKey& k) const;
  };

  std::int32_t check(ExprNode n) const;
  std::int32_t push(Node n);
  std::int32_t intern(Op op, std::int32_t a, std::int32_t b, std::int32_t aux, double value);
  std::int32_t make(Op op, std::int32_t a, std::int32_t b, int aux = 0);
  std::int32_t make_const(double v);
  bool is_const(std::int32_t id, double v) const;
  bool is_const(std::int32_t id) const { return nodes_[id].op == Op::kConst; }

  std::int32_t diff(std::int32_t id, int slot);
  void mark_reachable(std::int32_t root, std::vector<std::uint8_t>& mark) const;
  void forward_values(std::int32_t root, const Bindings& bindings,
                      const std::vector<std::uint8_t>& mark, std::vector<double>& values) const;

  std::vector<Node> nodes_;
  std::vector<std::uint8_t> dorder_;  // conservative input-derivative order per node
  std::vector<std::string> input_names_;
  std::unordered_map<std::string, int> slot_of_;
  std::vector<std::int32_t> input_node_;            // slot -> node id
  std::unordered_map<int, std::int32_t> param_node_;
  int param_max_ = -1;
  std::unordered_map<NodeKey, std::int32_t, NodeKeyHash> cse_;
  std::unordered_map<std::uint64_t, std::int32_t> deriv_cache_;  // (node,slot) -> derivative id
};

// Convenience operators for readable expression building. All operands must
// belong to the same graph; mixing with raw doubles creates constants.
ExprNode operator+(ExprNode a, ExprNode b);
ExprNode operator-(ExprNode a, ExprNode b);
ExprNode operator*(ExprNode a, ExprNode b);
ExprNode operator/(ExprNode a, ExprNode b);
ExprNode operator-(ExprNode a);
ExprNode operator+(double a, ExprNode b);
ExprNode operator+(ExprNode a, double b);
ExprNode operator-(double a, ExprNode b);
ExprNode operator-(ExprNode a, double b);
ExprNode operator*(double a, ExprNode b);
ExprNode operator*(ExprNode a, double b);
ExprNode operator/(double a, ExprNode b);
ExprNode operator/(ExprNode a, double b);

// Numerically careful scalar kernels shared by evaluation paths.
double stable_softplus(double x);
double stable_sigmoid(double x);
double powi_value(double x, int k);

}  // namespace pinn
