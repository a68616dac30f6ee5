#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pinn/graph.hpp"

namespace pinn {

/// Compiled batch evaluator for a fixed set of roots in a Graph.
///
/// The reachable subgraph is lowered once into a flat instruction tape in
/// topological order; evaluation then runs the tape over kLanes points at a
/// time (structure-of-arrays, one contiguous lane block per instruction),
/// which the compiler turns into straight SIMD. `backward` runs reverse-mode
/// accumulation over the same tape and adds parameter adjoints into a
/// caller-supplied gradient vector.
///
/// Workspaces hold all mutable state, so one BatchExec can be shared by many
/// threads, each with its own Workspace. All loops are fixed-order, making
/// results bit-deterministic for a given binary.
class BatchExec {
 public:
  static constexpr int kLanes = 8;

  BatchExec(Graph& graph, std::span<const ExprNode> roots);

  struct Workspace {
    std::vector<double> val;     // prog size * kLanes
    std::vector<double> adj;     // prog size * kLanes
    std::vector<double> inputs;  // n_slots * kLanes, slot-major
  };

  Workspace make_workspace() const;

  int root_count() const { return static_cast<int>(root_pos_.size()); }
  int n_input_slots() const { return n_slots_; }
  std::size_t tape_size() const { return prog_.size(); }

  /// Fill one input lane; `slot` is the graph input slot index.
  static void set_input(Workspace& ws, int slot, int lane, double v) {
    ws.inputs[static_cast<std::size_t>(slot) * kLanes + lane] = v;
  }

  /// Forward sweep over all lanes. Inactive lanes must be padded with valid
  /// point data by the caller (results for them are computed and ignored).
  void eval(Workspace& ws, std::span<const double> params) const;

  double root_value(const Workspace& ws, int root, int lane) const {
    return ws.val[static_cast<std::size_t>(root_pos_[root]) * kLanes + lane];
  }

  /// Reverse sweep: accumulates d(sum_r seeds[r] * root_r)/dtheta summed over
  /// the first `active_lanes` lanes into `grad` (which must have at least
  /// graph.param_count() entries). Must follow an eval() on the same
  /// workspace.
  void backward(Workspace& ws, std::span<const double> seeds, int active_lanes,
                std::span<double> grad) const;

 private:
  enum class XOp : std::uint8_t {
    kConst, kInput, kParam,
    kAdd, kSub, kMul, kDiv, kNeg, kPowInt, kSqr,
    kExp, kLog, kSin, kCos, kTanh, kCosh, kSqrt, kSoftplus, kSigmoid,
    kFma,   // a*b + c
    kFms,   // a*b - c
    kFnma,  // c - a*b
  };
  struct Inst {
    XOp op;
    std::int32_t a = -1, b = -1, c = -1;  // tape positions
    std::int32_t aux = 0;                 // slot / param index / exponent
    double cval = 0.0;
  };

  std::vector<Inst> prog_;
  std::vector<std::int32_t> root_pos_;
  std::vector<std::int32_t> param_pos_;  // tape positions of parameter loads
  int n_slots_ = 0;
  int param_count_ = 0;
};

}  // namespace pinn
