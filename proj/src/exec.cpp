#include "pinn/exec.hpp"

#include <cassert>
#include <cmath>
#include <cstring>

namespace pinn {

namespace {
constexpr int kL = BatchExec::kLanes;
}

BatchExec::BatchExec(Graph& graph, std::span<const ExprNode> roots) {
  if (roots.empty()) throw GraphError("BatchExec needs at least one root");
  std::int32_t max_id = -1;
  for (ExprNode r : roots) {
    if (r.graph != &graph) throw GraphError("root from a different graph");
    max_id = std::max(max_id, r.id);
  }

  const auto& nodes = graph.nodes_;
  std::vector<std::uint8_t> mark(max_id + 1, 0);
  std::vector<std::int32_t> uses(max_id + 1, 0);
  {
    std::vector<std::int32_t> stack;
    for (ExprNode r : roots) {
      stack.push_back(r.id);
      uses[r.id] += 1;  // roots must stay addressable
    }
    while (!stack.empty()) {
      std::int32_t id = stack.back();
      stack.pop_back();
      if (mark[id]) continue;
      mark[id] = 1;
      const auto& n = nodes[id];
      if (n.a >= 0) {
        uses[n.a] += 1;
        stack.push_back(n.a);
      }
      if (n.b >= 0) {
        uses[n.b] += 1;
        stack.push_back(n.b);
      }
    }
  }

  // Single-use multiplies feeding an add/sub fuse into one FMA instruction.
  // Claim them in a pre-pass so the emission loop can skip them.
  auto fusable_mul = [&](std::int32_t id) {
    return id >= 0 && nodes[id].op == Op::kMul && uses[id] == 1;
  };
  std::vector<std::uint8_t> fused(max_id + 1, 0);
  for (std::int32_t id = 0; id <= max_id; ++id) {
    if (!mark[id]) continue;
    const auto& n = nodes[id];
    if (n.op != Op::kAdd && n.op != Op::kSub) continue;
    if (fusable_mul(n.a))
      fused[n.a] = 1;
    else if (fusable_mul(n.b))
      fused[n.b] = 1;
  }

  std::vector<std::int32_t> pos(max_id + 1, -1);

  n_slots_ = static_cast<int>(graph.input_names_.size());
  param_count_ = graph.param_count();

  for (std::int32_t id = 0; id <= max_id; ++id) {
    if (!mark[id] || fused[id]) continue;
    const auto& n = nodes[id];
    Inst inst;
    switch (n.op) {
      case Op::kConst:
        inst = {XOp::kConst, -1, -1, -1, 0, n.value};
        break;
      case Op::kInput:
        inst = {XOp::kInput, -1, -1, -1, n.aux, 0.0};
        break;
      case Op::kParam:
        inst = {XOp::kParam, -1, -1, -1, n.aux, 0.0};
        break;
      case Op::kAdd:
      case Op::kSub: {
        const bool sub = n.op == Op::kSub;
        if (n.a >= 0 && fused[n.a]) {
          const auto& m = nodes[n.a];
          inst = {sub ? XOp::kFms : XOp::kFma, pos[m.a], pos[m.b], pos[n.b], 0, 0.0};
        } else if (n.b >= 0 && fused[n.b]) {
          const auto& m = nodes[n.b];
          inst = {sub ? XOp::kFnma : XOp::kFma, pos[m.a], pos[m.b], pos[n.a], 0, 0.0};
        } else {
          inst = {sub ? XOp::kSub : XOp::kAdd, pos[n.a], pos[n.b], -1, 0, 0.0};
        }
        break;
      }
      case Op::kMul:
        inst = {XOp::kMul, pos[n.a], pos[n.b], -1, 0, 0.0};
        break;
      case Op::kDiv:
        inst = {XOp::kDiv, pos[n.a], pos[n.b], -1, 0, 0.0};
        break;
      case Op::kNeg:
        inst = {XOp::kNeg, pos[n.a], -1, -1, 0, 0.0};
        break;
      case Op::kPowInt:
        inst = n.aux == 2 ? Inst{XOp::kSqr, pos[n.a], -1, -1, 0, 0.0}
                          : Inst{XOp::kPowInt, pos[n.a], -1, -1, n.aux, 0.0};
        break;
      case Op::kExp: inst = {XOp::kExp, pos[n.a], -1, -1, 0, 0.0}; break;
      case Op::kLog: inst = {XOp::kLog, pos[n.a], -1, -1, 0, 0.0}; break;
      case Op::kSin: inst = {XOp::kSin, pos[n.a], -1, -1, 0, 0.0}; break;
      case Op::kCos: inst = {XOp::kCos, pos[n.a], -1, -1, 0, 0.0}; break;
      case Op::kTanh: inst = {XOp::kTanh, pos[n.a], -1, -1, 0, 0.0}; break;
      case Op::kCosh: inst = {XOp::kCosh, pos[n.a], -1, -1, 0, 0.0}; break;
      case Op::kSqrt: inst = {XOp::kSqrt, pos[n.a], -1, -1, 0, 0.0}; break;
      case Op::kSoftplus: inst = {XOp::kSoftplus, pos[n.a], -1, -1, 0, 0.0}; break;
      case Op::kSigmoid: inst = {XOp::kSigmoid, pos[n.a], -1, -1, 0, 0.0}; break;
    }
    pos[id] = static_cast<std::int32_t>(prog_.size());
    prog_.push_back(inst);
    if (n.op == Op::kParam) param_pos_.push_back(pos[id]);
  }

  root_pos_.reserve(roots.size());
  for (ExprNode r : roots) root_pos_.push_back(pos[r.id]);
}

BatchExec::Workspace BatchExec::make_workspace() const {
  Workspace ws;
  ws.val.assign(prog_.size() * kL, 0.0);
  ws.adj.assign(prog_.size() * kL, 0.0);
  ws.inputs.assign(static_cast<std::size_t>(std::max(n_slots_, 1)) * kL, 0.0);
  // Constants never change; fill once.
  for (std::size_t i = 0; i < prog_.size(); ++i) {
    if (prog_[i].op == XOp::kConst) {
      for (int l = 0; l < kL; ++l) ws.val[i * kL + l] = prog_[i].cval;
    }
  }
  return ws;
}

void BatchExec::eval(Workspace& ws, std::span<const double> params) const {
  double* __restrict val = ws.val.data();
  const double* __restrict inp = ws.inputs.data();
  const std::size_t n = prog_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Inst& t = prog_[i];
    double* __restrict out = val + i * kL;
    const double* __restrict A = t.a >= 0 ? val + static_cast<std::size_t>(t.a) * kL : nullptr;
    const double* __restrict B = t.b >= 0 ? val + static_cast<std::size_t>(t.b) * kL : nullptr;
    const double* __restrict C = t.c >= 0 ? val + static_cast<std::size_t>(t.c) * kL : nullptr;
    switch (t.op) {
      case XOp::kConst:
        break;  // prefilled
      case XOp::kInput: {
        const double* src = inp + static_cast<std::size_t>(t.aux) * kL;
        for (int l = 0; l < kL; ++l) out[l] = src[l];
        break;
      }
      case XOp::kParam: {
        const double p = params[t.aux];
        for (int l = 0; l < kL; ++l) out[l] = p;
        break;
      }
      case XOp::kAdd: for (int l = 0; l < kL; ++l) out[l] = A[l] + B[l]; break;
      case XOp::kSub: for (int l = 0; l < kL; ++l) out[l] = A[l] - B[l]; break;
      case XOp::kMul: for (int l = 0; l < kL; ++l) out[l] = A[l] * B[l]; break;
      case XOp::kDiv: for (int l = 0; l < kL; ++l) out[l] = A[l] / B[l]; break;
      case XOp::kNeg: for (int l = 0; l < kL; ++l) out[l] = -A[l]; break;
      case XOp::kSqr: for (int l = 0; l < kL; ++l) out[l] = A[l] * A[l]; break;
      case XOp::kPowInt:
        for (int l = 0; l < kL; ++l) out[l] = powi_value(A[l], t.aux);
        break;
      case XOp::kExp: for (int l = 0; l < kL; ++l) out[l] = std::exp(A[l]); break;
      case XOp::kLog: for (int l = 0; l < kL; ++l) out[l] = std::log(A[l]); break;
      case XOp::kSin: for (int l = 0; l < kL; ++l) out[l] = std::sin(A[l]); break;
      case XOp::kCos: for (int l = 0; l < kL; ++l) out[l] = std::cos(A[l]); break;
      case XOp::kTanh: for (int l = 0; l < kL; ++l) out[l] = std::tanh(A[l]); break;
      case XOp::kCosh: for (int l = 0; l < kL; ++l) out[l] = std::cosh(A[l]); break;
      case XOp::kSqrt: for (int l = 0; l < kL; ++l) out[l] = std::sqrt(A[l]); break;
      case XOp::kSoftplus:
        for (int l = 0; l < kL; ++l) out[l] = stable_softplus(A[l]);
        break;
      case XOp::kSigmoid:
        for (int l = 0; l < kL; ++l) out[l] = stable_sigmoid(A[l]);
        break;
      case XOp::kFma: for (int l = 0; l < kL; ++l) out[l] = std::fma(A[l], B[l], C[l]); break;
      case XOp::kFms: for (int l = 0; l < kL; ++l) out[l] = std::fma(A[l], B[l], -C[l]); break;
      case XOp::kFnma: for (int l = 0; l < kL; ++l) out[l] = std::fma(-A[l], B[l], C[l]); break;
    }
  }
}

void BatchExec::backward(Workspace& ws, std::span<const double> seeds, int active_lanes,
                         std::span<double> grad) const {
  assert(seeds.size() == root_pos_.size());
  double* __restrict adj = ws.adj.data();
  const double* __restrict val = ws.val.data();
  std::memset(adj, 0, ws.adj.size() * sizeof(double));
  for (std::size_t r = 0; r < root_pos_.size(); ++r) {
    if (seeds[r] == 0.0) continue;
    double* dst = adj + static_cast<std::size_t>(root_pos_[r]) * kL;
    for (int l = 0; l < active_lanes; ++l) dst[l] += seeds[r];
  }

  for (std::size_t i = prog_.size(); i-- > 0;) {
    const Inst& t = prog_[i];
    const double* __restrict g = adj + i * kL;
    double* __restrict Aj = t.a >= 0 ? adj + static_cast<std::size_t>(t.a) * kL : nullptr;
    double* __restrict Bj = t.b >= 0 ? adj + static_cast<std::size_t>(t.b) * kL : nullptr;
    double* __restrict Cj = t.c >= 0 ? adj + static_cast<std::size_t>(t.c) * kL : nullptr;
    const double* __restrict Av = t.a >= 0 ? val + static_cast<std::size_t>(t.a) * kL : nullptr;
    const double* __restrict Bv = t.b >= 0 ? val + static_cast<std::size_t>(t.b) * kL : nullptr;
    const double* __restrict Ov = val + i * kL;
    switch (t.op) {
      case XOp::kConst:
      case XOp::kInput:
      case XOp::kParam:
        break;
      case XOp::kAdd:
        for (int l = 0; l < kL; ++l) { Aj[l] += g[l]; Bj[l] += g[l]; }
        break;
      case XOp::kSub:
        for (int l = 0; l < kL; ++l) { Aj[l] += g[l]; Bj[l] -= g[l]; }
        break;
      case XOp::kMul:
        for (int l = 0; l < kL; ++l) {
          Aj[l] = std::fma(g[l], Bv[l], Aj[l]);
          Bj[l] = std::fma(g[l], Av[l], Bj[l]);
        }
        break;
      case XOp::kDiv:
        for (int l = 0; l < kL; ++l) {
          const double inv = 1.0 / Bv[l];
          Aj[l] += g[l] * inv;
          Bj[l] -= g[l] * Ov[l] * inv;
        }
        break;
      case XOp::kNeg:
        for (int l = 0; l < kL; ++l) Aj[l] -= g[l];
        break;
      case XOp::kSqr:
        for (int l = 0; l < kL; ++l) Aj[l] += g[l] * 2.0 * Av[l];
        break;
      case XOp::kPowInt:
        for (int l = 0; l < kL; ++l)
          Aj[l] += g[l] * static_cast<double>(t.aux) * powi_value(Av[l], t.aux - 1);
        break;
      case XOp::kExp:
        for (int l = 0; l < kL; ++l) Aj[l] += g[l] * Ov[l];
        break;
      case XOp::kLog:
        for (int l = 0; l < kL; ++l) Aj[l] += g[l] / Av[l];
        break;
      case XOp::kSin:
        for (int l = 0; l < kL; ++l) Aj[l] += g[l] * std::cos(Av[l]);
        break;
      case XOp::kCos:
        for (int l = 0; l < kL; ++l) Aj[l] -= g[l] * std::sin(Av[l]);
        break;
      case XOp::kTanh:
        for (int l = 0; l < kL; ++l) Aj[l] += g[l] * (1.0 - Ov[l] * Ov[l]);
        break;
      case XOp::kCosh:
        for (int l = 0; l < kL; ++l) Aj[l] += g[l] * std::tanh(Av[l]) * Ov[l];
        break;
      case XOp::kSqrt:
        for (int l = 0; l < kL; ++l) Aj[l] += g[l] * 0.5 / Ov[l];
        break;
      case XOp::kSoftplus:
        for (int l = 0; l < kL; ++l) Aj[l] += g[l] * stable_sigmoid(Av[l]);
        break;
      case XOp::kSigmoid:
        for (int l = 0; l < kL; ++l) Aj[l] += g[l] * Ov[l] * (1.0 - Ov[l]);
        break;
      case XOp::kFma:  // a*b + c
        for (int l = 0; l < kL; ++l) {
          Aj[l] = std::fma(g[l], Bv[l], Aj[l]);
          Bj[l] = std::fma(g[l], Av[l], Bj[l]);
          Cj[l] += g[l];
        }
        break;
      case XOp::kFms:  // a*b - c
        for (int l = 0; l < kL; ++l) {
          Aj[l] = std::fma(g[l], Bv[l], Aj[l]);
          Bj[l] = std::fma(g[l], Av[l], Bj[l]);
          Cj[l] -= g[l];
        }
        break;
      case XOp::kFnma:  // c - a*b
        for (int l = 0; l < kL; ++l) {
          Aj[l] = std::fma(-g[l], Bv[l], Aj[l]);
          Bj[l] = std::fma(-g[l], Av[l], Bj[l]);
          Cj[l] += g[l];
        }
        break;
    }
  }

  for (std::int32_t p : param_pos_) {
    const double* a = adj + static_cast<std::size_t>(p) * kL;
    double s = 0.0;
    for (int l = 0; l < kL; ++l) s += a[l];  // inactive lanes carry exact zeros
    grad[prog_[p].aux] += s;
  }
}

}  // namespace pinn
