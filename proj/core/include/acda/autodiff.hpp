#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "acda/conv.hpp"
#include "acda/tensor.hpp"

namespace acda {

/// Named collection of trainable tensors. Values are non-owning references into
/// the layer that holds them; gradient accumulators live here and are zeroed at
/// the start of every backward pass.
template <typename T>
class ParameterSet {
 public:
  Index add(const std::string& name, Tensor<T>& value) {
    detail::check(index_.find(name) == index_.end(), "duplicate parameter name: " + name);
    index_[name] = static_cast<Index>(entries_.size());
    entries_.push_back({name, &value, Tensor<T>(value.shape())});
    return static_cast<Index>(entries_.size()) - 1;
  }

  Index count() const { return static_cast<Index>(entries_.size()); }
  const std::string& name(Index i) const { return entries_[static_cast<size_t>(i)].name; }
  Tensor<T>& value(Index i) { return *entries_[static_cast<size_t>(i)].value; }
  const Tensor<T>& value(Index i) const { return *entries_[static_cast<size_t>(i)].value; }
  Tensor<T>& grad(Index i) { return entries_[static_cast<size_t>(i)].grad; }
  const Tensor<T>& grad(Index i) const { return entries_[static_cast<size_t>(i)].grad; }

  Index find(const std::string& name) const {
    auto it = index_.find(name);
    detail::check(it != index_.end(), "unknown parameter: " + name);
    return it->second;
  }
  const Tensor<T>& grad_of(const std::string& name) const { return grad(find(name)); }

  void zero_grads() {
    for (auto& e : entries_) e.grad.fill(T(0));
  }

 private:
  struct Entry {
    std::string name;
    Tensor<T>* value;
    Tensor<T> grad;
  };
  std::vector<Entry> entries_;
  std::map<std::string, Index> index_;
};

/// p <- p - lr * grad(p), then clears the accumulators.
template <typename T>
void sgd_step(ParameterSet<T>& params, double learning_rate) {
  for (Index i = 0; i < params.count(); ++i) {
    Tensor<T>& p = params.value(i);
    const Tensor<T>& g = params.grad(i);
    for (Index j = 0; j < p.size(); ++j)
      p[j] -= static_cast<T>(learning_rate) * g[j];
  }
  params.zero_grads();
}

/// Recorded forward computation. Slots hold forward values (the saved
/// activations) and gradient buffers; every recorded op carries its adjoint.
template <typename T>
class Tape {
 public:
  Index leaf(Tensor<T> value, bool requires_grad = false) {
    slots_.push_back({std::move(value), Tensor<T>(), requires_grad, -1, nullptr});
    return static_cast<Index>(slots_.size()) - 1;
  }

  /// Leaf bound to a ParameterSet entry; backward() deposits its gradient there.
  Index param(ParameterSet<T>& set, Index param_index) {
    slots_.push_back({set.value(param_index), Tensor<T>(), true, param_index, &set});
    return static_cast<Index>(slots_.size()) - 1;
  }
  Index param(ParameterSet<T>& set, const std::string& name) {
    return param(set, set.find(name));
  }

  const Tensor<T>& value(Index slot) const { return at(slot).value; }
  const Tensor<T>& grad(Index slot) const { return at(slot).grad; }
  bool requires_grad(Index slot) const { return at(slot).requires_grad; }

  /// Records an op. `backward` receives this tape plus the op's input and
  /// output slot ids and must accumulate into input gradients with add_grad.
  using BackwardFn = std::function<void(Tape&, const std::vector<Index>&, Index)>;
  Index push(Tensor<T> value, std::vector<Index> inputs, BackwardFn backward) {
    bool needs = false;
    for (Index in : inputs) needs = needs || at(in).requires_grad;
    slots_.push_back({std::move(value), Tensor<T>(), needs, -1, nullptr});
    const Index out = static_cast<Index>(slots_.size()) - 1;
    ops_.push_back({std::move(inputs), out, std::move(backward)});
    return out;
  }

  void add_grad(Index slot, const Tensor<T>& g) {
    SlotData& s = at(slot);
    if (!s.requires_grad) return;
    detail::check(g.same_shape(s.value), "gradient shape mismatch");
    for (Index i = 0; i < g.size(); ++i) s.grad[i] += g[i];
  }

  /// Reverse sweep from a recorded scalar slot. Replaying without re-recording
  /// zeroes all accumulators first, so repeated calls yield identical results.
  void backward(Index loss_slot) {
    if (loss_slot < 0 || loss_slot >= static_cast<Index>(slots_.size()))
      throw std::invalid_argument("backward: slot was not recorded on this tape");
    if (at(loss_slot).value.size() != 1)
      throw std::invalid_argument("backward: loss slot must be scalar");
    for (auto& s : slots_) {
      s.grad = Tensor<T>(s.value.shape());
    }
    at(loss_slot).grad[0] = T(1);
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
      if (!at(it->output).requires_grad) continue;
      it->backward(*this, it->inputs, it->output);
    }
    // Deposit into bound parameter sets (accumulators zeroed per pass).
    std::vector<ParameterSet<T>*> seen;
    for (auto& s : slots_)
      if (s.bound_set) {
        bool first = true;
        for (auto* p : seen) first = first && p != s.bound_set;
        if (first) {
          s.bound_set->zero_grads();
          seen.push_back(s.bound_set);
        }
      }
    for (auto& s : slots_)
      if (s.bound_set) {
        Tensor<T>& dst = s.bound_set->grad(s.bound_param);
        for (Index i = 0; i < dst.size(); ++i) dst[i] += s.grad[i];
      }
  }

  Index slot_count() const { return static_cast<Index>(slots_.size()); }

 private:
  struct SlotData {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad;
    Index bound_param;
    ParameterSet<T>* bound_set;
  };

  SlotData& at(Index slot) {
    if (slot < 0 || slot >= static_cast<Index>(slots_.size()))
      throw std::invalid_argument("invalid tape slot");
    return slots_[static_cast<size_t>(slot)];
  }
  const SlotData& at(Index slot) const {
    return const_cast<Tape*>(this)->at(slot);
  }

  std::vector<SlotData> slots_;
  struct OpRecord {
    std::vector<Index> inputs;
    Index output;
    BackwardFn backward;
  };
  std::vector<OpRecord> ops_;
};

// ---------------------------------------------------------------------------
// Differentiable primitives. Forward math lives in conv.hpp / the kernels
// below; each op records the matching adjoint.
// ---------------------------------------------------------------------------

namespace ops {

template <typename T>
Index relu(Tape<T>& tape, Index x) {
  const Tensor<T>& in = tape.value(x);
  Tensor<T> out(in.shape());
  for (Index i = 0; i < in.size(); ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
  return tape.push(std::move(out), {x},
                   [](Tape<T>& t, const std::vector<Index>& in_slots, Index out_slot) {
                     const Tensor<T>& xin = t.value(in_slots[0]);
                     const Tensor<T>& dy = t.grad(out_slot);
                     Tensor<T> dx(xin.shape());
                     // Subgradient at 0 is 0.
                     for (Index i = 0; i < xin.size(); ++i)
                       dx[i] = xin[i] > T(0) ? dy[i] : T(0);
                     t.add_grad(in_slots[0], dx);
                   });
}

template <typename T>
Index conv2d(Tape<T>& tape, Index x, Index filter, std::optional<Index> bias,
             PaddingMode mode) {
  const Tensor<T>* b = bias ? &tape.value(*bias) : nullptr;
  Tensor<T> out = acda::conv2d(tape.value(x), tape.value(filter), b, mode);
  std::vector<Index> inputs = {x, filter};
  if (bias) inputs.push_back(*bias);
  return tape.push(std::move(out), std::move(inputs),
                   [mode](Tape<T>& t, const std::vector<Index>& in, Index out_slot) {
                     const Tensor<T>& dy = t.grad(out_slot);
                     const Tensor<T>& xin = t.value(in[0]);
                     const Tensor<T>& filt = t.value(in[1]);
                     if (t.requires_grad(in[0]))
                       t.add_grad(in[0], detail::conv2d_backward_input(dy, filt, mode));
                     if (t.requires_grad(in[1]))
                       t.add_grad(in[1], detail::conv2d_backward_filter(
                                             dy, xin, filt.extent(2), mode));
                     if (in.size() > 2 && t.requires_grad(in[2]))
                       t.add_grad(in[2], detail::channel_sums(dy));
                   });
}

template <typename T>
Index pointwise_conv(Tape<T>& tape, Index x, Index weights, std::optional<Index> bias) {
  const Tensor<T>* b = bias ? &tape.value(*bias) : nullptr;
  Tensor<T> out = acda::pointwise_conv(tape.value(x), tape.value(weights), b);
  std::vector<Index> inputs = {x, weights};
  if (bias) inputs.push_back(*bias);
  return tape.push(std::move(out), std::move(inputs),
                   [](Tape<T>& t, const std::vector<Index>& in, Index out_slot) {
                     const Tensor<T>& dy = t.grad(out_slot);
                     if (t.requires_grad(in[0]))
                       t.add_grad(in[0],
                                  detail::pointwise_backward_input(dy, t.value(in[1])));
                     if (t.requires_grad(in[1]))
                       t.add_grad(in[1],
                                  detail::pointwise_backward_weights(dy, t.value(in[0])));
                     if (in.size() > 2 && t.requires_grad(in[2]))
                       t.add_grad(in[2], detail::channel_sums(dy));
                   });
}

template <typename T>
Index unfold(Tape<T>& tape, Index x, Index l, PaddingMode mode) {
  Tensor<T> out = acda::unfold(tape.value(x), l, mode);
  const Index c = tape.value(x).extent(0), h = tape.value(x).extent(1),
              w = tape.value(x).extent(2);
  return tape.push(std::move(out), {x},
                   [c, h, w, l, mode](Tape<T>& t, const std::vector<Index>& in, Index out_slot) {
                     t.add_grad(in[0], detail::col2im(t.grad(out_slot), c, h, w, l, mode));
                   });
}

template <typename T>
Index mse_loss(Tape<T>& tape, Index pred, Index target) {
  const Tensor<T>& p = tape.value(pred);
  const Tensor<T>& g = tape.value(target);
  detail::check(p.same_shape(g), "mse_loss shape mismatch");
  T acc = 0;
  for (Index i = 0; i < p.size(); ++i) {
    const T d = p[i] - g[i];
    acc += d * d;
  }
  Tensor<T> out({1});
  out[0] = acc / static_cast<T>(p.size());
  return tape.push(std::move(out), {pred, target},
                   [](Tape<T>& t, const std::vector<Index>& in, Index out_slot) {
                     const Tensor<T>& p = t.value(in[0]);
                     const Tensor<T>& g = t.value(in[1]);
                     const T scale = t.grad(out_slot)[0] * T(2) / static_cast<T>(p.size());
                     Tensor<T> d(p.shape());
                     for (Index i = 0; i < p.size(); ++i) d[i] = scale * (p[i] - g[i]);
                     t.add_grad(in[0], d);
                     if (t.requires_grad(in[1])) {
                       for (Index i = 0; i < p.size(); ++i) d[i] = -d[i];
                       t.add_grad(in[1], d);
                     }
                   });
}

}  // namespace ops

}  // namespace acda
