/* Copyright 2026 The FLIGHT-Net Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef FLIGHT_AUTOGRAD_H_
#define FLIGHT_AUTOGRAD_H_

// Define-by-run reverse-mode differentiation.
//
// A Tape records one entry per differentiable op executed while recording.
// Tape::backward replays the entries in strict reverse order. Leaf gradients
// are accumulated into caller-provided sinks (pre-zeroed by the caller), so
// a backward pass never clears parameter gradient buffers on its own.

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "flight/tensor.h"

namespace flight::ag {

template <typename T>
struct Node {
  BasicTensor<T> value;
  BasicTensor<T> grad;  // empty until something flows into it
  bool requires_grad = false;
  BasicTensor<T>* sink = nullptr;  // parameter gradient buffer, if any

  // grad += g, allocating zeros on first use.
  void accumulate(const BasicTensor<T>& g);
  BasicTensor<T>& grad_buffer();
};

template <typename T>
class Tape;

template <typename T>
class Var {
 public:
  Var() = default;
  Var(std::shared_ptr<Node<T>> node, Tape<T>* tape)
      : node_(std::move(node)), tape_(tape) {}

  const BasicTensor<T>& value() const { return node_->value; }
  // Gradient from the last backward pass; zeros if nothing reached this var.
  BasicTensor<T> grad() const;
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_->requires_grad; }
  bool defined() const { return node_ != nullptr; }

  const std::shared_ptr<Node<T>>& node() const { return node_; }
  Tape<T>* tape() const { return tape_; }

 private:
  std::shared_ptr<Node<T>> node_;
  Tape<T>* tape_ = nullptr;
};

template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(const BasicTensor<T>& grad_out)>;

  // A non-recording tape evaluates ops eagerly and keeps no history, so
  // intermediate buffers are released as soon as their Vars go away.
  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }

  Var<T> constant(BasicTensor<T> value);
  Var<T> leaf(BasicTensor<T> value);
  // A leaf whose gradient is added into *sink after each backward pass.
  Var<T> parameter(BasicTensor<T> value, BasicTensor<T>* sink);

  // Creates an op output. When recording and any input requires a gradient,
  // `backward` is stored and later called with the output's gradient.
  Var<T> record(BasicTensor<T> value, bool requires_grad, BackwardFn backward);

  // Seeds `output` with `seed` and propagates. Intermediate gradients from
  // any previous pass are discarded first, so repeated calls are identical.
  void backward(const Var<T>& output, const BasicTensor<T>& seed);
  // Seed of ones; intended for scalar outputs.
  void backward(const Var<T>& output);

  std::size_t size() const { return entries_.size(); }
  void clear();

 private:
  struct Entry {
    std::shared_ptr<Node<T>> output;
    BackwardFn backward;
  };

  bool recording_;
  std::vector<Entry> entries_;
  std::vector<std::shared_ptr<Node<T>>> leaves_;
};

// Piecewise ops (ReLU, max pooling, pow_floor) note which branch each
// element took while a trace is active on the current thread. The gradient
// checker compares traces to discard probes that step across a kink.
class BranchTrace {
 public:
  void note(std::uint64_t digest) { digests_.push_back(digest); }
  bool operator==(const BranchTrace&) const = default;

 private:
  std::vector<std::uint64_t> digests_;
};

// Null unless a trace is being collected on this thread.
BranchTrace*& active_branch_trace();

// True when any of the inputs needs a gradient and the tape records.
template <typename T>
bool needs_grad(std::initializer_list<const Var<T>*> inputs);

template <typename T>
Tape<T>& tape_of(std::initializer_list<const Var<T>*> inputs);

}  // namespace flight::ag

#endif  // FLIGHT_AUTOGRAD_H_
