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

#include "flight/autograd.h"

#include <stdexcept>

namespace flight::ag {

template <typename T>
void Node<T>::accumulate(const BasicTensor<T>& g) {
  if (grad.empty()) {
    grad = g;
    return;
  }
  auto dst = grad.data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename T>
BasicTensor<T>& Node<T>::grad_buffer() {
  if (grad.empty()) grad = BasicTensor<T>(value.shape());
  return grad;
}

template <typename T>
BasicTensor<T> Var<T>::grad() const {
  if (node_->grad.empty()) return BasicTensor<T>(node_->value.shape());
  return node_->grad;
}

template <typename T>
Var<T> Tape<T>::constant(BasicTensor<T> value) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  return Var<T>(std::move(node), this);
}

template <typename T>
Var<T> Tape<T>::leaf(BasicTensor<T> value) {
  return parameter(std::move(value), nullptr);
}

template <typename T>
Var<T> Tape<T>::parameter(BasicTensor<T> value, BasicTensor<T>* sink) {
  if (sink != nullptr && sink->shape() != value.shape()) {
    throw ShapeError("gradient sink " + shape_str(sink->shape()) +
                     " does not match parameter " + shape_str(value.shape()));
  }
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->requires_grad = recording_;
  node->sink = sink;
  if (recording_) leaves_.push_back(node);
  return Var<T>(std::move(node), this);
}

template <typename T>
Var<T> Tape<T>::record(BasicTensor<T> value, bool requires_grad,
                       BackwardFn backward) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->requires_grad = recording_ && requires_grad;
  if (node->requires_grad) entries_.push_back({node, std::move(backward)});
  return Var<T>(std::move(node), this);
}

template <typename T>
void Tape<T>::backward(const Var<T>& output, const BasicTensor<T>& seed) {
  if (seed.shape() != output.shape()) {
    throw ShapeError("backward seed " + shape_str(seed.shape()) +
                     " does not match output " + shape_str(output.shape()));
  }
  for (auto& entry : entries_) entry.output->grad = BasicTensor<T>();
  for (auto& leaf : leaves_) leaf->grad = BasicTensor<T>();
  if (output.node()->requires_grad) output.node()->grad = seed;

  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->output->grad.empty()) continue;
    it->backward(it->output->grad);
  }
  for (auto& leaf : leaves_) {
    if (leaf->sink == nullptr || leaf->grad.empty()) continue;
    auto dst = leaf->sink->data();
    auto src = leaf->grad.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

template <typename T>
void Tape<T>::backward(const Var<T>& output) {
  backward(output, BasicTensor<T>(output.shape(), T(1)));
}

template <typename T>
void Tape<T>::clear() {
  entries_.clear();
  leaves_.clear();
}

template <typename T>
bool needs_grad(std::initializer_list<const Var<T>*> inputs) {
  for (const Var<T>* v : inputs) {
    if (v->requires_grad() && v->tape() != nullptr && v->tape()->recording()) {
      return true;
    }
  }
  return false;
}

template <typename T>
Tape<T>& tape_of(std::initializer_list<const Var<T>*> inputs) {
  for (const Var<T>* v : inputs) {
    if (v->tape() != nullptr) return *v->tape();
  }
  throw std::logic_error("op inputs are not bound to a tape");
}

template struct Node<float>;
template struct Node<double>;
template class Var<float>;
template class Var<double>;
template class Tape<float>;
template class Tape<double>;
template bool needs_grad<float>(std::initializer_list<const Var<float>*>);
template bool needs_grad<double>(std::initializer_list<const Var<double>*>);
template Tape<float>& tape_of<float>(std::initializer_list<const Var<float>*>);
template Tape<double>& tape_of<double>(std::initializer_list<const Var<double>*>);

BranchTrace*& active_branch_trace() {
  thread_local BranchTrace* trace = nullptr;
  return trace;
}

}  // namespace flight::ag
