#include "ame/teleop/outbound.hpp"

#include <stdexcept>

namespace ame::teleop {

OutboundBuffer::OutboundBuffer(std::size_t frame_capacity, std::size_t reply_capacity)
    : frame_capacity_(frame_capacity), reply_capacity_(reply_capacity) {
  if (frame_capacity == 0 || reply_capacity == 0) {
    throw std::invalid_argument("outbound buffer: capacities must be >= 1");
  }
}

void OutboundBuffer::push_frame(Message message) {
  std::lock_guard lock(mutex_);
  if (frames_.size() == frame_capacity_) {
    frames_.pop_front();
    ++dropped_;
  }
  frames_.push_back(std::move(message));
}

void OutboundBuffer::push_reply(Message message) {
  std::lock_guard lock(mutex_);
  if (replies_.size() == reply_capacity_) {
    replies_.pop_front();
    ++dropped_;
  }
  replies_.push_back(std::move(message));
}

OutboundBuffer::Message OutboundBuffer::pop() {
  std::lock_guard lock(mutex_);
  auto& queue = replies_.empty() ? frames_ : replies_;
  if (queue.empty()) return nullptr;
  Message out = std::move(queue.front());
  queue.pop_front();
  return out;
}

std::size_t OutboundBuffer::size() const {
  std::lock_guard lock(mutex_);
  return frames_.size() + replies_.size();
}

std::uint64_t OutboundBuffer::dropped() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

}  // namespace ame::teleop
