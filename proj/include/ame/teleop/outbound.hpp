#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>

namespace ame::teleop {

/// Per-connection send queue. Frames are bounded and newest-wins: pushing into
/// a full frame queue discards the oldest frame. Replies are bounded separately
/// and always sent before pending frames.
class OutboundBuffer {
 public:
  using Message = std::shared_ptr<const std::string>;

  explicit OutboundBuffer(std::size_t frame_capacity, std::size_t reply_capacity = 64);

  void push_frame(Message message);
  void push_reply(Message message);
  /// Next message to send, or null when empty.
  [[nodiscard]] Message pop();

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::uint64_t dropped() const;

 private:
  mutable std::mutex mutex_;
  std::size_t frame_capacity_;
  std::size_t reply_capacity_;
  std::deque<Message> frames_;
  std::deque<Message> replies_;
  std::uint64_t dropped_ = 0;
};

}  // namespace ame::teleop
