#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "haai/core/value.hpp"

namespace haai::io {

struct ExternalEvent {
  std::string source;  // source key, e.g. the ws-in address or a manual-in name
  Value value;
  std::uint64_t batch = 0;
};

/// Live batching window from HAAI_POLL_MS (default 10).
std::chrono::milliseconds default_poll();

/// The only handoff between producers and the turn executor. Events are
/// grouped by batch id and handed out oldest batch first.
class EventQueue {
 public:
  explicit EventQueue(std::chrono::milliseconds poll = default_poll());

  /// Live producers: the queue picks the batch. A source already present
  /// in the open batch goes to the next one so no value is lost.
  std::uint64_t push(std::string source, Value value);
  /// Scripted events keep their batch id (clamped to the open batch).
  void enqueue(ExternalEvent event);

  /// Events of the oldest batch, at most one per source; repeats stay
  /// queued under the same id for the next call. Blocking calls return
  /// none when woken or closed with nothing queued.
  std::optional<std::vector<ExternalEvent>> next_batch(bool blocking);

  /// Makes a blocked next_batch return so the executor can run commands.
  void wake();
  void close();
  bool closed() const;
  bool empty() const;
  std::size_t size() const;
  std::chrono::milliseconds poll() const { return poll_; }

 private:
  struct Pending {
    std::deque<ExternalEvent> events;
    std::chrono::steady_clock::time_point opened;
    bool live = false;
  };
  void insert(ExternalEvent event, bool live);

  std::chrono::milliseconds poll_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::uint64_t, Pending> batches_;
  std::map<std::string, std::uint64_t, std::less<>> last_;
  std::uint64_t open_ = 0;
  bool closed_ = false;
  bool woken_ = false;
};

}  // namespace haai::io
