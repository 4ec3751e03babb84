#include "haai/io/event_queue.hpp"

#include <cstdlib>
#include <set>

#include "haai/error.hpp"

namespace haai::io {

std::chrono::milliseconds default_poll() {
  if (const char* env = std::getenv("HAAI_POLL_MS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 0) return std::chrono::milliseconds(v);
  }
  return std::chrono::milliseconds(10);
}

EventQueue::EventQueue(std::chrono::milliseconds poll) : poll_(poll) {}

std::uint64_t EventQueue::push(std::string source, Value value) {
  std::uint64_t batch;
  {
    std::lock_guard lk(mu_);
    if (closed_) throw Error(ErrorCode::QueueClosed, "event queue is closed");
    batch = open_;
    if (auto it = last_.find(source); it != last_.end()) batch = std::max(batch, it->second + 1);
    insert({std::move(source), std::move(value), batch}, true);
  }
  cv_.notify_all();
  return batch;
}

void EventQueue::enqueue(ExternalEvent event) {
  {
    std::lock_guard lk(mu_);
    if (closed_) throw Error(ErrorCode::QueueClosed, "event queue is closed");
    event.batch = std::max(event.batch, open_);
    insert(std::move(event), false);
  }
  cv_.notify_all();
}

void EventQueue::insert(ExternalEvent event, bool live) {
  auto& last = last_[event.source];
  last = std::max(last, event.batch);
  auto [it, fresh] = batches_.try_emplace(event.batch);
  if (fresh) {
    it->second.opened = std::chrono::steady_clock::now();
    it->second.live = live;
  }
  it->second.events.push_back(std::move(event));
}

std::optional<std::vector<ExternalEvent>> EventQueue::next_batch(bool blocking) {
  std::unique_lock lk(mu_);
  if (blocking) {
    cv_.wait(lk, [&] { return !batches_.empty() || closed_ || woken_; });
    woken_ = false;
    // Let concurrent live producers join the batch.
    if (!batches_.empty() && batches_.begin()->second.live && !closed_) {
      auto deadline = batches_.begin()->second.opened + poll_;
      cv_.wait_until(lk, deadline, [&] { return closed_; });
    }
  }
  if (batches_.empty()) return std::nullopt;

  auto it = batches_.begin();
  std::uint64_t id = it->first;
  auto& events = it->second.events;
  std::vector<ExternalEvent> out;
  std::set<std::string, std::less<>> seen;
  std::deque<ExternalEvent> rest;
  for (auto& e : events) {
    if (seen.insert(e.source).second) {
      out.push_back(std::move(e));
    } else {
      rest.push_back(std::move(e));
    }
  }
  if (rest.empty()) {
    batches_.erase(it);
    open_ = std::max(open_, id + 1);
  } else {
    events = std::move(rest);
    open_ = std::max(open_, id);
  }
  return out;
}

void EventQueue::wake() {
  {
    std::lock_guard lk(mu_);
    woken_ = true;
  }
  cv_.notify_all();
}

void EventQueue::close() {
  {
    std::lock_guard lk(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool EventQueue::closed() const {
  std::lock_guard lk(mu_);
  return closed_;
}

bool EventQueue::empty() const {
  std::lock_guard lk(mu_);
  return batches_.empty();
}

std::size_t EventQueue::size() const {
  std::lock_guard lk(mu_);
  std::size_t n = 0;
  for (const auto& [id, p] : batches_) n += p.events.size();
  return n;
}

}  // namespace haai::io
