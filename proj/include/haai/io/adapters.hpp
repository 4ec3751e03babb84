#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "haai/io/event_queue.hpp"

namespace haai::io {

/// Feeds one source key. Adapters see only the event queue.
class SourceAdapter {
 public:
  explicit SourceAdapter(std::string key) : key_(std::move(key)) {}
  virtual ~SourceAdapter() = default;
  SourceAdapter(const SourceAdapter&) = delete;
  SourceAdapter& operator=(const SourceAdapter&) = delete;

  const std::string& key() const { return key_; }
  virtual void start(EventQueue& queue) = 0;
  virtual void stop() = 0;
  /// True once the adapter will produce nothing more.
  bool finished() const { return finished_; }

 protected:
  std::string key_;
  std::atomic<bool> finished_{false};
};

/// Receives sealed emissions of one signal, in trace order.
class SinkAdapter {
 public:
  virtual ~SinkAdapter() = default;
  virtual void deliver(const Value& value) = 0;
  virtual void stop() {}
};

/// Emits 0, 1, 2, ... once per period, the first tick immediately.
class TimerSource : public SourceAdapter {
 public:
  TimerSource(std::string key, std::chrono::milliseconds period);
  ~TimerSource() override;
  void start(EventQueue& queue) override;
  void stop() override;

 private:
  std::chrono::milliseconds period_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stopping_ = false;
  std::thread thread_;
};

/// One string event per line read from a file descriptor.
class LineSource : public SourceAdapter {
 public:
  explicit LineSource(std::string key, int fd = 0);
  ~LineSource() override;
  void start(EventQueue& queue) override;
  void stop() override;

 private:
  int fd_;
  std::atomic<bool> stopping_{false};
  std::thread thread_;
};

/// JSON text frames from a WebSocket server.
class WsSource : public SourceAdapter {
 public:
  /// `address` is host:port with an optional /path and ws:// prefix.
  explicit WsSource(std::string address);
  ~WsSource() override;
  void start(EventQueue& queue) override;  // throws ConnectFailed
  void stop() override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class CollectSink : public SinkAdapter {
 public:
  void deliver(const Value& value) override;
  std::vector<Value> values() const;

 private:
  mutable std::mutex mu_;
  std::vector<Value> values_;
};

/// One line per emission; strings are written without quotes.
class StdoutSink : public SinkAdapter {
 public:
  explicit StdoutSink(std::ostream& out) : out_(out) {}
  void deliver(const Value& value) override;

 private:
  std::ostream& out_;
};

/// Sends each value as a JSON text frame from a delivery worker. A frame
/// is attempted three times (reconnecting in between) and then dropped.
class WsSink : public SinkAdapter {
 public:
  static constexpr std::size_t kCapacity = 1024;
  static constexpr int kAttempts = 3;

  explicit WsSink(std::string address);
  ~WsSink() override;
  void start();  // throws ConnectFailed
  void deliver(const Value& value) override;
  void stop() override;
  std::size_t dropped() const { return dropped_; }

 private:
  void run();

  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string address_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> pending_;
  bool stopping_ = false;
  std::atomic<std::size_t> dropped_{0};
  std::thread worker_;
};

struct Address {
  std::string host;
  std::string port;
  std::string path = "/";
};
/// Throws ConnectFailed when the address does not parse.
Address parse_address(const std::string& address);

/// Wire format: one JSON value per frame; arrays become vectors.
Value decode_payload(const std::string& text);  // throws BadPayload
std::string encode_payload(const Value& value);

}  // namespace haai::io
