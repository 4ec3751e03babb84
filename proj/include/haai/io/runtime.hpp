#pragma once

#include <atomic>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "haai/engine/engine.hpp"
#include "haai/io/adapters.hpp"
#include "haai/io/event_queue.hpp"

namespace haai::io {

struct RuntimeOptions {
  EngineOptions engine;
  std::chrono::milliseconds poll = default_poll();
  /// Start adapters for ws-in, timer and stdin-lines. Scripted runs leave
  /// them off and feed the same source keys from the script.
  bool live = true;
  /// stdin-lines may read the process's stdin (off while a REPL owns it).
  bool stdin_lines = true;
  /// Target of stdout-out.
  std::ostream* out = &std::cout;
  bool examples = false;
  /// Replaces the built-in prelude.
  std::optional<std::string> prelude;
};

/// Owns the engine, the event queue and every adapter. All engine access
/// happens on one thread: the caller's, or the executor's after start().
class Runtime {
 public:
  explicit Runtime(RuntimeOptions options = {});
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  Engine& engine() { return engine_; }
  EventQueue& queue() { return queue_; }
  const RuntimeOptions& options() const { return options_; }

  /// Registers reactors (logging redefinitions), then deploys the global
  /// definitions one turn each.
  std::vector<TurnReport> load(const syntax::Program& program);
  std::vector<TurnReport> load(std::string_view text, std::string_view file = "<input>");

  /// One turn over `events`; unknown source keys are logged and skipped.
  TurnReport run_batch(const std::vector<ExternalEvent>& events);
  /// Runs queued batches without blocking; returns the number of turns.
  std::size_t drain();
  /// Enqueues a whole script and drains it.
  std::size_t replay(const std::vector<ExternalEvent>& script);

  /// Trace lines of every sealed turn go here (nullptr: off).
  void set_trace(std::ostream* trace) { trace_ = trace; }
  /// Called with every sealed report, after sinks were served.
  void on_report(std::function<void(const TurnReport&)> callback) { on_report_ = std::move(callback); }

  // Executor thread
  void start();
  void stop();
  bool running() const { return running_; }
  /// Runs `fn` on the executor (inline when not started).
  template <class F>
  auto post(F&& fn) -> std::future<std::invoke_result_t<F, Runtime&>>;
  /// No adapter can produce more events and nothing is queued.
  bool idle() const;

  std::size_t turns() const { return turns_; }
  std::size_t error_count() const { return errors_; }
  std::size_t adapter_count() const { return sources_.size(); }
  /// Every value handed to consumers registered under `key`.
  std::vector<Value> delivered(const std::string& key) const;

 private:
  void after_turn(const TurnReport& report);
  void attach(const IoRequest& request);
  void loop();
  void run_commands();

  RuntimeOptions options_;
  Engine engine_;
  EventQueue queue_;
  std::ostream* trace_ = nullptr;
  std::function<void(const TurnReport&)> on_report_;

  std::vector<std::unique_ptr<SourceAdapter>> sources_;
  std::vector<std::unique_ptr<SinkAdapter>> sinks_;
  std::map<SignalId, std::vector<std::pair<std::string, SinkAdapter*>>> consumers_;
  mutable std::mutex delivered_mu_;
  std::map<std::string, std::vector<Value>> delivered_;

  std::size_t turns_ = 0;
  std::size_t errors_ = 0;

  std::thread executor_;
  std::atomic<bool> running_{false};
  std::atomic<bool> stopping_{false};
  std::mutex commands_mu_;
  std::vector<std::function<void()>> commands_;
};

template <class F>
auto Runtime::post(F&& fn) -> std::future<std::invoke_result_t<F, Runtime&>> {
  using R = std::invoke_result_t<F, Runtime&>;
  auto task = std::make_shared<std::packaged_task<R(Runtime&)>>(std::forward<F>(fn));
  auto fut = task->get_future();
  {
    std::unique_lock lk(commands_mu_);
    if (running_ && std::this_thread::get_id() != executor_.get_id()) {
      commands_.push_back([this, task] { (*task)(*this); });
      lk.unlock();
      queue_.wake();
      return fut;
    }
  }
  (*task)(*this);
  return fut;
}

}  // namespace haai::io
