#include "haai/io/runtime.hpp"

#include "haai/log.hpp"

#include "haai/stdlib/stdlib.hpp"

namespace haai::io {

Runtime::Runtime(RuntimeOptions options)
    : options_(std::move(options)), engine_(options_.engine), queue_(options_.poll) {
  stdlib::register_primitives(engine_.table());
  stdlib::register_io_reactors(engine_.table());
  if (options_.prelude) {
    stdlib::load_source(engine_.table(), *options_.prelude, "prelude");
  } else {
    stdlib::load_prelude(engine_.table());
  }
  if (options_.examples) stdlib::load_examples(engine_.table());
}

Runtime::~Runtime() {
  stop();
  queue_.close();
  for (auto& s : sources_) s->stop();
  for (auto& s : sinks_) s->stop();
}

std::vector<TurnReport> Runtime::load(std::string_view text, std::string_view file) {
  return load(syntax::parse_program(text, file));
}

std::vector<TurnReport> Runtime::load(const syntax::Program& program) {
  for (const auto& r : program.reactors()) {
    if (engine_.define_reactor(r)) log().info("reactor '{}' redefined", r->name);
  }
  std::vector<TurnReport> reports;
  for (const auto& d : program.definitions) {
    if (const auto* def = std::get_if<syntax::SignalDef>(&d)) {
      auto g = engine_.deploy_global(*def);
      after_turn(g.report);
      reports.push_back(std::move(g.report));
    }
  }
  return reports;
}

TurnReport Runtime::run_batch(const std::vector<ExternalEvent>& events) {
  Batch batch;
  for (const auto& e : events) {
    auto targets = engine_.sources(e.source);
    if (targets.empty()) {
      log().warn("event for unknown source '{}' dropped", e.source);
      continue;
    }
    for (Signal* s : targets) batch.push_back({s, e.value});
  }
  TurnReport report = engine_.run_turn(batch);
  after_turn(report);
  return report;
}

std::size_t Runtime::drain() {
  std::size_t n = 0;
  while (auto batch = queue_.next_batch(false)) {
    run_batch(*batch);
    ++n;
  }
  return n;
}

std::size_t Runtime::replay(const std::vector<ExternalEvent>& script) {
  for (const auto& e : script) queue_.enqueue(e);
  return drain();
}

void Runtime::after_turn(const TurnReport& report) {
  ++turns_;
  errors_ += report.errors.size();
  for (const auto& e : report.errors) log().error("turn {}: {}: {} at {}", report.turn, to_string(e.code), e.message, e.name_path);

  // Adapters for reactors deployed in this turn see its emissions too.
  for (const auto& req : engine_.take_io_requests()) attach(req);

  for (const auto& ev : report.events) {
    if (ev.kind != TraceEvent::Kind::Emit || ev.signal == nullptr || !ev.data) continue;
    auto it = consumers_.find(ev.signal->id);
    if (it == consumers_.end()) continue;
    for (auto& [key, sink] : it->second) {
      if (sink != nullptr) sink->deliver(*ev.data);
      std::lock_guard lk(delivered_mu_);
      delivered_[key].push_back(*ev.data);
    }
  }
  if (trace_ != nullptr) {
    *trace_ << report.to_jsonl();
    trace_->flush();
  }
  if (on_report_) on_report_(report);
}

void Runtime::attach(const IoRequest& req) {
  if (req.direction == IoDirection::Consumer) {
    SinkAdapter* sink = nullptr;
    if (req.reactor == "stdout-out") {
      sinks_.push_back(std::make_unique<StdoutSink>(*options_.out));
      sink = sinks_.back().get();
    } else if (req.reactor == "ws-out") {
      if (options_.live) {
        auto ws = std::make_unique<WsSink>(req.key);
        try {
          ws->start();
          sink = ws.get();
          sinks_.push_back(std::move(ws));
        } catch (const Error& e) {
          ++errors_;
          log().error("{}: {}", to_string(e.code()), e.detail());
        }
      } else {
        sinks_.push_back(std::make_unique<CollectSink>());
        sink = sinks_.back().get();
      }
    }
    consumers_[req.signal->id].emplace_back(req.key, sink);
    return;
  }

  if (!options_.live || req.reactor == "manual-in") return;
  std::unique_ptr<SourceAdapter> adapter;
  try {
    if (req.reactor == "ws-in") {
      adapter = std::make_unique<WsSource>(req.key);
    } else if (req.reactor == "timer") {
      const Value& period = req.config.at(0);
      if (!period.is_integer() || period.as_integer() <= 0) {
        throw Error(ErrorCode::BadPayload, "timer period must be a positive integer, got " + display(period));
      }
      adapter = std::make_unique<TimerSource>(req.key, std::chrono::milliseconds(period.as_integer()));
    } else if (req.reactor == "stdin-lines") {
      if (!options_.stdin_lines) {
        log().warn("stdin-lines is not available here; inject '{}' by hand", req.key);
        return;
      }
      adapter = std::make_unique<LineSource>(req.key);
    } else {
      return;
    }
    adapter->start(queue_);
    log().debug("adapter {} started for '{}'", req.reactor, req.key);
    sources_.push_back(std::move(adapter));
  } catch (const Error& e) {
    ++errors_;
    log().error("{}: {}", to_string(e.code()), e.detail());
  }
}

void Runtime::start() {
  if (running_) return;
  stopping_ = false;
  running_ = true;
  executor_ = std::thread([this] { loop(); });
}

void Runtime::stop() {
  if (!executor_.joinable()) return;
  stopping_ = true;
  queue_.wake();
  executor_.join();
  run_commands();
}

void Runtime::run_commands() {
  std::vector<std::function<void()>> pending;
  {
    std::lock_guard lk(commands_mu_);
    pending.swap(commands_);
  }
  for (auto& c : pending) c();
}

void Runtime::loop() {
  while (!stopping_) {
    run_commands();
    if (stopping_) break;
    if (auto batch = queue_.next_batch(true)) {
      run_batch(*batch);
    } else if (queue_.closed()) {
      break;
    }
  }
  {
    std::lock_guard lk(commands_mu_);
    running_ = false;
  }
  run_commands();
}

bool Runtime::idle() const {
  if (!queue_.empty()) return false;
  for (const auto& s : sources_) {
    if (!s->finished()) return false;
  }
  return true;
}

std::vector<Value> Runtime::delivered(const std::string& key) const {
  std::lock_guard lk(delivered_mu_);
  auto it = delivered_.find(key);
  return it == delivered_.end() ? std::vector<Value>{} : it->second;
}

}  // namespace haai::io
