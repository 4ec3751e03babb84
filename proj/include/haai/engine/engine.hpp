#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "haai/core/json.hpp"
#include "haai/core/model.hpp"

namespace haai {

struct EngineOptions {
  /// Maximum structural nesting of deployments (recursion guard).
  std::uint32_t depth_budget = 10000;
  /// Resolve name paths when a turn is sealed. Deep recursive chains make
  /// paths long; tests that only count events can switch this off.
  bool trace_names = true;
};

/// One side of an `if`: either an eagerly resolved signal (bare identifier
/// or literal) or a lazily expanded region.
struct BranchState {
  syntax::ExprPtr expr;
  bool eager = false;
  bool expanded = false;
  Signal* out = nullptr;
  Deployment* region = nullptr;
};

struct ConditionalNode {
  Signal* cond = nullptr;
  Signal* out = nullptr;
  Deployment* owner = nullptr;
  Environment env;
  BranchState branches[2];  // [0] alternate, [1] consequent
  std::optional<bool> active;
  std::uint64_t error_turn = 0;
};

struct DynamicOperatorNode {
  Signal* op = nullptr;
  std::vector<Signal*> operands;
  std::vector<Signal*> outs;  // outs[0] is the node's own signal
  Deployment* owner = nullptr;
  std::map<const void*, Deployment*> cache;
  Deployment* active = nullptr;
  /// Identity of a reactor whose deployment failed; not retried.
  const void* failed = nullptr;
  std::uint64_t error_turn = 0;
  SourceSpan span;
};

struct TraceEvent {
  enum class Kind { Emit, Commit, Switch, Error };
  Kind kind = Kind::Emit;
  std::uint64_t turn = 0;
  std::string id;  // "s<N>" or "d<N>"
  std::string name_path;
  Json value;
  /// Set for emissions; lets tests inspect values without JSON.
  const Signal* signal = nullptr;
  std::optional<Value> data;
};

std::string_view to_string(TraceEvent::Kind kind);

struct TurnError {
  ErrorCode code = ErrorCode::PrimitiveError;
  std::string message;
  std::string id;
  std::string name_path;
};

struct TurnReport {
  std::uint64_t turn = 0;
  std::vector<std::pair<SignalId, Value>> seeded;
  /// Computed signals that emitted, in emission order.
  std::vector<SignalId> recomputed;
  std::vector<TraceEvent> events;
  std::size_t switches = 0;
  std::size_t commits = 0;
  std::size_t deployments_created = 0;
  std::vector<TurnError> errors;
  std::chrono::nanoseconds elapsed{0};

  /// One JSON object per event: turn, kind, signal_or_deployment_id,
  /// name_path, value.
  std::string to_jsonl() const;
  /// Last value emitted by `id` during this turn.
  std::optional<Value> emitted(SignalId id) const;
  std::size_t count(TraceEvent::Kind kind) const;
};

struct Injection {
  Signal* source = nullptr;
  Value value;
};
using Batch = std::vector<Injection>;

/// Recorded when a data producing/consuming reactor is deployed; the
/// runtime attaches the matching adapter.
struct IoRequest {
  std::string reactor;
  IoDirection direction = IoDirection::Producer;
  std::vector<Value> config;
  std::string key;
  Signal* signal = nullptr;
};

struct GlobalDeployment {
  Deployment* deployment = nullptr;
  std::vector<Signal*> targets;
  TurnReport report;
  bool ok() const { return report.errors.empty(); }
};

struct EngineStats {
  std::size_t signals = 0;
  std::size_t deployments = 0;
  std::size_t turns = 0;
};

class Engine {
 public:
  explicit Engine(EngineOptions options = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  ReactorTable& table() { return table_; }
  const ReactorTable& table() const { return table_; }
  const EngineOptions& options() const { return options_; }

  /// Registers the program's reactors, then deploys each global signal
  /// definition in its own turn.
  std::vector<TurnReport> load(const syntax::Program& program);
  /// Returns true when an existing reactor of the same name was replaced.
  bool define_reactor(const syntax::ReactorDefPtr& def);
  GlobalDeployment deploy_global(const syntax::SignalDef& def);
  /// Deploys `reactor` on existing signals inside a fresh turn; the sinks
  /// are returned through `sinks`.
  TurnReport deploy_reactor(const ReactorValue& reactor, const std::vector<Signal*>& args,
                            std::vector<Signal*>* sinks = nullptr, const std::string& name = "main");

  /// Creates an unowned source signal (tests and embedding code).
  Signal* make_source(const std::string& key);

  TurnReport run_turn(const Batch& batch);

  Signal* global(std::string_view name) const;
  std::vector<Signal*> sources(std::string_view key) const;
  std::vector<std::string> source_keys() const;
  std::vector<IoRequest> take_io_requests();

  /// Height invariant: every signal sits strictly above its dependencies.
  bool check_heights() const;
  bool live(const Deployment* d) const;
  bool live(const Signal& s) const;
  EngineStats stats() const;
  std::uint64_t turn() const { return turn_; }
  const std::vector<std::unique_ptr<Deployment>>& deployments() const { return deployments_; }
  const std::vector<std::unique_ptr<Signal>>& signals() const { return signals_; }

 private:
  TurnReport run_turn_impl(const Batch& batch);
  GlobalDeployment deploy_global_impl(const syntax::SignalDef& def);
  TurnReport deploy_reactor_impl(const ReactorValue& reactor, const std::vector<Signal*>& args,
                                 std::vector<Signal*>* sinks, const std::string& name);

  // Construction
  Signal* new_signal(SignalKind kind, Deployment* owner, std::string label, std::vector<Signal*> deps);
  Signal* new_constant(Deployment* owner, Value value, std::string label);
  Deployment* new_deployment(DeploymentKind kind, Deployment* parent, std::string segment);
  std::vector<Signal*> eval(const syntax::ExprPtr& expr, const Environment& env, Deployment* owner,
                            std::size_t expected = 1);
  void eval_body(const syntax::Body& body, Environment env, Deployment* d);
  std::vector<Signal*> eval_deploy(const syntax::Deploy& deploy, const syntax::Expr& expr,
                                   const Environment& env, Deployment* owner, std::size_t expected);
  Signal* eval_if(const syntax::If& node, const Environment& env, Deployment* owner);
  Deployment* deploy(const ReactorValue& reactor, const std::vector<Signal*>& args, Deployment* parent,
                     const SourceSpan& span, std::size_t expected, Signal* controller = nullptr);
  void deploy_io(const IoReactorSpec& spec, const std::vector<Signal*>& args, Deployment* d, const SourceSpan& span);
  void bind_def(const syntax::SignalDef& def, const std::vector<Signal*>& signals, Environment& env,
                Deployment* owner, SignalId first_new);

  // Propagation
  void begin_turn(TurnReport& report);
  void finish_turn(TurnReport& report, std::chrono::steady_clock::time_point start);
  void drain();
  void recompute(Signal& s);
  void emit(Signal& s, Value value);
  void schedule(Signal& s);
  void require_height(Signal& s, std::uint32_t min);
  void poison(Signal& s, ErrorCode code, const std::string& message);
  void poison_deployment(Deployment& d, const Error& error);
  bool ready(const Signal& dep) const;
  void commit_trampolines();

  // Switching
  void select_branch(ConditionalNode& node);
  void select_reactor(DynamicOperatorNode& node);
  void activate(Deployment& region, const Signal* controller);
  void deactivate(Deployment& region);
  void gate(Signal& controller, Deployment& region);
  void rewire(Signal& dependent, Signal* from, Signal* to);
  void record_switch(const Signal& s, Json payload);
  void record_error(const std::string& id, const std::string& path, ErrorCode code, const std::string& message);

  EngineOptions options_;
  ReactorTable table_;
  Environment globals_;
  std::map<std::string, Signal*, std::less<>> global_signals_;
  std::multimap<std::string, Signal*, std::less<>> source_keys_;
  std::vector<IoRequest> io_requests_;

  std::vector<std::unique_ptr<Signal>> signals_;
  std::vector<std::unique_ptr<Deployment>> deployments_;
  std::vector<std::unique_ptr<Trampoline>> trampolines_;
  std::vector<std::unique_ptr<ConditionalNode>> conditionals_;
  std::vector<std::unique_ptr<DynamicOperatorNode>> dynamics_;

  std::uint64_t turn_ = 0;
  std::uint64_t epoch_ = 1;
  bool in_turn_ = false;
  std::uint32_t current_height_ = 0;
  std::set<std::pair<std::uint32_t, SignalId>> queue_;
  TurnReport* report_ = nullptr;
  std::vector<Signal*> feeding_;
};

}  // namespace haai
