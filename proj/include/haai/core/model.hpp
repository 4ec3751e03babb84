#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "haai/core/value.hpp"

namespace haai {

using SignalId = std::uint64_t;
using DeploymentId = std::uint64_t;

class Deployment;
struct Trampoline;
struct ConditionalNode;
struct DynamicOperatorNode;

/// How a signal obtains its value.
///   Source      fed by external events only
///   Constant    valued once, at creation
///   Primitive   sink of a primitive reactor deployment
///   Trampoline  exposes a trampoline variable, re-emitted when its deployment reacts
///   Conditional output of an `if`
///   Dynamic     first output of a deployment whose operator is a signal
///   Projection  further outputs of such a deployment
///   Mirror      pass-through sink of a data consuming reactor
///   Placeholder stands in for the targets of a failed global deployment
enum class SignalKind { Source, Constant, Primitive, Trampoline, Conditional, Dynamic, Projection, Mirror, Placeholder };

std::string_view to_string(SignalKind kind);

class Signal {
 public:
  SignalId id = 0;
  SignalKind kind = SignalKind::Constant;
  /// Path segment below the owner; empty for a deployment's own sink.
  std::string label;
  /// Set by a `def`: the signal is then named `label` below this
  /// deployment instead of below its owner.
  const Deployment* name_base = nullptr;
  bool renamed = false;

  std::optional<Value> value;
  std::uint32_t height = 0;

  /// Active dependencies; dependents are notified on every emission.
  std::vector<Signal*> deps;
  std::vector<Signal*> dependents;
  Deployment* owner = nullptr;

  // Per-kind payload; only the member matching `kind` is set.
  const PrimitiveSpec* primitive = nullptr;
  Trampoline* trampoline = nullptr;
  ConditionalNode* conditional = nullptr;
  DynamicOperatorNode* dynamic = nullptr;
  std::size_t projection_index = 0;
  /// Trampolines that commit from this signal at the end of a turn.
  std::vector<Trampoline*> feeds;
  /// Regions switched by this signal; their signals must sit above it.
  std::vector<Deployment*> gated;

  // Turn bookkeeping (owned by the engine).
  std::uint64_t emitted_turn = 0;
  std::uint64_t poisoned_turn = 0;
  bool in_queue = false;
  std::uint32_t queued_height = 0;

  bool valued() const { return value.has_value(); }
  bool computed() const {
    return kind != SignalKind::Source && kind != SignalKind::Constant && kind != SignalKind::Placeholder;
  }
};

struct Trampoline {
  std::string name;
  std::optional<Value> current;
  std::optional<Value> pending;
  syntax::ExprPtr init_expr;
  Signal* init_signal = nullptr;
  Signal* update_signal = nullptr;
  Signal* signal = nullptr;
  Deployment* owner = nullptr;
};

enum class DeploymentKind {
  Global,   // root of a top-level signal definition
  Reactor,  // instance of a primitive, named, capture or io reactor
  Branch,   // expanded consequent/alternate of a conditional
};

class Deployment {
 public:
  DeploymentId id = 0;
  DeploymentKind kind = DeploymentKind::Reactor;
  std::optional<ReactorValue> reactor;
  /// Appended to the parent's path; branch regions add nothing.
  std::string segment;
  Deployment* parent = nullptr;
  std::uint32_t depth = 0;
  /// Lower bound for the heights of signals created inside this deployment.
  std::uint32_t floor = 0;

  bool active = true;
  bool poisoned = false;

  std::vector<Signal*> explicit_sources;
  std::vector<Signal*> implicit_sources;
  /// Signals created by (and owned by) this deployment.
  std::vector<Signal*> internals;
  std::vector<Signal*> sinks;
  std::vector<Trampoline*> trampolines;
  std::vector<Deployment*> children;

  // Liveness cache, keyed by the engine's structure epoch.
  mutable std::uint64_t live_epoch = 0;
  mutable bool live_cached = false;
};

/// Slash-separated path from the global deployment down to `d`.
std::string path_of(const Deployment& d);
std::string path_of(const Signal& s);

class ReactorTable;

/// Lexical scope. Frames map identifiers to signals or reactor values; the
/// reactor table acts as the outermost frame during lookup.
class Environment {
 public:
  Environment();

  Environment extend() const;
  void bind(const std::string& name, Binding binding);
  const Binding* find(std::string_view name) const;
  /// Frame holding exactly `bindings`, with no parent.
  static Environment from_bindings(Bindings bindings);

 private:
  struct Frame {
    Bindings bindings;
    std::shared_ptr<const Frame> parent;
  };
  explicit Environment(std::shared_ptr<Frame> frame) : frame_(std::move(frame)) {}
  std::shared_ptr<Frame> frame_;
};

class ReactorTable {
 public:
  /// Returns true when an existing entry was replaced.
  bool define(const std::string& name, ReactorValue value);
  const ReactorValue* find(std::string_view name) const;
  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, ReactorValue, std::less<>> entries_;
};

/// Innermost binding wins; the reactor table is consulted last.
Binding lookup(const Environment& env, const ReactorTable& table, std::string_view name,
               const SourceSpan& span = {});

/// Identifiers a rho body refers to that it does not bind itself.
std::set<std::string> free_identifiers(const syntax::Rho& rho);

/// Closes a rho over the signals its free identifiers currently denote.
Value make_capture(const syntax::ExprPtr& rho_expr, const Environment& env, const ReactorTable& table);

}  // namespace haai
