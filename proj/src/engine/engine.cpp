#include "haai/engine/engine.hpp"

#include <pthread.h>

#include <algorithm>
#include <exception>
#include <functional>

namespace haai {
namespace {

// Direct graph recursion (a reactor deploying itself without an `if`)
// recurses in C++ until the depth budget stops it, so structural work runs
// on a thread whose stack is sized for the budget.
thread_local bool t_on_deep_stack = false;

struct DeepCall {
  std::function<void()> fn;
  std::exception_ptr error;
};

void* deep_entry(void* arg) {
  auto* call = static_cast<DeepCall*>(arg);
  t_on_deep_stack = true;
  try {
    call->fn();
  } catch (...) {
    call->error = std::current_exception();
  }
  return nullptr;
}

void run_deep(std::uint32_t budget, std::function<void()> fn) {
  if (t_on_deep_stack) {
    fn();
    return;
  }
  DeepCall call{std::move(fn), nullptr};
  std::size_t stack = (std::size_t{64} << 20) + std::size_t{budget} * 8192;
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, stack);
  pthread_t thread;
  int rc = pthread_create(&thread, &attr, deep_entry, &call);
  pthread_attr_destroy(&attr);
  if (rc != 0) {
    deep_entry(&call);
    t_on_deep_stack = false;
  } else {
    pthread_join(thread, nullptr);
  }
  if (call.error) std::rethrow_exception(call.error);
}

std::string sid(const Signal& s) { return "s" + std::to_string(s.id); }
std::string did(const Deployment& d) { return "d" + std::to_string(d.id); }

bool within(const Deployment* d, const Deployment* root) {
  for (; d != nullptr; d = d->parent) {
    if (d == root) return true;
  }
  return false;
}

Deployment* reactor_owner(Deployment* d) {
  while (d != nullptr && d->kind == DeploymentKind::Branch) d = d->parent;
  return d;
}

void erase_one(std::vector<Signal*>& v, const Signal* x) {
  auto it = std::find(v.begin(), v.end(), x);
  if (it != v.end()) v.erase(it);
}

std::string join(const std::vector<std::string>& names, char sep) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += sep;
    out += n;
  }
  return out;
}

std::string error_message(const Error& e) {
  std::string m = e.detail();
  return m.empty() ? std::string(e.what()) : m;
}

}  // namespace

std::string_view to_string(TraceEvent::Kind kind) {
  switch (kind) {
    case TraceEvent::Kind::Emit: return "emit";
    case TraceEvent::Kind::Commit: return "commit";
    case TraceEvent::Kind::Switch: return "switch";
    case TraceEvent::Kind::Error: return "error";
  }
  return "?";
}

std::string TurnReport::to_jsonl() const {
  std::string out;
  for (const auto& e : events) {
    Json j = Json::object();
    j["turn"] = e.turn;
    j["kind"] = to_string(e.kind);
    j["signal_or_deployment_id"] = e.id;
    j["name_path"] = e.name_path;
    j["value"] = e.value;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::optional<Value> TurnReport::emitted(SignalId id) const {
  std::optional<Value> out;
  for (const auto& e : events) {
    if (e.kind == TraceEvent::Kind::Emit && e.signal != nullptr && e.signal->id == id) out = e.data;
  }
  return out;
}

std::size_t TurnReport::count(TraceEvent::Kind kind) const {
  return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [&](const auto& e) { return e.kind == kind; }));
}

Engine::Engine(EngineOptions options) : options_(options) {}
Engine::~Engine() = default;

// ---------------------------------------------------------------------------
// Public entry points

std::vector<TurnReport> Engine::load(const syntax::Program& program) {
  std::vector<TurnReport> reports;
  for (const auto& r : program.reactors()) define_reactor(r);
  for (const auto& d : program.definitions) {
    if (const auto* def = std::get_if<syntax::SignalDef>(&d)) reports.push_back(deploy_global(*def).report);
  }
  return reports;
}

bool Engine::define_reactor(const syntax::ReactorDefPtr& def) {
  return table_.define(def->name, ReactorValue::named(def));
}

GlobalDeployment Engine::deploy_global(const syntax::SignalDef& def) {
  GlobalDeployment out;
  run_deep(options_.depth_budget, [&] { out = deploy_global_impl(def); });
  return out;
}

TurnReport Engine::deploy_reactor(const ReactorValue& reactor, const std::vector<Signal*>& args,
                                  std::vector<Signal*>* sinks, const std::string& name) {
  TurnReport out;
  run_deep(options_.depth_budget, [&] { out = deploy_reactor_impl(reactor, args, sinks, name); });
  return out;
}

TurnReport Engine::run_turn(const Batch& batch) {
  for (const auto& inj : batch) {
    if (inj.source == nullptr || inj.source->kind != SignalKind::Source) {
      throw Error(ErrorCode::NotASource, "injection target is not a source signal");
    }
  }
  TurnReport out;
  run_deep(options_.depth_budget, [&] { out = run_turn_impl(batch); });
  return out;
}

Signal* Engine::make_source(const std::string& key) {
  Signal* s = new_signal(SignalKind::Source, nullptr, key, {});
  source_keys_.emplace(key, s);
  return s;
}

Signal* Engine::global(std::string_view name) const {
  auto it = global_signals_.find(name);
  return it == global_signals_.end() ? nullptr : it->second;
}

std::vector<Signal*> Engine::sources(std::string_view key) const {
  std::vector<Signal*> out;
  auto [lo, hi] = source_keys_.equal_range(key);
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  return out;
}

std::vector<std::string> Engine::source_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : source_keys_) {
    if (out.empty() || out.back() != k) out.push_back(k);
  }
  return out;
}

std::vector<IoRequest> Engine::take_io_requests() { return std::exchange(io_requests_, {}); }

bool Engine::check_heights() const {
  for (const auto& s : signals_) {
    for (const Signal* d : s->deps) {
      if (s->height <= d->height) return false;
    }
    for (const Deployment* region : s->gated) {
      std::vector<const Deployment*> stack{region};
      while (!stack.empty()) {
        const Deployment* r = stack.back();
        stack.pop_back();
        for (const Signal* x : r->internals) {
          if (x->computed() && x->height <= s->height) return false;
        }
        for (const Deployment* c : r->children) stack.push_back(c);
      }
    }
  }
  return true;
}

bool Engine::live(const Deployment* d) const {
  std::vector<const Deployment*> chain;
  bool result = true;
  for (; d != nullptr; d = d->parent) {
    if (d->live_epoch == epoch_) {
      result = d->live_cached;
      break;
    }
    chain.push_back(d);
  }
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const Deployment* x = *it;
    result = result && x->active && !x->poisoned;
    x->live_epoch = epoch_;
    x->live_cached = result;
  }
  return result;
}

bool Engine::live(const Signal& s) const { return live(s.owner); }

EngineStats Engine::stats() const { return EngineStats{signals_.size(), deployments_.size(), turn_}; }

// ---------------------------------------------------------------------------
// Turns

void Engine::begin_turn(TurnReport& report) {
  report = TurnReport{};
  report.turn = ++turn_;
  report_ = &report;
  in_turn_ = true;
  current_height_ = 0;
  queue_.clear();
  feeding_.clear();
}

void Engine::finish_turn(TurnReport& report, std::chrono::steady_clock::time_point start) {
  drain();
  commit_trampolines();
  in_turn_ = false;
  if (options_.trace_names) {
    for (auto& e : report.events) {
      if (e.signal != nullptr && e.kind != TraceEvent::Kind::Error) e.name_path = path_of(*e.signal);
    }
  }
  report.elapsed = std::chrono::steady_clock::now() - start;
  report_ = nullptr;
}

TurnReport Engine::run_turn_impl(const Batch& batch) {
  auto start = std::chrono::steady_clock::now();
  TurnReport report;
  begin_turn(report);
  std::map<SignalId, std::pair<Signal*, Value>> seeds;
  for (const auto& inj : batch) seeds.insert_or_assign(inj.source->id, std::make_pair(inj.source, inj.value));
  for (auto& [id, seed] : seeds) {
    if (!live(*seed.first)) continue;
    report.seeded.emplace_back(id, seed.second);
    emit(*seed.first, seed.second);
  }
  finish_turn(report, start);
  return report;
}

GlobalDeployment Engine::deploy_global_impl(const syntax::SignalDef& def) {
  auto start = std::chrono::steady_clock::now();
  GlobalDeployment out;
  begin_turn(out.report);
  Deployment* d = new_deployment(DeploymentKind::Global, nullptr, join(def.targets, ','));
  out.deployment = d;
  std::vector<Signal*> signals;
  try {
    SignalId first = signals_.size() + 1;
    signals = eval(def.expr, globals_, d, def.targets.size());
    Environment scratch;
    bind_def(def, signals, scratch, d, first);
  } catch (const Error& e) {
    poison_deployment(*d, e);
    signals.clear();
    for (const auto& t : def.targets) signals.push_back(new_signal(SignalKind::Placeholder, d, t, {}));
  }
  for (std::size_t i = 0; i < def.targets.size(); ++i) {
    const std::string& t = def.targets[i];
    Signal* s = signals[i];
    globals_.bind(t, s);
    global_signals_.insert_or_assign(t, s);
    if (s->kind == SignalKind::Source) source_keys_.emplace(t, s);
  }
  out.targets = signals;
  finish_turn(out.report, start);
  return out;
}

TurnReport Engine::deploy_reactor_impl(const ReactorValue& reactor, const std::vector<Signal*>& args,
                                       std::vector<Signal*>* sinks, const std::string& name) {
  auto start = std::chrono::steady_clock::now();
  TurnReport report;
  begin_turn(report);
  Deployment* root = new_deployment(DeploymentKind::Global, nullptr, name);
  try {
    Deployment* d = deploy(reactor, args, root, {}, reactor.sink_count());
    if (sinks != nullptr) *sinks = d->sinks;
  } catch (const Error& e) {
    poison_deployment(*root, e);
    if (sinks != nullptr) sinks->clear();
  }
  finish_turn(report, start);
  return report;
}

// ---------------------------------------------------------------------------
// Construction

Signal* Engine::new_signal(SignalKind kind, Deployment* owner, std::string label, std::vector<Signal*> deps) {
  auto s = std::make_unique<Signal>();
  s->id = signals_.size() + 1;
  s->kind = kind;
  s->owner = owner;
  s->label = std::move(label);
  std::uint32_t h = owner != nullptr ? owner->floor : 0;
  for (Signal* d : deps) {
    h = std::max(h, d->height + 1);
    d->dependents.push_back(s.get());
  }
  if (s->computed() && in_turn_) h = std::max(h, current_height_ + 1);
  s->height = h;
  s->deps = std::move(deps);
  Signal* raw = s.get();
  signals_.push_back(std::move(s));
  if (owner != nullptr) owner->internals.push_back(raw);
  return raw;
}

Signal* Engine::new_constant(Deployment* owner, Value value, std::string label) {
  Signal* s = new_signal(SignalKind::Constant, owner, std::move(label), {});
  emit(*s, std::move(value));
  return s;
}

Deployment* Engine::new_deployment(DeploymentKind kind, Deployment* parent, std::string segment) {
  auto d = std::make_unique<Deployment>();
  d->id = deployments_.size() + 1;
  d->kind = kind;
  d->segment = std::move(segment);
  d->parent = parent;
  if (parent != nullptr) {
    d->depth = parent->depth + (kind == DeploymentKind::Branch ? 0 : 1);
    d->floor = parent->floor;
    parent->children.push_back(d.get());
  }
  Deployment* raw = d.get();
  deployments_.push_back(std::move(d));
  if (report_ != nullptr) ++report_->deployments_created;
  return raw;
}

std::vector<Signal*> Engine::eval(const syntax::ExprPtr& ptr, const Environment& env, Deployment* owner,
                                  std::size_t expected) {
  const syntax::Expr& expr = *ptr;
  if (const auto* deploy = expr.as<syntax::Deploy>()) return eval_deploy(*deploy, expr, env, owner, expected);
  if (expected != 1) {
    throw Error(ErrorCode::MultiSinkArityMismatch,
                std::to_string(expected) + " targets bound to a single-signal expression", expr.span);
  }
  if (const auto* ref = expr.as<syntax::VarRef>()) {
    Binding b = lookup(env, table_, ref->name, expr.span);
    if (auto* s = std::get_if<Signal*>(&b)) return {*s};
    return {new_constant(owner, Value(std::get<ReactorValue>(b)), ref->name)};
  }
  if (const auto* lit = expr.as<syntax::Literal>()) {
    return {new_constant(owner, Value::from_literal(lit->value), syntax::print(expr))};
  }
  if (const auto* node = expr.as<syntax::If>()) return {eval_if(*node, env, owner)};
  return {new_constant(owner, make_capture(ptr, env, table_), "rho")};
}

std::vector<Signal*> Engine::eval_deploy(const syntax::Deploy& node, const syntax::Expr& expr,
                                         const Environment& env, Deployment* owner, std::size_t expected) {
  std::optional<ReactorValue> fixed;
  Signal* op = nullptr;
  if (const auto* ref = node.op->as<syntax::VarRef>()) {
    Binding b = lookup(env, table_, ref->name, node.op->span);
    if (auto* r = std::get_if<ReactorValue>(&b)) fixed = *r;
    else op = std::get<Signal*>(b);
  } else {
    op = eval(node.op, env, owner).front();
  }

  std::vector<Signal*> args;
  args.reserve(node.operands.size());
  for (const auto& o : node.operands) args.push_back(eval(o, env, owner).front());

  if (fixed) return deploy(*fixed, args, owner, expr.span, expected)->sinks;

  auto dyn = std::make_unique<DynamicOperatorNode>();
  dyn->op = op;
  dyn->operands = args;
  dyn->owner = owner;
  dyn->span = expr.span;
  std::string label = "apply";
  if (const auto* ref = node.op->as<syntax::VarRef>()) label = ref->name;
  for (std::size_t i = 0; i < expected; ++i) {
    Signal* out = new_signal(i == 0 ? SignalKind::Dynamic : SignalKind::Projection, owner,
                             i == 0 ? label : label + "#" + std::to_string(i), {op});
    out->dynamic = dyn.get();
    out->projection_index = i;
    dyn->outs.push_back(out);
  }
  DynamicOperatorNode& ref = *dyn;
  dynamics_.push_back(std::move(dyn));
  if (op->valued()) select_reactor(ref);
  for (Signal* out : ref.outs) schedule(*out);
  return ref.outs;
}

Signal* Engine::eval_if(const syntax::If& node, const Environment& env, Deployment* owner) {
  Signal* cond = eval(node.cond, env, owner).front();
  auto cn = std::make_unique<ConditionalNode>();
  cn->cond = cond;
  cn->owner = owner;
  cn->env = env;
  cn->branches[1].expr = node.consequent;
  cn->branches[0].expr = node.alternate;
  Signal* out = new_signal(SignalKind::Conditional, owner, "if", {cond});
  out->conditional = cn.get();
  cn->out = out;
  for (int b : {1, 0}) {
    BranchState& br = cn->branches[b];
    // A bare identifier or literal needs no region: it is resolved here and
    // updates independently of the conditional.
    if (br.expr->as<syntax::VarRef>() != nullptr || br.expr->as<syntax::Literal>() != nullptr) {
      br.eager = true;
      br.out = eval(br.expr, env, owner).front();
    }
  }
  ConditionalNode& ref = *cn;
  conditionals_.push_back(std::move(cn));
  if (ready(*cond)) select_branch(ref);
  schedule(*out);
  return out;
}

Deployment* Engine::deploy(const ReactorValue& reactor, const std::vector<Signal*>& args, Deployment* parent,
                           const SourceSpan& span, std::size_t expected, Signal* controller) {
  std::size_t arity = reactor.arity();
  if (reactor.variadic() ? args.size() < arity : args.size() != arity) {
    throw Error(ErrorCode::ArityMismatch,
                "'" + reactor.name() + "' expects " + (reactor.variadic() ? "at least " : "") + std::to_string(arity) +
                    " source(s), got " + std::to_string(args.size()),
                span);
  }
  if (parent != nullptr && parent->depth + 1 > options_.depth_budget) {
    throw Error(ErrorCode::DepthExceeded,
                "deployment depth exceeds budget " + std::to_string(options_.depth_budget) + " while deploying '" +
                    reactor.name() + "'",
                span);
  }
  Deployment* d = new_deployment(DeploymentKind::Reactor, parent, reactor.name());
  d->reactor = reactor;
  d->explicit_sources = args;
  if (controller != nullptr) gate(*controller, *d);

  try {
    switch (reactor.kind()) {
      case ReactorValue::Kind::Primitive: {
        Signal* s = new_signal(SignalKind::Primitive, d, "", args);
        s->primitive = &reactor.as_primitive();
        d->sinks.push_back(s);
        schedule(*s);
        break;
      }
      case ReactorValue::Kind::Named: {
        const auto& def = reactor.as_named();
        Environment env;
        for (std::size_t i = 0; i < args.size(); ++i) env.bind(def.params[i], args[i]);
        for (const auto& decl : def.trampolines) {
          auto t = std::make_unique<Trampoline>();
          t->name = decl.name;
          t->init_expr = decl.init;
          t->owner = d;
          t->init_signal = eval(decl.init, env, d).front();
          std::vector<Signal*> deps = args;
          if (std::find(deps.begin(), deps.end(), t->init_signal) == deps.end()) deps.push_back(t->init_signal);
          Signal* s = new_signal(SignalKind::Trampoline, d, decl.name, std::move(deps));
          s->trampoline = t.get();
          t->signal = s;
          env.bind(decl.name, s);
          d->trampolines.push_back(t.get());
          trampolines_.push_back(std::move(t));
          schedule(*s);
        }
        eval_body(def.body, std::move(env), d);
        break;
      }
      case ReactorValue::Kind::Capture: {
        const auto& cap = reactor.as_capture();
        for (const auto& [name, b] : cap.snapshot) {
          if (auto* s = std::get_if<Signal*>(&b)) d->implicit_sources.push_back(*s);
        }
        Environment env = Environment::from_bindings(cap.snapshot).extend();
        for (std::size_t i = 0; i < args.size(); ++i) env.bind(cap.rho().params[i], args[i]);
        eval_body(cap.rho().body, std::move(env), d);
        break;
      }
      case ReactorValue::Kind::Io:
        deploy_io(reactor.as_io(), args, d, span);
        break;
    }
    if (d->sinks.size() != expected) {
      throw Error(ErrorCode::MultiSinkArityMismatch,
                  "'" + reactor.name() + "' has " + std::to_string(d->sinks.size()) + " sink(s), " +
                      std::to_string(expected) + " expected",
                  span);
    }
  } catch (const Error&) {
    // Partially built structure must never run.
    d->poisoned = true;
    ++epoch_;
    throw;
  }
  return d;
}

void Engine::eval_body(const syntax::Body& body, Environment env, Deployment* d) {
  for (const auto& def : body.defs) {
    SignalId first = signals_.size() + 1;
    auto signals = eval(def.expr, env, d, def.targets.size());
    bind_def(def, signals, env, d, first);
  }
  for (const auto& e : body.sinks) d->sinks.push_back(eval(e, env, d).front());
  for (std::size_t i = 0; i < body.updates.size() && i < d->trampolines.size(); ++i) {
    Signal* u = eval(body.updates[i], env, d).front();
    Trampoline* t = d->trampolines[i];
    t->update_signal = u;
    u->feeds.push_back(t);
  }
}

void Engine::bind_def(const syntax::SignalDef& def, const std::vector<Signal*>& signals, Environment& env,
                      Deployment* owner, SignalId first_new) {
  for (std::size_t i = 0; i < def.targets.size(); ++i) {
    Signal* s = signals[i];
    env.bind(def.targets[i], s);
    if (!s->renamed && s->id >= first_new) {
      s->renamed = true;
      s->name_base = owner;
      s->label = def.targets[i];
    }
  }
}

void Engine::deploy_io(const IoReactorSpec& spec, const std::vector<Signal*>& args, Deployment* d,
                       const SourceSpan& span) {
  IoRequest req;
  req.reactor = spec.name;
  req.direction = spec.direction;
  std::size_t n_config = std::min(spec.config_arity, args.size());
  for (std::size_t i = 0; i < n_config; ++i) {
    const Signal* a = args[i];
    if (a->kind != SignalKind::Constant || !a->valued()) {
      throw Error(ErrorCode::NotConstant, "'" + spec.name + "' needs a constant configuration operand", span);
    }
    req.config.push_back(*a->value);
  }
  if (req.config.empty()) {
    req.key = spec.name;
  } else if (req.config.front().is_string()) {
    req.key = req.config.front().as_string();
  } else {
    req.key = spec.name + ":" + display(req.config.front());
  }
  if (spec.direction == IoDirection::Producer) {
    Signal* s = new_signal(SignalKind::Source, d, "", {});
    d->sinks.push_back(s);
    source_keys_.emplace(req.key, s);
    req.signal = s;
  } else {
    Signal* m = new_signal(SignalKind::Mirror, d, "", {args.back()});
    d->sinks.push_back(m);
    req.signal = m;
    schedule(*m);
  }
  io_requests_.push_back(std::move(req));
}

// ---------------------------------------------------------------------------
// Propagation

bool Engine::ready(const Signal& dep) const { return dep.valued() && dep.poisoned_turn != turn_; }

void Engine::schedule(Signal& s) {
  if (!in_turn_ || s.in_queue || !s.computed() || !live(s)) return;
  if (s.height <= current_height_) require_height(s, current_height_ + 1);
  queue_.emplace(s.height, s.id);
  s.in_queue = true;
}

void Engine::require_height(Signal& start, std::uint32_t min) {
  std::vector<std::pair<Signal*, std::uint32_t>> work{{&start, min}};
  while (!work.empty()) {
    auto [x, m] = work.back();
    work.pop_back();
    if (x->height >= m) continue;
    if (x->in_queue) {
      queue_.erase({x->height, x->id});
      x->height = m;
      queue_.emplace(x->height, x->id);
    } else {
      x->height = m;
    }
    for (Signal* d : x->dependents) work.emplace_back(d, m + 1);
    for (Deployment* region : x->gated) {
      std::vector<Deployment*> stack{region};
      while (!stack.empty()) {
        Deployment* r = stack.back();
        stack.pop_back();
        r->floor = std::max(r->floor, m + 1);
        for (Signal* y : r->internals) {
          if (y->computed()) work.emplace_back(y, m + 1);
        }
        for (Deployment* c : r->children) stack.push_back(c);
      }
    }
  }
}

void Engine::drain() {
  while (!queue_.empty()) {
    auto [h, id] = *queue_.begin();
    queue_.erase(queue_.begin());
    Signal& s = *signals_[id - 1];
    s.in_queue = false;
    current_height_ = h;
    if (!live(s)) continue;
    recompute(s);
  }
}

void Engine::emit(Signal& s, Value value) {
  s.value = std::move(value);
  s.emitted_turn = turn_;
  if (report_ != nullptr) {
    if (s.computed()) report_->recomputed.push_back(s.id);
    TraceEvent e;
    e.kind = TraceEvent::Kind::Emit;
    e.turn = turn_;
    e.id = sid(s);
    e.value = to_json(*s.value);
    e.signal = &s;
    e.data = *s.value;
    report_->events.push_back(std::move(e));
  }
  if (!s.feeds.empty()) feeding_.push_back(&s);

  std::vector<Signal*> dependents = s.dependents;
  for (Signal* d : dependents) {
    if (!live(*d)) continue;
    // Switch as soon as the controlling signal is final for this turn, so
    // that a region about to be left never recomputes.
    if (d->kind == SignalKind::Conditional && d->conditional->cond == &s) {
      select_branch(*d->conditional);
    } else if (d->kind == SignalKind::Dynamic && d->dynamic->op == &s) {
      select_reactor(*d->dynamic);
    }
    schedule(*d);
  }
}

void Engine::recompute(Signal& s) {
  switch (s.kind) {
    case SignalKind::Primitive: {
      std::vector<Value> args;
      args.reserve(s.deps.size());
      for (const Signal* d : s.deps) {
        if (!ready(*d)) return;
        args.push_back(*d->value);
      }
      Value result;
      try {
        result = s.primitive->apply(args);
      } catch (const Error& e) {
        poison(s, e.code(), error_message(e));
        return;
      } catch (const std::exception& e) {
        poison(s, ErrorCode::PrimitiveError, e.what());
        return;
      }
      emit(s, std::move(result));
      return;
    }
    case SignalKind::Conditional: {
      ConditionalNode& node = *s.conditional;
      if (!ready(*node.cond)) return;
      bool truth = node.cond->value->truthy();
      if (!node.active || *node.active != truth) {
        select_branch(node);
        if (!live(s)) return;
        if (s.height > current_height_) {
          schedule(s);
          return;
        }
      }
      const BranchState& br = node.branches[node.active.value_or(truth)];
      if (br.out == nullptr || !ready(*br.out)) return;
      emit(s, *br.out->value);
      return;
    }
    case SignalKind::Dynamic:
    case SignalKind::Projection: {
      DynamicOperatorNode& node = *s.dynamic;
      if (!ready(*node.op)) return;
      const Value& op = *node.op->value;
      if (!op.is_reactor()) {
        select_reactor(node);
        return;
      }
      bool matches = node.active != nullptr && node.active->reactor->identity() == op.as_reactor().identity();
      if (!matches && node.failed != op.as_reactor().identity()) {
        select_reactor(node);
        if (!live(s)) return;
        if (s.height > current_height_) {
          schedule(s);
          return;
        }
      }
      if (node.active == nullptr) {
        s.poisoned_turn = turn_;
        return;
      }
      Signal* sink = node.active->sinks[s.projection_index];
      if (!ready(*sink)) return;
      emit(s, *sink->value);
      return;
    }
    case SignalKind::Trampoline: {
      Trampoline& t = *s.trampoline;
      for (const Signal* src : t.owner->explicit_sources) {
        if (!ready(*src)) return;
      }
      if (!t.current) {
        if (!ready(*t.init_signal)) return;
        t.current = *t.init_signal->value;
      }
      emit(s, *t.current);
      return;
    }
    case SignalKind::Mirror: {
      const Signal& d = *s.deps.front();
      if (!ready(d)) return;
      emit(s, *d.value);
      return;
    }
    default: return;
  }
}

void Engine::commit_trampolines() {
  std::vector<Trampoline*> due;
  for (Signal* u : feeding_) {
    if (u->emitted_turn != turn_ || !ready(*u)) continue;
    for (Trampoline* t : u->feeds) {
      if (!live(t->owner) || t->pending) continue;
      t->pending = *u->value;
      due.push_back(t);
    }
  }
  for (Trampoline* t : due) {
    t->current = std::move(*t->pending);
    t->pending.reset();
    if (report_ != nullptr) {
      ++report_->commits;
      TraceEvent e;
      e.kind = TraceEvent::Kind::Commit;
      e.turn = turn_;
      e.id = did(*t->owner);
      e.value = to_json(*t->current);
      e.signal = t->signal;
      e.data = *t->current;
      report_->events.push_back(std::move(e));
    }
  }
  feeding_.clear();
}

void Engine::poison(Signal& s, ErrorCode code, const std::string& message) {
  s.poisoned_turn = turn_;
  record_error(sid(s), path_of(s), code, message);
}

void Engine::poison_deployment(Deployment& d, const Error& error) {
  d.poisoned = true;
  ++epoch_;
  record_error(did(d), path_of(d), error.code(), error_message(error));
}

void Engine::record_error(const std::string& id, const std::string& path, ErrorCode code, const std::string& message) {
  if (report_ == nullptr) return;
  report_->errors.push_back(TurnError{code, message, id, path});
  TraceEvent e;
  e.kind = TraceEvent::Kind::Error;
  e.turn = turn_;
  e.id = id;
  e.name_path = options_.trace_names ? path : std::string();
  e.value = Json::object();
  e.value["error"] = std::string(to_string(code));
  e.value["message"] = message;
  report_->events.push_back(std::move(e));
}

void Engine::record_switch(const Signal& s, Json payload) {
  if (report_ == nullptr) return;
  ++report_->switches;
  TraceEvent e;
  e.kind = TraceEvent::Kind::Switch;
  e.turn = turn_;
  e.id = sid(s);
  e.value = std::move(payload);
  e.signal = &s;
  report_->events.push_back(std::move(e));
}

// ---------------------------------------------------------------------------
// Switching

void Engine::gate(Signal& controller, Deployment& region) {
  controller.gated.push_back(&region);
  region.floor = std::max(region.floor, controller.height + 1);
}

void Engine::rewire(Signal& dependent, Signal* from, Signal* to) {
  if (from == to) return;
  if (from != nullptr) {
    erase_one(dependent.deps, from);
    erase_one(from->dependents, &dependent);
  }
  if (to != nullptr) {
    dependent.deps.push_back(to);
    to->dependents.push_back(&dependent);
    require_height(dependent, to->height + 1);
  }
}

void Engine::deactivate(Deployment& region) {
  region.active = false;
  ++epoch_;
}

void Engine::activate(Deployment& region, const Signal* controller) {
  (void)controller;
  region.active = true;
  ++epoch_;
  // Everything reachable through active children recomputes from current
  // values. Nested switches whose controller lives outside the region may
  // have missed changes while inactive, so they re-select first.
  std::vector<Signal*> members;
  std::vector<Deployment*> stack{&region};
  while (!stack.empty()) {
    Deployment* r = stack.back();
    stack.pop_back();
    members.insert(members.end(), r->internals.begin(), r->internals.end());
    for (auto it = r->children.rbegin(); it != r->children.rend(); ++it) {
      if ((*it)->active && !(*it)->poisoned) stack.push_back(*it);
    }
  }
  for (Signal* s : members) {
    if (!s->computed() || !live(*s)) continue;
    if (s->kind == SignalKind::Conditional && !within(s->conditional->cond->owner, &region)) {
      select_branch(*s->conditional);
    } else if (s->kind == SignalKind::Dynamic && !within(s->dynamic->op->owner, &region)) {
      select_reactor(*s->dynamic);
    }
    schedule(*s);
  }
}

void Engine::select_branch(ConditionalNode& node) {
  if (!ready(*node.cond)) return;
  bool truth = node.cond->value->truthy();
  if (node.active == truth) return;
  Signal* old_out = nullptr;
  if (node.active) {
    BranchState& old = node.branches[*node.active];
    old_out = old.out;
    if (old.region != nullptr) deactivate(*old.region);
  }
  node.active = truth;
  BranchState& br = node.branches[truth];
  Json payload = Json::object();
  payload["branch"] = truth;
  record_switch(*node.out, std::move(payload));

  if (br.eager) {
    // nothing to expand
  } else if (!br.expanded) {
    br.expanded = true;
    br.region = new_deployment(DeploymentKind::Branch, node.owner, "");
    gate(*node.cond, *br.region);
    try {
      br.out = eval(br.expr, node.env, br.region).front();
    } catch (const Error& e) {
      br.region->poisoned = true;
      ++epoch_;
      rewire(*node.out, old_out, nullptr);
      if (e.code() == ErrorCode::DepthExceeded) {
        if (Deployment* owner = reactor_owner(node.owner)) poison_deployment(*owner, e);
      } else {
        poison_deployment(*br.region, e);
      }
      return;
    }
  } else {
    activate(*br.region, node.cond);
  }
  rewire(*node.out, old_out, br.out);
}

void Engine::select_reactor(DynamicOperatorNode& node) {
  if (!ready(*node.op)) return;
  const Value& v = *node.op->value;
  Signal& head = *node.outs.front();
  std::vector<Signal*> old_sinks;
  if (node.active != nullptr) old_sinks = node.active->sinks;

  auto detach = [&] {
    if (node.active != nullptr) deactivate(*node.active);
    node.active = nullptr;
    for (std::size_t i = 0; i < node.outs.size(); ++i) {
      rewire(*node.outs[i], i < old_sinks.size() ? old_sinks[i] : nullptr, nullptr);
      node.outs[i]->poisoned_turn = turn_;
    }
  };

  if (!v.is_reactor()) {
    detach();
    if (node.error_turn != turn_) {
      node.error_turn = turn_;
      record_error(sid(head), path_of(head), ErrorCode::NotAReactor,
                   "operator signal emitted " + display(v) + ", which is not a reactor");
    }
    return;
  }
  const ReactorValue& r = v.as_reactor();
  if (node.active != nullptr && node.active->reactor->identity() == r.identity()) return;
  if (node.failed == r.identity()) {
    detach();
    return;
  }

  Deployment* child = nullptr;
  auto hit = node.cache.find(r.identity());
  Json payload = Json::object();
  payload["reactor"] = r.name();
  payload["cache"] = hit != node.cache.end() ? "hit" : "miss";
  if (node.active != nullptr) deactivate(*node.active);
  record_switch(head, std::move(payload));

  if (hit != node.cache.end()) {
    child = hit->second;
    activate(*child, node.op);
  } else {
    try {
      child = deploy(r, node.operands, node.owner, node.span, node.outs.size(), node.op);
    } catch (const Error& e) {
      node.failed = r.identity();
      detach();
      if (e.code() == ErrorCode::DepthExceeded) {
        if (Deployment* owner = reactor_owner(node.owner)) poison_deployment(*owner, e);
      } else {
        record_error(sid(head), path_of(head), e.code(), error_message(e));
      }
      return;
    }
    node.cache.emplace(r.identity(), child);
  }
  node.active = child;
  for (std::size_t i = 0; i < node.outs.size(); ++i) {
    rewire(*node.outs[i], i < old_sinks.size() ? old_sinks[i] : nullptr, child->sinks[i]);
  }
}

}  // namespace haai
