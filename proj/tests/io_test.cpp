#include <doctest.h>
#include <unistd.h>

#include <atomic>
#include <random>
#include <sstream>

#include "haai/io/replay.hpp"
#include "haai/io/runtime.hpp"
#include "support.hpp"
#include "ws_server.hpp"

using namespace haai;
using namespace haai::io;
using namespace std::chrono_literals;

namespace {

std::vector<std::string> sources_of(const std::vector<ExternalEvent>& batch) {
  std::vector<std::string> out;
  for (const auto& e : batch) out.push_back(e.source);
  return out;
}

template <class Pred>
bool wait_for(Pred pred, std::chrono::milliseconds limit = 5000ms) {
  auto end = std::chrono::steady_clock::now() + limit;
  while (!pred()) {
    if (std::chrono::steady_clock::now() > end) return false;
    std::this_thread::sleep_for(2ms);
  }
  return true;
}

RuntimeOptions scripted(std::ostream* out = nullptr) {
  RuntimeOptions o;
  o.live = false;
  if (out != nullptr) o.out = out;
  return o;
}

}  // namespace

TEST_CASE("queue hands out the oldest batch first") {
  EventQueue q(0ms);
  q.enqueue({"a", Value(std::int64_t{1}), 1});
  q.enqueue({"c", Value(std::int64_t{3}), 2});
  q.enqueue({"b", Value(std::int64_t{2}), 1});
  CHECK(sources_of(*q.next_batch(false)) == std::vector<std::string>{"a", "b"});
  CHECK(sources_of(*q.next_batch(false)) == std::vector<std::string>{"c"});
  CHECK_FALSE(q.next_batch(false).has_value());
}

TEST_CASE("repeated source in one batch spills into the next call") {
  EventQueue q(0ms);
  q.enqueue({"a", Value(std::int64_t{1}), 4});
  q.enqueue({"a", Value(std::int64_t{2}), 4});
  q.enqueue({"b", Value(std::int64_t{3}), 4});
  auto first = *q.next_batch(false);
  REQUIRE(first.size() == 2);
  CHECK(first[0].value == Value(std::int64_t{1}));
  auto second = *q.next_batch(false);
  REQUIRE(second.size() == 1);
  CHECK(second[0].value == Value(std::int64_t{2}));
}

TEST_CASE("live pushes of one source occupy consecutive batches") {
  EventQueue q(0ms);
  CHECK(q.push("a", Value(std::int64_t{1})) == 0);
  CHECK(q.push("a", Value(std::int64_t{2})) == 1);
  CHECK(q.push("b", Value(std::int64_t{3})) == 0);
  CHECK(q.next_batch(false)->size() == 2);
  CHECK(q.push("b", Value(std::int64_t{4})) == 1);
  CHECK(q.push("c", Value(std::int64_t{5})) == 1);
  CHECK(q.next_batch(false)->size() == 3);
  CHECK(q.empty());
}

TEST_CASE("closed queue rejects events") {
  EventQueue q(0ms);
  q.close();
  try {
    q.push("a", Value(std::int64_t{1}));
    FAIL("expected QueueClosed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::QueueClosed);
  }
  CHECK_THROWS_AS(q.enqueue({"a", Value(true), 0}), Error);
  CHECK_FALSE(q.next_batch(true).has_value());
}

TEST_CASE("wake releases a blocked consumer") {
  EventQueue q(0ms);
  std::thread t([&] {
    std::this_thread::sleep_for(20ms);
    q.wake();
  });
  CHECK_FALSE(q.next_batch(true).has_value());
  t.join();
}

TEST_CASE("property: interleaved producers keep per-producer order") {
  std::mt19937 rng(7);
  for (int round = 0; round < 200; ++round) {
    EventQueue q(0ms);
    std::map<std::string, std::int64_t> sent, seen;
    std::vector<std::string> names{"p", "q", "r"};
    std::size_t total = 40 + rng() % 40;
    // Seeded scheduler: each step either a producer pushes or the consumer drains one batch.
    auto consume = [&] {
      auto batch = q.next_batch(false);
      if (!batch) return;
      std::set<std::string> in_batch;
      for (const auto& e : *batch) {
        CHECK(in_batch.insert(e.source).second);
        CHECK(e.value.as_integer() == seen[e.source]);
        ++seen[e.source];
      }
    };
    for (std::size_t step = 0; step < total; ++step) {
      if (rng() % 3 == 0) {
        consume();
      } else {
        const auto& n = names[rng() % names.size()];
        q.push(n, Value(sent[n]++));
      }
    }
    while (!q.empty()) consume();
    CHECK(seen == sent);
  }
}

TEST_CASE("threaded producers keep per-producer order") {
  EventQueue q(1ms);
  constexpr std::int64_t kPerProducer = 500;
  std::atomic<int> done{0};
  std::vector<std::thread> producers;
  for (int p = 0; p < 3; ++p) {
    producers.emplace_back([&, p] {
      std::mt19937 rng(static_cast<unsigned>(p));
      for (std::int64_t i = 0; i < kPerProducer; ++i) {
        q.push("p" + std::to_string(p), Value(i));
        if (rng() % 16 == 0) std::this_thread::yield();
      }
      ++done;
    });
  }
  std::map<std::string, std::int64_t> seen;
  while (done < 3 || !q.empty()) {
    auto batch = q.next_batch(false);
    if (!batch) {
      std::this_thread::yield();
      continue;
    }
    for (const auto& e : *batch) {
      CHECK(e.value.as_integer() == seen[e.source]);
      ++seen[e.source];
    }
  }
  for (auto& t : producers) t.join();
  for (const auto& [k, n] : seen) CHECK(n == kPerProducer);
  CHECK(seen.size() == 3);
}

TEST_CASE("replay script parsing") {
  auto events = parse_script("{\"batch\":1,\"source\":\"x\",\"value\":3}\n\n{\"batch\":2,\"source\":\"y\",\"value\":[1,2.5]}\n");
  REQUIRE(events.size() == 2);
  CHECK(events[1].value.is_vector());
  CHECK(parse_script(to_jsonl(events)).size() == 2);

  for (const char* bad : {"nope", "{\"source\":\"x\",\"value\":1}", "{\"batch\":-1,\"source\":\"x\",\"value\":1}",
                          "{\"batch\":1,\"source\":2,\"value\":1}", "{\"batch\":1,\"source\":\"x\"}",
                          "{\"batch\":1,\"source\":\"x\",\"value\":null}"}) {
    try {
      parse_script(bad, "s.jsonl");
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadScript);
      CHECK(e.span().line == 1);
    }
  }
  try {
    load_script("/nonexistent/script.jsonl");
    FAIL("expected FileNotFound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FileNotFound);
  }
}

TEST_CASE("three script batches run three turns") {
  Runtime rt(scripted());
  rt.load("(def x (manual-in \"x\")) (def y (+ x 1))");
  std::size_t before = rt.turns();
  auto script = parse_script(
      "{\"batch\":0,\"source\":\"x\",\"value\":1}\n"
      "{\"batch\":1,\"source\":\"x\",\"value\":2}\n"
      "{\"batch\":5,\"source\":\"x\",\"value\":3}\n");
  CHECK(rt.replay(script) == 3);
  CHECK(rt.turns() - before == 3);
  CHECK(rt.engine().global("y")->value == Value(std::int64_t{4}));
}

TEST_CASE("two events with one batch id are seeded together") {
  Runtime rt(scripted());
  rt.load("(def a (manual-in \"a\")) (def b (manual-in \"b\")) (def s (+ a b))");
  TurnReport last;
  rt.on_report([&](const TurnReport& r) { last = r; });
  rt.replay(parse_script("{\"batch\":3,\"source\":\"a\",\"value\":1}\n{\"batch\":3,\"source\":\"b\",\"value\":2}\n"));
  CHECK(last.seeded.size() == 2);
  CHECK(last.recomputed.size() == 1);
  CHECK(rt.engine().global("s")->value == Value(std::int64_t{3}));
}

TEST_CASE("collect sink over pre receives the delayed stream") {
  Runtime rt(scripted());
  rt.load("(def s (manual-in \"s\")) (def d (pre s 0)) (def o (ws-out \"localhost:4444\" d))");
  for (std::int64_t v : {1, 2, 3}) rt.run_batch({{"s", Value(v)}});
  auto got = rt.delivered("localhost:4444");
  CHECK(got == std::vector<Value>{Value(std::int64_t{0}), Value(std::int64_t{1}), Value(std::int64_t{2})});
}

TEST_CASE("stdout sink on a constant prints exactly one line") {
  std::ostringstream out;
  Runtime rt(scripted(&out));
  rt.load("(def c 5) (def o (stdout-out c))");
  for (int i = 0; i < 3; ++i) rt.run_batch({});
  CHECK(out.str() == "5\n");
}

TEST_CASE("scripted ws-in stub drives the freezing pipeline") {
  Runtime rt(scripted());
  rt.load(
      "(defr (to-celsius k) (- k 273.15))"
      "(def temperature (ws-in \"localhost:3333\"))"
      "(def freezing-temperature (negative? (to-celsius temperature)))");
  rt.replay(parse_script("{\"batch\":1,\"source\":\"localhost:3333\",\"value\":270.0}\n"));
  CHECK(rt.engine().global("freezing-temperature")->value == Value(true));
  // The definition name works as a key as well.
  rt.replay(parse_script("{\"batch\":2,\"source\":\"temperature\",\"value\":300.0}\n"));
  CHECK(rt.engine().global("freezing-temperature")->value == Value(false));
}

TEST_CASE("unknown script source is skipped but the turn still runs") {
  Runtime rt(scripted());
  rt.load("(def x (manual-in \"x\"))");
  auto r = rt.run_batch({{"nope", Value(std::int64_t{1})}});
  CHECK(r.seeded.empty());
}

TEST_CASE("replaying one script twice gives identical traces") {
  const char* program =
      "(def n (manual-in \"n\")) (def c (manual-in \"c\"))"
      "(def len (collatz-length n c)) (def (lo hi) (min-max n))";
  const char* script =
      "{\"batch\":0,\"source\":\"n\",\"value\":6}\n{\"batch\":0,\"source\":\"c\",\"value\":0}\n"
      "{\"batch\":1,\"source\":\"n\",\"value\":27}\n{\"batch\":2,\"source\":\"n\",\"value\":3}\n";
  std::string traces[2];
  for (auto& t : traces) {
    std::ostringstream trace;
    Runtime rt(scripted());
    rt.set_trace(&trace);
    rt.load(program);
    rt.replay(parse_script(script));
    t = trace.str();
  }
  CHECK(!traces[0].empty());
  CHECK(traces[0] == traces[1]);
}

TEST_CASE("executor thread runs posted commands and queued batches in order") {
  RuntimeOptions o = scripted();
  o.poll = 0ms;
  Runtime rt(o);
  rt.load("(def x (manual-in \"x\")) (def y (* x 2))");
  rt.start();
  for (std::int64_t i = 1; i <= 5; ++i) rt.queue().push("x", Value(i));
  CHECK(wait_for([&] { return rt.post([](Runtime& r) { return r.turns(); }).get() >= 7; }));
  auto y = rt.post([](Runtime& r) { return *r.engine().global("y")->value; }).get();
  CHECK(y == Value(std::int64_t{10}));
  rt.stop();
  CHECK_FALSE(rt.running());
  // After stop, commands run inline.
  CHECK(rt.post([](Runtime& r) { return r.turns(); }).get() == 7);
}

TEST_CASE("timer adapter ticks upward") {
  EventQueue q(0ms);
  TimerSource t("tick", 5ms);
  t.start(q);
  CHECK(wait_for([&] { return q.size() >= 3; }));
  t.stop();
  std::vector<std::int64_t> ticks;
  while (auto b = q.next_batch(false)) ticks.push_back((*b)[0].value.as_integer());
  REQUIRE(ticks.size() >= 3);
  for (std::size_t i = 0; i < ticks.size(); ++i) CHECK(ticks[i] == static_cast<std::int64_t>(i));
  CHECK(t.finished());
}

TEST_CASE("line adapter turns lines into string events") {
  int fds[2];
  REQUIRE(::pipe(fds) == 0);
  EventQueue q(0ms);
  LineSource src("stdin-lines", fds[0]);
  src.start(q);
  std::string text = "alpha\r\nbeta\ngam";
  REQUIRE(::write(fds[1], text.data(), text.size()) == static_cast<ssize_t>(text.size()));
  ::close(fds[1]);
  CHECK(wait_for([&] { return src.finished(); }));
  std::vector<std::string> lines;
  while (auto b = q.next_batch(false)) lines.push_back((*b)[0].value.as_string());
  CHECK(lines == std::vector<std::string>{"alpha", "beta", "gam"});
  src.stop();
  ::close(fds[0]);
}

TEST_CASE("payload codec") {
  CHECK(decode_payload("3") == Value(std::int64_t{3}));
  CHECK(decode_payload("270.0") == Value(270.0));
  CHECK(decode_payload("[1,true,\"x\"]").is_vector());
  CHECK(encode_payload(Value(false)) == "false");
  for (const char* bad : {"{bad", "null", "{\"k\":1}"}) {
    try {
      decode_payload(bad);
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadPayload);
    }
  }
  CHECK(parse_address("ws://localhost:3333/feed").path == "/feed");
  CHECK_THROWS_AS(parse_address("localhost"), Error);
}

TEST_CASE("websocket source and sink round trip") {
  std::vector<std::string> received;
  std::mutex mu;
  test::WsServer out_server([&](test::WsServer::Stream& ws) {
    for (;;) {
      boost::beast::flat_buffer buf;
      ws.read(buf);
      std::lock_guard lk(mu);
      received.push_back(boost::beast::buffers_to_string(buf.data()));
    }
  });
  std::atomic<bool> release{false};
  test::WsServer in_server([&](test::WsServer::Stream& ws) {
    ws.text(true);
    for (const char* frame : {"300.0", "{bad", "270"}) ws.write(boost::asio::buffer(std::string(frame)));
    while (!release) std::this_thread::sleep_for(1ms);
    ws.close(boost::beast::websocket::close_code::normal);
  });

  RuntimeOptions o;
  o.poll = 0ms;
  Runtime rt(o);
  rt.load("(def temperature (ws-in \"" + in_server.address() + "\"))"
          "(def o (ws-out \"" + out_server.address() + "\" (to-celsius temperature)))");
  CHECK(rt.error_count() == 0);
  CHECK(rt.adapter_count() == 1);
  CHECK(wait_for([&] { return rt.queue().size() == 2; }));
  CHECK(rt.drain() == 2);
  CHECK(wait_for([&] {
    std::lock_guard lk(mu);
    return received.size() == 2;
  }));
  {
    std::lock_guard lk(mu);
    CHECK(decode_payload(received[0]) == Value(300.0 - 273.15));
    CHECK(decode_payload(received[1]) == Value(270 - 273.15));
  }
  release = true;
  CHECK(wait_for([&] { return rt.idle(); }));
}

TEST_CASE("ws-in to a closed port fails to connect") {
  std::string address;
  {
    boost::asio::io_context ioc;
    boost::asio::ip::tcp::acceptor a(ioc, {boost::asio::ip::make_address("127.0.0.1"), 0});
    address = "127.0.0.1:" + std::to_string(a.local_endpoint().port());
  }
  EventQueue q;
  WsSource src(address);
  try {
    src.start(q);
    FAIL("expected ConnectFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConnectFailed);
  }
  Runtime rt;
  rt.load("(def t (ws-in \"" + address + "\"))");
  CHECK(rt.error_count() == 1);
  CHECK(rt.adapter_count() == 0);
}
