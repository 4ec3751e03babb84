#include "haai/io/adapters.hpp"

#include <poll.h>
#include <unistd.h>

#include "haai/log.hpp"

#include "haai/core/json.hpp"
#include "haai/error.hpp"

namespace haai::io {

Address parse_address(const std::string& address) {
  std::string rest = address;
  if (rest.rfind("ws://", 0) == 0) rest = rest.substr(5);
  Address out;
  if (auto slash = rest.find('/'); slash != std::string::npos) {
    out.path = rest.substr(slash);
    rest = rest.substr(0, slash);
  }
  auto colon = rest.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
    throw Error(ErrorCode::ConnectFailed, "bad address '" + address + "', expected host:port");
  }
  out.host = rest.substr(0, colon);
  out.port = rest.substr(colon + 1);
  for (char c : out.port) {
    if (c < '0' || c > '9') throw Error(ErrorCode::ConnectFailed, "bad port in address '" + address + "'");
  }
  return out;
}

Value decode_payload(const std::string& text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::BadPayload, "frame is not JSON: " + text.substr(0, 80));
  return value_from_json(j);
}

std::string encode_payload(const Value& value) { return to_json(value).dump(); }

// -- timer ------------------------------------------------------------------

TimerSource::TimerSource(std::string key, std::chrono::milliseconds period)
    : SourceAdapter(std::move(key)), period_(period) {
  if (period_.count() <= 0) throw Error(ErrorCode::BadPayload, "timer period must be positive");
}

TimerSource::~TimerSource() { stop(); }

void TimerSource::start(EventQueue& queue) {
  thread_ = std::thread([this, &queue] {
    auto next = std::chrono::steady_clock::now();
    for (std::int64_t tick = 0;; ++tick) {
      try {
        queue.push(key_, Value(tick));
      } catch (const Error&) {
        break;  // queue closed
      }
      next += period_;
      std::unique_lock lk(mu_);
      if (cv_.wait_until(lk, next, [&] { return stopping_; })) break;
    }
    finished_ = true;
  });
}

void TimerSource::stop() {
  {
    std::lock_guard lk(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

// -- lines ------------------------------------------------------------------

LineSource::LineSource(std::string key, int fd) : SourceAdapter(std::move(key)), fd_(fd) {}

LineSource::~LineSource() { stop(); }

void LineSource::start(EventQueue& queue) {
  thread_ = std::thread([this, &queue] {
    std::string partial;
    char buf[4096];
    auto emit = [&](std::string line) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      queue.push(key_, Value(std::move(line)));
    };
    try {
      while (!stopping_) {
        pollfd p{fd_, POLLIN, 0};
        int r = ::poll(&p, 1, 50);
        if (r < 0) break;
        if (r == 0) continue;
        ssize_t n = ::read(fd_, buf, sizeof buf);
        if (n <= 0) break;
        partial.append(buf, static_cast<std::size_t>(n));
        std::size_t pos;
        while ((pos = partial.find('\n')) != std::string::npos) {
          emit(partial.substr(0, pos));
          partial.erase(0, pos + 1);
        }
      }
      if (!stopping_ && !partial.empty()) emit(partial);
    } catch (const Error&) {
      // queue closed
    }
    finished_ = true;
  });
}

void LineSource::stop() {
  stopping_ = true;
  if (thread_.joinable()) thread_.join();
}

// -- sinks ------------------------------------------------------------------

void CollectSink::deliver(const Value& value) {
  std::lock_guard lk(mu_);
  values_.push_back(value);
}

std::vector<Value> CollectSink::values() const {
  std::lock_guard lk(mu_);
  return values_;
}

void StdoutSink::deliver(const Value& value) {
  if (value.is_string()) {
    out_ << value.as_string() << '\n';
  } else {
    out_ << display(value) << '\n';
  }
  out_.flush();
}

}  // namespace haai::io
