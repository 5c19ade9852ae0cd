#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "morphflow/protocol.hpp"
#include "morphflow/scenario.hpp"

namespace morphflow {

using ClientId = std::uint64_t;

/// The engine side of a live session. One context calls advance(); any
/// context may call submit() and the read-only accessors. Submitted items are
/// applied at the boundary closing the next tick, in arrival order, and every
/// accepted item is recorded with the tick it was applied at.
class LiveHub {
 public:
  struct Outgoing {
    /// nullopt broadcasts to every client.
    std::optional<ClientId> recipient;
    proto::ServerMessage message;
  };

  explicit LiveHub(Scenario scenario);

  /// Queues a Click, SetControl, or Edit. Pacing messages are not accepted
  /// here; they belong to the Pacer.
  void submit(ClientId client, const proto::ClientMessage& msg);

  /// Runs one tick and returns the messages it produced.
  std::vector<Outgoing> advance();

  /// Latest graph snapshot plus the latest frame of every output.
  std::vector<proto::ServerMessage> join_messages() const;

  Tick clock() const;
  nlohmann::json interaction_log() const;
  nlohmann::json manifest() const;
  const nlohmann::json& scenario_document() const noexcept { return scenario_doc_; }

 private:
  proto::GraphSnapshot make_snapshot(Tick tick);

  nlohmann::json scenario_doc_;

  mutable std::mutex engine_mutex_;
  ScenarioRuntime runtime_;
  LayoutState view_layout_;

  std::mutex inbound_mutex_;
  std::vector<std::pair<ClientId, QueueItem>> inbound_;

  mutable std::mutex join_mutex_;
  std::optional<proto::GraphSnapshot> latest_snapshot_;
  std::map<VertexId, proto::Frame> latest_frames_;
};

/// Per-client outgoing queue. Frames coalesce to the latest per vertex, so a
/// slow reader only ever loses intermediate frames; all other messages are
/// kept in order. push() never waits on the reader.
class Outbox {
 public:
  using Payload = std::shared_ptr<const std::string>;

  void push(const proto::ServerMessage& msg);
  void push_encoded(Payload payload, std::optional<VertexId> frame_vertex);

  std::optional<Payload> try_pop();
  std::optional<Payload> wait_pop(std::chrono::milliseconds timeout);

  /// Called (outside the lock) whenever a payload becomes available.
  void set_ready_callback(std::function<void()> callback);

  void close();
  bool closed() const;
  std::size_t dropped_frames() const;
  std::size_t pending() const;

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  // A queued frame is a slot naming its vertex; the payload sits in frames_
  // and is replaced in place when a newer frame arrives.
  std::deque<std::variant<Payload, VertexId>> queue_;
  std::map<VertexId, Payload> frames_;
  std::function<void()> on_ready_;
  std::size_t dropped_ = 0;
  bool closed_ = false;
};

struct PacerOptions {
  double ticks_per_second = 30.0;
  bool start_paused = false;
  std::optional<std::uint64_t> max_ticks;
};

/// Drives LiveHub::advance() at a wall-clock rate on its own thread and hands
/// each tick's messages to the sink.
class Pacer {
 public:
  using Sink = std::function<void(std::vector<LiveHub::Outgoing>)>;

  Pacer(LiveHub& hub, Sink sink, PacerOptions options);
  ~Pacer();

  Pacer(const Pacer&) = delete;
  Pacer& operator=(const Pacer&) = delete;

  void start();
  void stop();

  void pause();
  void resume();
  /// Runs exactly one tick while paused; ignored while running.
  void step();
  void set_ticks_per_second(double tps);

  bool paused() const;
  double ticks_per_second() const;
  /// True once max_ticks ticks have run.
  bool finished() const;
  void wait_finished();

 private:
  void loop();

  LiveHub& hub_;
  Sink sink_;

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  PacerOptions options_;
  bool paused_;
  std::uint64_t pending_steps_ = 0;
  std::uint64_t ticks_run_ = 0;
  bool stop_ = false;
  bool finished_ = false;
  std::thread thread_;
};

struct ServiceOptions {
  PacerOptions pacing;
  std::optional<std::filesystem::path> log_path;
  std::optional<std::filesystem::path> manifest_path;
};

/// Transport-independent live service: owns the hub, the pacer, and one
/// outbox per connected client. A transport feeds it raw text and drains
/// the outboxes.
class LiveService {
 public:
  LiveService(Scenario scenario, ServiceOptions options);
  ~LiveService();

  void start();
  /// Stops pacing and writes the interaction log and manifest if configured.
  void stop();

  /// Registers a client; its outbox immediately receives the join messages.
  ClientId connect(std::shared_ptr<Outbox> outbox);
  void disconnect(ClientId client);

  /// Parses and routes one client text message. Malformed messages are
  /// answered with an Error on the client's outbox.
  void handle_text(ClientId client, std::string_view text);

  nlohmann::json health() const;
  const nlohmann::json& scenario_document() const noexcept { return hub_.scenario_document(); }
  nlohmann::json interaction_log() const { return hub_.interaction_log(); }
  nlohmann::json manifest() const { return hub_.manifest(); }

  LiveHub& hub() noexcept { return hub_; }
  Pacer& pacer() noexcept { return pacer_; }

 private:
  void deliver(std::vector<LiveHub::Outgoing> batch);
  void send_to(ClientId client, const proto::ServerMessage& msg);

  ServiceOptions options_;
  LiveHub hub_;

  mutable std::mutex clients_mutex_;
  std::map<ClientId, std::shared_ptr<Outbox>> clients_;
  ClientId next_client_ = 1;

  Pacer pacer_;
  bool stopped_ = false;
};

}  // namespace morphflow
