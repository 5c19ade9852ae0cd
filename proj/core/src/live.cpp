#include "morphflow/live.hpp"

#include <fstream>

#include "morphflow/graph_export.hpp"
#include "morphflow/layout.hpp"
#include "morphflow/pgm.hpp"
#include "morphflow/render.hpp"
#include "overloaded.hpp"

namespace morphflow {

using detail::overloaded;
using nlohmann::json;

namespace {

proto::Frame to_frame(VertexId v, Tick tick, const ImageFrame& frame) {
  proto::Frame f{v, tick, frame.width(), frame.height(), {}};
  f.pixels.reserve(frame.size());
  for (double x : frame.values()) f.pixels.push_back(quantize(x));
  return f;
}

}  // namespace

LiveHub::LiveHub(Scenario scenario) : scenario_doc_(to_json(scenario)), runtime_(std::move(scenario)) {
  latest_snapshot_ = make_snapshot(runtime_.state().program.clock());
}

proto::GraphSnapshot LiveHub::make_snapshot(Tick tick) {
  const auto& st = runtime_.state();
  proto::GraphSnapshot snap{tick, to_json(st.program, &st.names), json{{"nodes", json::array()}, {"edges", json::array()}}};
  if (auto main = st.program.main_graph()) {
    view_layout_ = layout_incremental(st.program, *main, view_layout_);
    const auto& s = runtime_.scenario();
    snap.draw_list = to_json(render_graph(st.program, *main, view_layout_, s.width, s.height).draw_list);
  }
  return snap;
}

void LiveHub::submit(ClientId client, const proto::ClientMessage& msg) {
  QueueItem item = std::visit(
      overloaded{
          [](const proto::Click& c) -> QueueItem { return ControlEvent{c.vertex, PixelCoord{c.x, c.y}}; },
          [](const proto::SetControl& s) -> QueueItem { return ControlEvent{s.vertex, s.value}; },
          [](const proto::Edit& e) -> QueueItem { return e.command; },
          [](const auto&) -> QueueItem {
            throw Error(Errc::invalid_argument, "pacing messages are handled by the pacer, not queued");
          },
      },
      msg);
  std::lock_guard lock(inbound_mutex_);
  inbound_.emplace_back(client, std::move(item));
}

std::vector<LiveHub::Outgoing> LiveHub::advance() {
  std::vector<Outgoing> out;
  std::lock_guard engine(engine_mutex_);
  {
    std::lock_guard lock(inbound_mutex_);
    const Tick now = runtime_.state().program.clock();
    for (auto& [client, item] : inbound_) runtime_.state().schedule(now, std::move(item), client);
    inbound_.clear();
  }

  TickResult r;
  try {
    r = runtime_.step();
  } catch (const Error& e) {
    out.push_back({std::nullopt, proto::Error{std::string(to_string(e.code())), e.what()}});
    return out;
  }

  std::vector<proto::Frame> frames;
  for (const auto& e : r.emissions) frames.push_back(to_frame(e.vertex, r.tick, e.frame));
  for (const auto& f : frames) out.push_back({std::nullopt, f});
  for (const auto& a : r.applied) {
    if (!a.control) continue;
    proto::ControlState cs{a.control->addressed, a.control->value, std::nullopt, std::nullopt};
    if (a.control->click) {
      cs.center = a.control->click->center;
      cs.frame_count_base = a.control->click->frame_count_base;
    }
    out.push_back({std::nullopt, cs});
  }
  for (const auto& f : r.failed) {
    std::optional<ClientId> to;
    if (f.origin != 0) to = f.origin;
    out.push_back({to, proto::Error{std::string(to_string(f.code)), f.message}});
  }
  std::optional<proto::GraphSnapshot> snap;
  if (r.structure_changed) {
    snap = make_snapshot(r.tick);
    out.push_back({std::nullopt, *snap});
  }
  out.push_back({std::nullopt, proto::TickAdvanced{r.tick}});

  std::lock_guard join(join_mutex_);
  if (snap) latest_snapshot_ = std::move(snap);
  for (auto& f : frames) latest_frames_[f.vertex] = std::move(f);
  return out;
}

std::vector<proto::ServerMessage> LiveHub::join_messages() const {
  std::lock_guard join(join_mutex_);
  std::vector<proto::ServerMessage> out;
  if (latest_snapshot_) out.emplace_back(*latest_snapshot_);
  for (const auto& [v, f] : latest_frames_) out.emplace_back(f);
  return out;
}

Tick LiveHub::clock() const {
  std::lock_guard engine(engine_mutex_);
  return runtime_.state().program.clock();
}

json LiveHub::interaction_log() const {
  std::lock_guard engine(engine_mutex_);
  return runtime_.applied_log();
}

json LiveHub::manifest() const {
  std::lock_guard engine(engine_mutex_);
  return runtime_.manifest(true);
}

void Outbox::push(const proto::ServerMessage& msg) {
  std::optional<VertexId> vertex;
  if (const auto* f = std::get_if<proto::Frame>(&msg)) vertex = f->vertex;
  push_encoded(std::make_shared<const std::string>(proto::to_json(msg).dump()), vertex);
}

void Outbox::push_encoded(Payload payload, std::optional<VertexId> frame_vertex) {
  std::function<void()> notify;
  {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    if (frame_vertex) {
      auto [it, inserted] = frames_.try_emplace(*frame_vertex, payload);
      if (inserted) {
        queue_.emplace_back(*frame_vertex);
      } else {
        it->second = std::move(payload);
        ++dropped_;
      }
    } else {
      queue_.emplace_back(std::move(payload));
    }
    notify = on_ready_;
  }
  cv_.notify_one();
  if (notify) notify();
}

std::optional<Outbox::Payload> Outbox::try_pop() {
  std::lock_guard lock(mutex_);
  if (queue_.empty()) return std::nullopt;
  auto slot = std::move(queue_.front());
  queue_.pop_front();
  if (auto* v = std::get_if<VertexId>(&slot)) {
    auto node = frames_.extract(*v);
    return std::move(node.mapped());
  }
  return std::get<Payload>(std::move(slot));
}

std::optional<Outbox::Payload> Outbox::wait_pop(std::chrono::milliseconds timeout) {
  {
    std::unique_lock lock(mutex_);
    if (!cv_.wait_for(lock, timeout, [this] { return !queue_.empty() || closed_; })) return std::nullopt;
  }
  return try_pop();
}

void Outbox::set_ready_callback(std::function<void()> callback) {
  std::lock_guard lock(mutex_);
  on_ready_ = std::move(callback);
}

void Outbox::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Outbox::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

std::size_t Outbox::dropped_frames() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

std::size_t Outbox::pending() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

Pacer::Pacer(LiveHub& hub, Sink sink, PacerOptions options)
    : hub_(hub), sink_(std::move(sink)), options_(options), paused_(options.start_paused) {}

Pacer::~Pacer() { stop(); }

void Pacer::start() {
  std::lock_guard lock(mutex_);
  if (thread_.joinable() || stop_) return;
  thread_ = std::thread([this] { loop(); });
}

void Pacer::stop() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

void Pacer::pause() {
  std::lock_guard lock(mutex_);
  paused_ = true;
  cv_.notify_all();
}

void Pacer::resume() {
  {
    std::lock_guard lock(mutex_);
    paused_ = false;
  }
  cv_.notify_all();
}

void Pacer::step() {
  {
    std::lock_guard lock(mutex_);
    if (!paused_ || finished_) return;
    ++pending_steps_;
  }
  cv_.notify_all();
}

void Pacer::set_ticks_per_second(double tps) {
  if (!(tps > 0.0)) throw Error(Errc::invalid_argument, "ticks per second must be positive");
  {
    std::lock_guard lock(mutex_);
    options_.ticks_per_second = tps;
  }
  cv_.notify_all();
}

bool Pacer::paused() const {
  std::lock_guard lock(mutex_);
  return paused_;
}

double Pacer::ticks_per_second() const {
  std::lock_guard lock(mutex_);
  return options_.ticks_per_second;
}

bool Pacer::finished() const {
  std::lock_guard lock(mutex_);
  return finished_;
}

void Pacer::wait_finished() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [this] { return finished_ || stop_; });
}

void Pacer::loop() {
  using clock = std::chrono::steady_clock;
  std::unique_lock lock(mutex_);
  auto deadline = clock::now();
  while (true) {
    cv_.wait(lock, [this] { return stop_ || (!finished_ && (!paused_ || pending_steps_ > 0)); });
    if (stop_) return;
    const bool stepping = paused_;
    if (stepping) {
      --pending_steps_;
    } else {
      cv_.wait_until(lock, deadline, [this] { return stop_ || paused_; });
      if (stop_) return;
      if (paused_) continue;
    }

    lock.unlock();
    auto batch = hub_.advance();
    sink_(std::move(batch));
    lock.lock();

    ++ticks_run_;
    if (options_.max_ticks && ticks_run_ >= *options_.max_ticks) {
      finished_ = true;
      cv_.notify_all();
    }
    const auto period = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(1.0 / options_.ticks_per_second));
    // Do not try to catch up after a stall or a pause.
    deadline = std::max(deadline + period, clock::now());
  }
}

LiveService::LiveService(Scenario scenario, ServiceOptions options)
    : options_(std::move(options)),
      hub_(std::move(scenario)),
      pacer_(hub_, [this](std::vector<LiveHub::Outgoing> batch) { deliver(std::move(batch)); }, options_.pacing) {}

LiveService::~LiveService() { stop(); }

void LiveService::start() { pacer_.start(); }

void LiveService::stop() {
  if (stopped_) return;
  stopped_ = true;
  pacer_.stop();
  if (options_.log_path) {
    std::ofstream out(*options_.log_path);
    out << hub_.interaction_log().dump(2) << "\n";
  }
  if (options_.manifest_path) {
    std::ofstream out(*options_.manifest_path);
    out << hub_.manifest().dump(2) << "\n";
  }
  std::lock_guard lock(clients_mutex_);
  for (auto& [id, box] : clients_) box->close();
}

ClientId LiveService::connect(std::shared_ptr<Outbox> outbox) {
  std::lock_guard lock(clients_mutex_);
  const ClientId id = next_client_++;
  for (const auto& msg : hub_.join_messages()) outbox->push(msg);
  clients_.emplace(id, std::move(outbox));
  return id;
}

void LiveService::disconnect(ClientId client) {
  std::lock_guard lock(clients_mutex_);
  if (auto it = clients_.find(client); it != clients_.end()) {
    it->second->close();
    clients_.erase(it);
  }
}

void LiveService::send_to(ClientId client, const proto::ServerMessage& msg) {
  std::lock_guard lock(clients_mutex_);
  if (auto it = clients_.find(client); it != clients_.end()) it->second->push(msg);
}

void LiveService::handle_text(ClientId client, std::string_view text) {
  proto::ClientMessage msg;
  try {
    msg = proto::client_message_from_json(json::parse(text));
  } catch (const json::exception& e) {
    return send_to(client, proto::Error{"parse", e.what()});
  } catch (const Error& e) {
    return send_to(client, proto::Error{std::string(to_string(e.code())), e.what()});
  }
  std::visit(overloaded{
                 [&](const proto::Pace& p) { pacer_.set_ticks_per_second(p.ticks_per_second); },
                 [&](const proto::Pause&) { pacer_.pause(); },
                 [&](const proto::Resume&) { pacer_.resume(); },
                 [&](const proto::Step&) { pacer_.step(); },
                 [&](const auto&) { hub_.submit(client, msg); },
             },
             msg);
}

json LiveService::health() const {
  std::size_t clients = 0;
  {
    std::lock_guard lock(clients_mutex_);
    clients = clients_.size();
  }
  return {{"status", "ok"},
          {"tick", hub_.clock()},
          {"clients", clients},
          {"paused", pacer_.paused()},
          {"ticks_per_second", pacer_.ticks_per_second()},
          {"finished", pacer_.finished()}};
}

void LiveService::deliver(std::vector<LiveHub::Outgoing> batch) {
  std::lock_guard lock(clients_mutex_);
  for (const auto& o : batch) {
    std::optional<VertexId> vertex;
    if (const auto* f = std::get_if<proto::Frame>(&o.message)) vertex = f->vertex;
    auto payload = std::make_shared<const std::string>(proto::to_json(o.message).dump());
    if (o.recipient) {
      if (auto it = clients_.find(*o.recipient); it != clients_.end()) it->second->push_encoded(payload, vertex);
    } else {
      for (auto& [id, box] : clients_) box->push_encoded(payload, vertex);
    }
  }
}

}  // namespace morphflow
