#include "swarmsteer/server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "swarmsteer/record.hpp"

namespace swarmsteer {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

Endpoint parse_endpoint(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon + 1 == text.size()) {
        throw std::invalid_argument("address must be host:port, got \"" + text + "\"");
    }
    Endpoint e;
    e.host = text.substr(0, colon);
    if (e.host.empty()) {
        e.host = "0.0.0.0";
    }
    std::size_t used = 0;
    int port = -1;
    try {
        port = std::stoi(text.substr(colon + 1), &used);
    } catch (const std::exception&) {
    }
    if (port < 0 || port > 65535 || used != text.size() - colon - 1) {
        throw std::invalid_argument("bad port in address \"" + text + "\"");
    }
    e.port = static_cast<std::uint16_t>(port);
    return e;
}

std::string inputs_path_for(const std::string& record_path) {
    const std::string ext = ".jsonl";
    if (record_path.size() > ext.size() && record_path.compare(record_path.size() - ext.size(), ext.size(), ext) == 0) {
        return record_path.substr(0, record_path.size() - ext.size()) + ".inputs.jsonl";
    }
    return record_path + ".inputs.jsonl";
}

namespace {

struct Inbound {
    enum class Kind { connect, disconnect, message };
    Kind kind;
    ClientId client;
    std::string text;
};

class Connection;

}  // namespace

struct Server::Impl {
    Impl(Scenario scenario, ServerOptions options)
        : options(std::move(options)), session(std::move(scenario), this->options.script) {}

    void push_inbound(Inbound in) {
        {
            std::lock_guard lock(inbound_mutex);
            inbound.push_back(std::move(in));
        }
        inbound_cv.notify_one();
    }

    void client_connected(ClientId id, const std::shared_ptr<Connection>& c);
    void client_disconnected(ClientId id);
    void do_accept();
    void engine_loop();
    void deliver(const std::vector<Outgoing>& out);
    void open_recording();
    void finish_recording();

    ServerOptions options;
    Session session;

    net::io_context ioc{1};
    std::optional<tcp::acceptor> acceptor;
    std::optional<net::executor_work_guard<net::io_context::executor_type>> work;
    std::thread io_thread;
    std::thread engine_thread;
    std::promise<void> io_done;
    std::atomic<ClientId> next_client{1};

    std::mutex clients_mutex;
    std::map<ClientId, std::weak_ptr<Connection>> clients;

    std::mutex inbound_mutex;
    std::condition_variable inbound_cv;
    std::deque<Inbound> inbound;
    bool stopping = false;

    std::unique_ptr<AsyncRecorder> recorder;
    std::uint64_t recorded_generation = 0;

    std::mutex state_mutex;
    std::condition_variable state_cv;
    bool stop_requested = false;
    bool started = false;
    std::exception_ptr failure;
};

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket&& socket, ClientId id, Server::Impl& server)
        : ws_(std::move(socket)), id_(id), server_(server) {}

    void run() {
        net::dispatch(ws_.get_executor(), [self = shared_from_this()] { self->on_run(); });
    }

    void deliver(std::shared_ptr<const std::string> text, bool is_frame) {
        net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text), is_frame]() mutable {
            if (self->closing_) {
                return;
            }
            if (is_frame) {
                // Latest frame wins: an unsent older frame is dropped.
                std::erase_if(self->queue_, [](const Pending& p) { return p.is_frame; });
            }
            self->queue_.push_back({std::move(text), is_frame});
            if (!self->writing_) {
                self->write_next();
            }
        });
    }

    void close() {
        net::post(ws_.get_executor(), [self = shared_from_this()] {
            if (self->closing_) {
                return;
            }
            self->closing_ = true;
            if (!self->writing_) {
                self->do_close();
            }
        });
    }

private:
    void on_run() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
            if (ec) {
                return;
            }
            self->server_.client_connected(self->id_, self);
            self->do_read();
        });
    }

    void do_read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->closing_ = true;
                self->server_.client_disconnected(self->id_);
                return;
            }
            self->server_.push_inbound({Inbound::Kind::message, self->id_, beast::buffers_to_string(self->buffer_.data())});
            self->buffer_.consume(self->buffer_.size());
            self->do_read();
        });
    }

    void write_next() {
        std::shared_ptr<const std::string> next;
        if (!queue_.empty()) {
            next = std::move(queue_.front().text);
            queue_.pop_front();
        } else {
            writing_ = false;
            if (closing_) {
                do_close();
            }
            return;
        }
        writing_ = true;
        ws_.text(true);
        ws_.async_write(net::buffer(*next), [self = shared_from_this(), next](beast::error_code ec, std::size_t) {
            if (ec) {
                self->writing_ = false;
                self->closing_ = true;
                return;
            }
            if (self->closing_) {
                self->writing_ = false;
                self->do_close();
                return;
            }
            self->write_next();
        });
    }

    void do_close() {
        if (close_sent_) {
            return;
        }
        close_sent_ = true;
        ws_.async_close(websocket::close_code::going_away, [self = shared_from_this()](beast::error_code) {});
    }

    websocket::stream<beast::tcp_stream> ws_;
    ClientId id_;
    Server::Impl& server_;
    beast::flat_buffer buffer_;
    struct Pending {
        std::shared_ptr<const std::string> text;
        bool is_frame;
    };
    std::deque<Pending> queue_;  // holds at most one frame
    bool writing_ = false;
    bool closing_ = false;
    bool close_sent_ = false;
};

}  // namespace

void Server::Impl::client_connected(ClientId id, const std::shared_ptr<Connection>& c) {
    {
        std::lock_guard lock(clients_mutex);
        clients[id] = c;
    }
    push_inbound({Inbound::Kind::connect, id, {}});
}

void Server::Impl::client_disconnected(ClientId id) {
    {
        std::lock_guard lock(clients_mutex);
        clients.erase(id);
    }
    push_inbound({Inbound::Kind::disconnect, id, {}});
}

void Server::Impl::do_accept() {
    acceptor->async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
        if (ec) {
            return;  // acceptor closed
        }
        std::make_shared<Connection>(std::move(socket), next_client++, *this)->run();
        do_accept();
    });
}

void Server::Impl::deliver(const std::vector<Outgoing>& out) {
    if (out.empty()) {
        return;
    }
    std::vector<std::pair<ClientId, std::shared_ptr<Connection>>> targets;
    {
        std::lock_guard lock(clients_mutex);
        for (auto& [id, weak] : clients) {
            if (auto c = weak.lock()) {
                targets.emplace_back(id, std::move(c));
            }
        }
    }
    for (const Outgoing& o : out) {
        for (auto& [id, c] : targets) {
            if (!o.to || *o.to == id) {
                c->deliver(o.text, o.is_frame);
            }
        }
    }
}

void Server::Impl::open_recording() {
    if (!options.record_path) {
        return;
    }
    recorder = std::make_unique<AsyncRecorder>(*options.record_path,
                                               make_header(session.scenario(), *session.frame(), options.pulses),
                                               options.recorder_capacity);
    recorded_generation = session.generation();
}

void Server::Impl::finish_recording() {
    if (!recorder) {
        return;
    }
    recorder->close();
    recorder.reset();
    const std::string path = inputs_path_for(*options.record_path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw RecordError(RecordError::Code::io, "cannot open " + path + " for writing");
    }
    write_input_log(out, InputLog{options.pulses, session.input_events()});
}

void Server::Impl::engine_loop() {
    using clock = std::chrono::steady_clock;
    const double tau = session.scenario().zones.tau;
    auto deadline = clock::now();
    try {
        for (;;) {
            std::deque<Inbound> batch;
            {
                std::unique_lock lock(inbound_mutex);
                const bool running = session.phase() == SessionPhase::running;
                if (!running) {
                    inbound_cv.wait_for(lock, std::chrono::milliseconds(20),
                                        [&] { return stopping || !inbound.empty(); });
                } else if (options.speed > 0.0 && clock::now() < deadline) {
                    inbound_cv.wait_until(lock, deadline, [&] { return stopping; });
                }
                if (stopping) {
                    break;
                }
                batch.swap(inbound);
            }
            for (Inbound& in : batch) {
                switch (in.kind) {
                    case Inbound::Kind::connect: session.connect(in.client); break;
                    case Inbound::Kind::disconnect: session.disconnect(in.client); break;
                    case Inbound::Kind::message: session.handle(in.client, in.text); break;
                }
            }
            if (recorder && session.generation() != recorded_generation) {
                finish_recording();
                open_recording();
            }
            if (session.phase() != SessionPhase::running) {
                deliver(session.take_outbox());
                deadline = clock::now();
                continue;
            }
            if (options.speed > 0.0 && clock::now() < deadline) {
                deliver(session.take_outbox());
                continue;
            }
            session.step();
            std::vector<Outgoing> out = session.take_outbox();
            if (recorder) {
                for (const Outgoing& o : out) {
                    if (o.is_frame) {
                        recorder->push(o.text);
                    }
                }
            }
            deliver(out);
            if (options.speed > 0.0) {
                const auto period = std::chrono::duration_cast<clock::duration>(
                    std::chrono::duration<double>(tau / options.speed));
                deadline += period;
                // Fell far behind (debugger, overloaded host): resume from now.
                if (clock::now() - deadline > 10 * period) {
                    deadline = clock::now();
                }
            }
        }
        finish_recording();
    } catch (...) {
        std::lock_guard lock(state_mutex);
        failure = std::current_exception();
        state_cv.notify_all();
    }
}

Server::Server(Scenario scenario, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(scenario), std::move(options))) {
    if (!(impl_->options.speed >= 0.0)) {
        throw std::invalid_argument("speed factor must be >= 0");
    }
}

Server::~Server() {
    try {
        stop();
    } catch (...) {
    }
}

void Server::start() {
    Impl& s = *impl_;
    beast::error_code ec;
    const auto address = net::ip::make_address(s.options.endpoint.host, ec);
    if (ec) {
        throw NetworkError("bad listen address " + s.options.endpoint.host + ": " + ec.message());
    }
    const tcp::endpoint endpoint{address, s.options.endpoint.port};
    s.acceptor.emplace(s.ioc);
    s.acceptor->open(endpoint.protocol(), ec);
    if (!ec) s.acceptor->set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) s.acceptor->bind(endpoint, ec);
    if (!ec) s.acceptor->listen(net::socket_base::max_listen_connections, ec);
    if (ec) {
        throw NetworkError("cannot listen on " + s.options.endpoint.host + ":" +
                           std::to_string(s.options.endpoint.port) + ": " + ec.message());
    }
    s.open_recording();
    s.work.emplace(s.ioc.get_executor());
    s.do_accept();
    s.io_thread = std::thread([&s] {
        s.ioc.run();
        s.io_done.set_value();
    });
    s.engine_thread = std::thread([&s] { s.engine_loop(); });
    s.started = true;
}

std::uint16_t Server::port() const {
    return impl_->acceptor ? impl_->acceptor->local_endpoint().port() : 0;
}

void Server::stop() {
    Impl& s = *impl_;
    if (!s.started) {
        return;
    }
    s.started = false;
    {
        std::lock_guard lock(s.inbound_mutex);
        s.stopping = true;
    }
    s.inbound_cv.notify_all();
    if (s.engine_thread.joinable()) {
        s.engine_thread.join();
    }
    net::post(s.ioc, [&s] {
        beast::error_code ignored;
        s.acceptor->close(ignored);
        std::lock_guard lock(s.clients_mutex);
        for (auto& [id, weak] : s.clients) {
            if (auto c = weak.lock()) {
                c->close();
            }
        }
    });
    s.work.reset();
    if (s.io_done.get_future().wait_for(std::chrono::seconds(2)) != std::future_status::ready) {
        s.ioc.stop();
    }
    if (s.io_thread.joinable()) {
        s.io_thread.join();
    }
    request_stop();
}

void Server::request_stop() {
    Impl& s = *impl_;
    std::lock_guard lock(s.state_mutex);
    s.stop_requested = true;
    s.state_cv.notify_all();
}

void Server::wait() {
    Impl& s = *impl_;
    std::unique_lock lock(s.state_mutex);
    s.state_cv.wait(lock, [&] { return s.stop_requested || s.failure; });
    if (s.failure) {
        auto f = s.failure;
        s.failure = nullptr;
        std::rethrow_exception(f);
    }
}

}  // namespace swarmsteer
