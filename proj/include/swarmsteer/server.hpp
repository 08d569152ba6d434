#pragma once
/*
server.hpp
----------
WebSocket front end for a Session.

Threads: one io thread runs every socket; one engine thread owns the Session
and is the only code that ticks. Sockets talk to the engine only through the
inbound queue; the engine hands serialized, immutable messages back to each
connection. A connection keeps at most one pending frame (a newer frame
replaces an unsent one) while control messages are always delivered, so a
slow client never delays a tick or the recorder.
*/

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmsteer/inputs.hpp"
#include "swarmsteer/scenario.hpp"
#include "swarmsteer/session.hpp"

namespace swarmsteer {

class NetworkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kAddressEnv = "SWARMSTEER_ADDR";
inline constexpr const char* kDefaultAddress = "127.0.0.1:8765";

struct Endpoint {
    std::string host;
    std::uint16_t port = 0;
};

// "host:port" (port 0 picks a free port). Throws std::invalid_argument.
Endpoint parse_endpoint(const std::string& text);

struct ServerOptions {
    Endpoint endpoint{"127.0.0.1", 8765};
    double speed = 1.0;  // simulated seconds per wall second; 0 = as fast as possible
    std::optional<std::string> record_path;  // trajectory; inputs go to inputs_path_for()
    std::vector<PulseSpec> pulses;           // written into record headers
    Session::ScriptFactory script;
    std::size_t recorder_capacity = 4096;
};

// "out.jsonl" -> "out.inputs.jsonl"
std::string inputs_path_for(const std::string& record_path);

class Server {
public:
    Server(Scenario scenario, ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    // Binds and starts both threads. Throws NetworkError if the address
    // cannot be bound, RecordError if the record file cannot be opened.
    void start();
    std::uint16_t port() const;

    // Stops ticking, flushes the recorder, closes every connection.
    // Idempotent; call from the owning thread.
    void stop();

    // Wakes wait(); safe from any thread (e.g. a signal-watching thread).
    void request_stop();

    // Blocks until request_stop() or an engine failure, which it rethrows
    // (recorder overflow or I/O error). Call stop() afterwards.
    void wait();

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

}  // namespace swarmsteer
