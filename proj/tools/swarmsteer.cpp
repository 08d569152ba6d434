// swarmsteer: headless runs, record summaries and the live session server.
//
// Exit codes: 0 ok, 2 schema/usage, 3 numeric abort, 4 I/O, 5 network.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include "CLI11.hpp"

#include "swarmsteer/errors.hpp"
#include "swarmsteer/harness.hpp"
#include "swarmsteer/record.hpp"
#include "swarmsteer/scenario_io.hpp"
#include "swarmsteer/server.hpp"
#include "swarmsteer/summary.hpp"

namespace ss = swarmsteer;

namespace {

enum Exit { ok = 0, schema = 2, numeric = 3, io = 4, network = 5 };

struct ScenarioFlags {
    std::string scenario = "paper-canyon";
    std::optional<std::uint64_t> seed;
    std::optional<int> ticks;
    std::optional<double> alpha;

    void add(CLI::App* cmd) {
        cmd->add_option("--scenario", scenario, "Preset name or scenario JSON file")->capture_default_str();
        cmd->add_option("--seed", seed, "Override the scenario seed");
        cmd->add_option("--ticks", ticks, "Override max_ticks")->check(CLI::NonNegativeNumber);
        cmd->add_option("--alpha", alpha, "Influence gain override")->check(CLI::NonNegativeNumber);
    }

    ss::Scenario load() const {
        ss::Scenario s = ss::resolve_scenario(scenario);
        if (seed) s.seed = *seed;
        if (ticks) s.max_ticks = *ticks;
        return s;
    }
};

struct RunFlags {
    ScenarioFlags base;
    std::vector<std::string> pulses;
    std::string inputs = "none";
    std::optional<std::string> replay;
    std::optional<std::string> record;
    std::optional<std::string> save_inputs;
    std::optional<std::string> summary_out;
    std::optional<std::string> serve;
    bool json = false;
};

struct ServeFlags {
    ScenarioFlags base;
    std::optional<std::string> addr;
    double speed = 1.0;
    std::optional<std::string> record;
    std::vector<std::string> pulses;
    std::string inputs = "none";
};

std::vector<ss::PulseSpec> parse_pulses(const std::vector<std::string>& texts) {
    std::vector<ss::PulseSpec> out;
    for (const std::string& t : texts) {
        out.push_back(ss::parse_pulse(t));
    }
    return out;
}

std::unique_ptr<ss::InputSource> scripted_source(const std::string& inputs, const std::vector<ss::PulseSpec>& pulses,
                                                 const ss::Scenario& scenario) {
    if (inputs == "shepherd") {
        if (!pulses.empty()) {
            throw std::invalid_argument("--pulse cannot be combined with --inputs shepherd");
        }
        return std::make_unique<ss::ShepherdScript>();
    }
    if (!pulses.empty()) {
        return std::make_unique<ss::PulseSource>(pulses, scenario.zones.tau);
    }
    return std::make_unique<ss::NoInputs>();
}

int print_summary(const ss::TrajectoryRecord& record, std::int64_t from_tick, bool json,
                  const std::optional<std::string>& out_path) {
    const ss::RunSummary summary = ss::summarize(record, from_tick);
    const auto doc = ss::summary_to_json(summary, record);
    if (json) {
        std::cout << doc.dump() << '\n';
    } else {
        std::cout << ss::summary_text(summary);
    }
    if (out_path) {
        std::ofstream out(*out_path, std::ios::binary | std::ios::trunc);
        out << doc.dump(1) << '\n';
        if (!out) {
            throw ss::IoError("cannot write summary to " + *out_path);
        }
    }
    return Exit::ok;
}

int serve(const ServeFlags& flags);

int run(const RunFlags& flags) {
    if (flags.serve) {
        ServeFlags s;
        s.base = flags.base;
        s.addr = flags.serve;
        s.record = flags.record;
        s.pulses = flags.pulses;
        s.inputs = flags.inputs;
        s.speed = 1.0;
        return serve(s);
    }
    ss::Scenario scenario = flags.base.load();
    std::vector<ss::PulseSpec> pulses = parse_pulses(flags.pulses);

    std::unique_ptr<ss::InputSource> source;
    std::size_t replay_count = 0;
    if (flags.replay) {
        if (!pulses.empty() || flags.inputs != "none") {
            throw std::invalid_argument("--replay cannot be combined with --pulse or --inputs");
        }
        std::ifstream in(*flags.replay, std::ios::binary);
        if (!in) {
            throw ss::IoError("cannot open " + *flags.replay);
        }
        ss::InputLog log = ss::read_input_log(in);
        pulses = log.pulses;
        replay_count = log.events.size();
        source = std::make_unique<ss::ReplaySource>(std::move(log.events), scenario.zones.tau);
    } else {
        source = scripted_source(flags.inputs, pulses, scenario);
    }

    ss::RunOptions options;
    options.alpha = flags.base.alpha;
    options.keep_frames = false;

    // Records are assembled in memory and written after the run so that a
    // numeric abort leaves no partial file behind.
    ss::TrajectoryRecord record;
    ss::RunResult result = ss::run_scenario(scenario, *source, options, [&](const ss::SimFrame& f) {
        record.rows.push_back(ss::row_from_frame(f));
    });
    record.header = ss::make_header(scenario, result.initial, pulses);

    if (flags.replay && result.events.size() < replay_count) {
        std::cerr << "warning: " << replay_count - result.events.size()
                  << " input events fall after the last tick and were ignored\n";
    }
    if (flags.record) {
        ss::write_record(*flags.record, record);
    }
    if (flags.save_inputs) {
        std::ofstream out(*flags.save_inputs, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ss::IoError("cannot open " + *flags.save_inputs);
        }
        ss::write_input_log(out, ss::InputLog{pulses, result.events});
    }
    return print_summary(record, 0, flags.json, flags.summary_out);
}

std::atomic<bool> g_stop_watcher{false};

int serve(const ServeFlags& flags) {
    // Fail fast on a bad scenario or address, before binding.
    ss::Scenario scenario = flags.base.load();
    if (flags.base.alpha) {
        scenario.influence.alpha = *flags.base.alpha;
    }
    const std::vector<ss::PulseSpec> pulses = parse_pulses(flags.pulses);
    if (flags.inputs != "none" && flags.inputs != "shepherd") {
        throw std::invalid_argument("--inputs must be none or shepherd");
    }
    std::string addr = ss::kDefaultAddress;
    if (const char* env = std::getenv(ss::kAddressEnv)) {
        addr = env;
    }
    if (flags.addr) {
        addr = *flags.addr;
    }

    ss::ServerOptions options;
    options.endpoint = ss::parse_endpoint(addr);
    options.speed = flags.speed;
    options.record_path = flags.record;
    options.pulses = pulses;
    if (flags.inputs == "shepherd" || !pulses.empty()) {
        const std::string inputs = flags.inputs;
        options.script = [inputs, pulses](const ss::Scenario& s) { return scripted_source(inputs, pulses, s); };
    }

    // Signals are taken synchronously by a watcher thread; every other
    // thread inherits the blocked mask.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    ss::Server server(scenario, options);
    server.start();
    std::cout << "listening on " << options.endpoint.host << ":" << server.port() << std::endl;

    std::thread watcher([&] {
        timespec poll{0, 100'000'000};
        while (!g_stop_watcher) {
            if (sigtimedwait(&signals, nullptr, &poll) > 0) {
                server.request_stop();
                return;
            }
        }
    });
    int code = Exit::ok;
    try {
        server.wait();
    } catch (...) {
        g_stop_watcher = true;
        watcher.join();
        server.stop();
        throw;
    }
    g_stop_watcher = true;
    watcher.join();
    server.stop();
    std::cout << "stopped" << std::endl;
    return code;
}

int summarize(const std::string& path, std::int64_t from_tick, bool json, const std::optional<std::string>& out) {
    return print_summary(ss::read_record(path), from_tick, json, out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"swarmsteer: human-steered swarm simulation"};
    app.require_subcommand(1);

    RunFlags run_flags;
    CLI::App* run_cmd = app.add_subcommand("run", "Run a scenario headless");
    run_flags.base.add(run_cmd);
    run_cmd->add_option("--pulse", run_flags.pulses, "Scripted pulse axis:start:duration[:offset], repeatable");
    run_cmd->add_option("--inputs", run_flags.inputs, "Scripted operator: none | shepherd")
        ->check(CLI::IsMember({"none", "shepherd"}))
        ->capture_default_str();
    run_cmd->add_option("--replay", run_flags.replay, "Replay a recorded input log");
    run_cmd->add_option("--record", run_flags.record, "Write the trajectory record here");
    run_cmd->add_option("--save-inputs", run_flags.save_inputs, "Write the applied input events here");
    run_cmd->add_option("--summary", run_flags.summary_out, "Write the JSON summary here");
    run_cmd->add_option("--serve", run_flags.serve, "Serve instead of running headless (host:port)");
    run_cmd->add_flag("--json", run_flags.json, "Print the JSON summary instead of text");

    std::string summarize_path;
    std::int64_t from_tick = 0;
    bool summarize_json = false;
    std::optional<std::string> summarize_out;
    CLI::App* sum_cmd = app.add_subcommand("summarize", "Summarize a trajectory record");
    sum_cmd->add_option("record", summarize_path, "Trajectory record (.jsonl)")->required();
    sum_cmd->add_option("--from-tick", from_tick, "Time averages start at this tick")->check(CLI::NonNegativeNumber);
    sum_cmd->add_flag("--json", summarize_json, "Print the JSON summary instead of text");
    sum_cmd->add_option("--out", summarize_out, "Also write the JSON summary here");

    ServeFlags serve_flags;
    CLI::App* serve_cmd = app.add_subcommand("serve", "Run the live session server");
    serve_flags.base.add(serve_cmd);
    serve_cmd->add_option("--addr,--serve", serve_flags.addr, "host:port (default $SWARMSTEER_ADDR or 127.0.0.1:8765)");
    serve_cmd->add_option("--speed", serve_flags.speed, "Sim seconds per wall second, 0 = unpaced")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    serve_cmd->add_option("--record", serve_flags.record, "Record trajectory and inputs (out.jsonl, out.inputs.jsonl)");
    serve_cmd->add_option("--pulse", serve_flags.pulses, "Scripted pulse, repeatable");
    serve_cmd->add_option("--inputs", serve_flags.inputs, "Scripted operator: none | shepherd")
        ->check(CLI::IsMember({"none", "shepherd"}))
        ->capture_default_str();

    std::string dump_name;
    CLI::App* scen_cmd = app.add_subcommand("scenario", "Print a preset (or validate a file) as JSON");
    scen_cmd->add_option("name", dump_name, "Preset name or file")->required();
    app.add_subcommand("presets", "List preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::schema;
    }

    try {
        if (run_cmd->parsed()) {
            return run(run_flags);
        }
        if (sum_cmd->parsed()) {
            return summarize(summarize_path, from_tick, summarize_json, summarize_out);
        }
        if (serve_cmd->parsed()) {
            return serve(serve_flags);
        }
        if (scen_cmd->parsed()) {
            std::cout << ss::save_scenario(ss::resolve_scenario(dump_name));
            return Exit::ok;
        }
        for (const std::string& name : ss::preset_names()) {
            std::cout << name << '\n';
        }
        return Exit::ok;
    } catch (const ss::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return Exit::schema;
    } catch (const ss::NumericAbort& e) {
        std::cerr << "numeric abort: " << e.what() << '\n';
        return Exit::numeric;
    } catch (const ss::RecordError& e) {
        std::cerr << "record error: " << e.what() << '\n';
        const bool file_level = e.code() == ss::RecordError::Code::io || e.code() == ss::RecordError::Code::overflow;
        return file_level ? Exit::io : Exit::schema;
    } catch (const ss::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return Exit::io;
    } catch (const ss::NetworkError& e) {
        std::cerr << "network error: " << e.what() << '\n';
        return Exit::network;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return Exit::schema;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Exit::io;
    }
}
