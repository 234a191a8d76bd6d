#pragma once

// Client side of the scorer bridge: newline-delimited JSON over a worker's
// stdio or a TCP socket.
//
//   request:  {"op": "duration"|"qe"|"capabilities", "id": <int>, "payload": {...}}
//   response: {"id": <int>, "ok": true, "result": {...}}
//           | {"id": <int>, "ok": false, "error": {"code": "...", "message": "..."}}
//
// Responses may arrive in any order; they are matched back by id.

#include "isochrono/text.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace isochrono {

namespace bridge_codes {
inline constexpr std::string_view unsupported_language = "UNSUPPORTED_LANGUAGE";
inline constexpr std::string_view empty_text = "EMPTY_TEXT";
inline constexpr std::string_view model_error = "MODEL_ERROR";
inline constexpr std::string_view bad_request = "BAD_REQUEST";
} // namespace bridge_codes

/// Environment variable that overrides any configured bridge address.
inline constexpr const char *bridge_env_var = "ISOCHRONO_BRIDGE";

/// A bidirectional line channel.
class Transport {
  public:
    virtual ~Transport() = default;
    /// Writes `line` followed by LF. Throws TransportError.
    virtual void write_line(std::string_view line) = 0;
    /// Next LF-terminated line without its terminator; nullopt on clean EOF.
    virtual std::optional<std::string> read_line() = 0;
    virtual std::string describe() const = 0;
};

/// Reads lines from a file descriptor with internal buffering.
class FdTransport : public Transport {
  public:
    FdTransport(int read_fd, int write_fd, std::string description);
    ~FdTransport() override;
    FdTransport(const FdTransport &) = delete;
    FdTransport &operator=(const FdTransport &) = delete;

    void write_line(std::string_view line) override;
    std::optional<std::string> read_line() override;
    std::string describe() const override { return description_; }

  protected:
    void close_write();

  private:
    int read_fd_;
    int write_fd_;
    bool is_socket_ = false;
    std::string buffer_;
    std::string description_;
};

namespace detail {
struct SpawnedWorker {
    int read_fd;
    int write_fd;
    int pid;
};
} // namespace detail

/// Spawns `/bin/sh -c command` and talks to it over its stdin/stdout.
class SubprocessTransport final : public FdTransport {
  public:
    explicit SubprocessTransport(const std::string &command);
    ~SubprocessTransport() override;

  private:
    SubprocessTransport(detail::SpawnedWorker worker, const std::string &command);
    int pid_;
};

class TcpTransport final : public FdTransport {
  public:
    TcpTransport(const std::string &host, std::uint16_t port);

  private:
    TcpTransport(int fd, const std::string &description);
};

/// "tcp://host:port" or "host:port" connects over TCP; anything else is run
/// as a worker command.
std::unique_ptr<Transport> connect_bridge(const std::string &address);

/// Applies the ISOCHRONO_BRIDGE override to a configured address.
std::string resolve_bridge_address(const std::string &configured);

struct BridgeCapabilities {
    std::set<LanguageCode> languages;
    bool qe = false;
    std::string duration_model; ///< optional model identifier reported by the worker
    std::string qe_model;
};

struct BridgeReply {
    bool ok = false;
    nlohmann::json result;
    std::string error_code;
    std::string error_message;
};

/// One connection to a worker. Calls are serialized per connection, so a
/// client may be shared between threads.
class BridgeClient {
  public:
    explicit BridgeClient(std::unique_ptr<Transport> transport);

    const BridgeCapabilities &capabilities();

    /// Sends one request per payload and returns replies in payload order.
    /// Throws TransportError when the worker goes away and ProtocolError on
    /// malformed, duplicate or unknown responses.
    std::vector<BridgeReply> call(std::string_view op, const std::vector<nlohmann::json> &payloads);

    BridgeReply call_one(std::string_view op, const nlohmann::json &payload);

    std::string describe() const { return transport_->describe(); }

  private:
    std::mutex mutex_;
    std::unique_ptr<Transport> transport_;
    std::int64_t next_id_ = 1;
    std::optional<BridgeCapabilities> capabilities_;
};

/// Parses and checks one response line against the wire schema.
/// Returns the id and reply; throws ProtocolError on violations.
std::pair<std::int64_t, BridgeReply> parse_bridge_response(std::string_view line);

} // namespace isochrono
