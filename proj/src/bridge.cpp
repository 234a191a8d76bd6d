#include "isochrono/bridge.hpp"

#include "isochrono/errors.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include <fcntl.h>
#include <netdb.h>
#include <sys/socket.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace isochrono {

namespace {

void ignore_sigpipe_once() {
    static std::once_flag flag;
    std::call_once(flag, [] { std::signal(SIGPIPE, SIG_IGN); });
}

std::string errno_text() { return std::strerror(errno); }

} // namespace

// ---------------------------------------------------------------------------
// FdTransport

FdTransport::FdTransport(int read_fd, int write_fd, std::string description)
    : read_fd_(read_fd), write_fd_(write_fd), description_(std::move(description)) {
    ignore_sigpipe_once();
    struct stat st {};
    if (::fstat(write_fd_, &st) == 0) is_socket_ = S_ISSOCK(st.st_mode);
}

FdTransport::~FdTransport() {
    close_write();
    if (read_fd_ >= 0) ::close(read_fd_);
}

void FdTransport::close_write() {
    if (write_fd_ < 0) return;
    if (is_socket_ && write_fd_ == read_fd_) {
        ::shutdown(write_fd_, SHUT_WR);
    } else {
        ::close(write_fd_);
    }
    write_fd_ = -1;
}

void FdTransport::write_line(std::string_view line) {
    if (line.find('\n') != std::string_view::npos) {
        throw InvalidInput("bridge lines must not contain LF");
    }
    if (write_fd_ < 0) throw TransportError(description_ + ": connection closed for writing");
    std::string data(line);
    data.push_back('\n');
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = is_socket_
                              ? ::send(write_fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL)
                              : ::write(write_fd_, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError(description_ + ": write failed: " + errno_text());
        }
        off += static_cast<std::size_t>(n);
    }
}

std::optional<std::string> FdTransport::read_line() {
    while (true) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        char chunk[4096];
        const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError(description_ + ": read failed: " + errno_text());
        }
        if (n == 0) {
            if (!buffer_.empty()) {
                throw ProtocolError(description_ + ": stream ended inside an unterminated line");
            }
            return std::nullopt;
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

// ---------------------------------------------------------------------------
// SubprocessTransport

namespace {

detail::SpawnedWorker spawn_worker(const std::string &command) {
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) throw TransportError("pipe: " + errno_text());
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
        ::close(to_child[0]);
        ::close(to_child[1]);
        throw TransportError("pipe: " + errno_text());
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
        for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
        throw TransportError("fork: " + errno_text());
    }
    if (pid == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char *>(nullptr));
        ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    return {from_child[0], to_child[1], static_cast<int>(pid)};
}

} // namespace

SubprocessTransport::SubprocessTransport(const std::string &command)
    : SubprocessTransport(spawn_worker(command), command) {}

SubprocessTransport::SubprocessTransport(detail::SpawnedWorker worker, const std::string &command)
    : FdTransport(worker.read_fd, worker.write_fd, "bridge worker `" + command + "`"),
      pid_(worker.pid) {}

SubprocessTransport::~SubprocessTransport() {
    close_write();
    using namespace std::chrono_literals;
    const auto deadline = std::chrono::steady_clock::now() + 2s;
    int status = 0;
    while (::waitpid(pid_, &status, WNOHANG) == 0) {
        if (std::chrono::steady_clock::now() > deadline) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, &status, 0);
            break;
        }
        std::this_thread::sleep_for(5ms);
    }
}

// ---------------------------------------------------------------------------
// TcpTransport

namespace {

int connect_tcp(const std::string &host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo *res = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
        throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
    }
    int fd = -1;
    for (auto *ai = res; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw TransportError("cannot connect to " + host + ":" + service);
    return fd;
}

} // namespace

TcpTransport::TcpTransport(const std::string &host, std::uint16_t port)
    : TcpTransport(connect_tcp(host, port), "bridge tcp://" + host + ":" + std::to_string(port)) {}

TcpTransport::TcpTransport(int fd, const std::string &description) : FdTransport(fd, fd, description) {}

std::unique_ptr<Transport> connect_bridge(const std::string &address) {
    std::string rest = address;
    bool tcp = false;
    if (rest.rfind("tcp://", 0) == 0) {
        rest = rest.substr(6);
        tcp = true;
    }
    const auto colon = rest.rfind(':');
    if (!tcp && colon != std::string::npos && colon + 1 < rest.size() &&
        rest.find(' ') == std::string::npos &&
        rest.find_first_not_of("0123456789", colon + 1) == std::string::npos) {
        tcp = true;
    }
    if (tcp) {
        if (colon == std::string::npos) throw InvalidInput("bridge address needs a port: " + address);
        const auto port = std::strtoul(rest.c_str() + colon + 1, nullptr, 10);
        if (port == 0 || port > 65535) throw InvalidInput("bad bridge port in " + address);
        return std::make_unique<TcpTransport>(rest.substr(0, colon), static_cast<std::uint16_t>(port));
    }
    if (text::trim(address).empty()) throw InvalidInput("empty bridge address");
    return std::make_unique<SubprocessTransport>(address);
}

std::string resolve_bridge_address(const std::string &configured) {
    if (const char *env = std::getenv(bridge_env_var); env != nullptr && *env != '\0') return env;
    return configured;
}

// ---------------------------------------------------------------------------
// Protocol

std::pair<std::int64_t, BridgeReply> parse_bridge_response(std::string_view line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
        throw ProtocolError(std::string("bridge response is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw ProtocolError("bridge response is not a JSON object");
    if (!j.contains("id") || !j["id"].is_number_integer()) {
        throw ProtocolError("bridge response without integer id: " + std::string(line));
    }
    if (!j.contains("ok") || !j["ok"].is_boolean()) {
        throw ProtocolError("bridge response without boolean ok");
    }
    BridgeReply reply;
    reply.ok = j["ok"].get<bool>();
    const bool has_error = j.contains("error") && !j["error"].is_null();
    if (reply.ok == has_error) throw ProtocolError("bridge response must carry exactly one of result/error");
    if (reply.ok) {
        if (!j.contains("result") || !j["result"].is_object()) {
            throw ProtocolError("successful bridge response without result object");
        }
        reply.result = j["result"];
    } else {
        const auto &err = j["error"];
        if (!err.is_object() || !err.contains("code") || !err["code"].is_string()) {
            throw ProtocolError("bridge error without code");
        }
        reply.error_code = err["code"].get<std::string>();
        if (err.contains("message") && err["message"].is_string()) {
            reply.error_message = err["message"].get<std::string>();
        }
    }
    return {j["id"].get<std::int64_t>(), std::move(reply)};
}

BridgeClient::BridgeClient(std::unique_ptr<Transport> transport) : transport_(std::move(transport)) {
    if (!transport_) throw InvalidInput("bridge client needs a transport");
}

const BridgeCapabilities &BridgeClient::capabilities() {
    {
        std::lock_guard lock(mutex_);
        if (capabilities_) return *capabilities_;
    }
    const auto reply = call_one("capabilities", nlohmann::json::object());
    if (!reply.ok) {
        throw ProtocolError("capabilities request refused: " + reply.error_code + " " + reply.error_message);
    }
    BridgeCapabilities caps;
    try {
        for (const auto &lang : reply.result.at("languages")) caps.languages.insert(lang.get<std::string>());
        caps.qe = reply.result.value("qe", false);
        caps.duration_model = reply.result.value("duration_model", std::string());
        caps.qe_model = reply.result.value("qe_model", std::string());
    } catch (const nlohmann::json::exception &e) {
        throw ProtocolError(std::string("malformed capabilities result: ") + e.what());
    }
    std::lock_guard lock(mutex_);
    capabilities_ = std::move(caps);
    return *capabilities_;
}

BridgeReply BridgeClient::call_one(std::string_view op, const nlohmann::json &payload) {
    auto replies = call(op, std::vector<nlohmann::json>{payload});
    return std::move(replies.front());
}

std::vector<BridgeReply> BridgeClient::call(std::string_view op,
                                            const std::vector<nlohmann::json> &payloads) {
    std::lock_guard lock(mutex_);
    if (payloads.empty()) return {};

    std::map<std::int64_t, std::size_t> pending;
    std::vector<std::string> lines;
    lines.reserve(payloads.size());
    for (std::size_t i = 0; i < payloads.size(); ++i) {
        const auto id = next_id_++;
        pending.emplace(id, i);
        nlohmann::json req = {{"op", op}, {"id", id}, {"payload", payloads[i]}};
        lines.push_back(req.dump());
    }

    // A separate writer keeps large batches from deadlocking on full pipes.
    std::exception_ptr write_error;
    auto write_all = [&] {
        try {
            for (const auto &l : lines) transport_->write_line(l);
        } catch (...) {
            write_error = std::current_exception();
        }
    };
    std::thread writer;
    if (lines.size() == 1) {
        write_all();
    } else {
        writer = std::thread(write_all);
    }

    std::vector<std::optional<BridgeReply>> replies(payloads.size());
    std::exception_ptr read_error;
    try {
        std::size_t remaining = payloads.size();
        while (remaining > 0) {
            if (lines.size() == 1 && write_error) break;
            auto line = transport_->read_line();
            if (!line) throw TransportError(transport_->describe() + ": connection closed by worker");
            auto [id, reply] = parse_bridge_response(*line);
            const auto it = pending.find(id);
            if (it == pending.end()) {
                throw ProtocolError("bridge answered unknown or already-answered id " + std::to_string(id));
            }
            replies[it->second] = std::move(reply);
            pending.erase(it);
            --remaining;
        }
    } catch (...) {
        read_error = std::current_exception();
    }
    if (writer.joinable()) writer.join();
    if (write_error) std::rethrow_exception(write_error);
    if (read_error) std::rethrow_exception(read_error);

    std::vector<BridgeReply> out;
    out.reserve(replies.size());
    for (auto &r : replies) out.push_back(std::move(*r));
    return out;
}

} // namespace isochrono
