#pragma once
// In-process stand-in for the scorer worker. Duration is 0.1 s per
// non-whitespace character; QE is 5 x token-set Jaccard similarity.

#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace mock {

struct Options {
    std::set<std::string> languages{"en", "de", "es", "ru", "zh"};
    bool qe = true;
};

double mock_seconds(const std::string &text);
double mock_qe(const std::string &source, const std::string &translated);

/// Answers one request line. Always returns a single response object.
nlohmann::json handle_line(const std::string &line, const Options &options = {});

/// Serves the mock protocol over TCP on 127.0.0.1, one thread per connection.
class TcpServer {
  public:
    explicit TcpServer(Options options = {});
    ~TcpServer();
    TcpServer(const TcpServer &) = delete;
    TcpServer &operator=(const TcpServer &) = delete;

    std::uint16_t port() const { return port_; }
    std::string address() const { return "127.0.0.1:" + std::to_string(port_); }
    /// Drops every open connection without answering.
    void drop_connections();

  private:
    void accept_loop();

    Options options_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread acceptor_;
    std::vector<std::thread> sessions_;
    std::vector<int> client_fds_;
    std::mutex mutex_;
};

} // namespace mock
