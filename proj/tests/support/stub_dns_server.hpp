#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace urlbench::testsupport {

/// Minimal scripted DNS server on 127.0.0.1 (ephemeral port), UDP and TCP.
/// Unknown names answer NXDOMAIN. With truncate_udp set, UDP replies carry
/// the TC bit and no answers, forcing clients onto TCP.
class StubDnsServer {
 public:
  struct Script {
    std::vector<std::pair<std::string, uint32_t>> a_records;  // (dotted quad, ttl)
    bool nxdomain = false;
    bool truncate_udp = false;
  };

  StubDnsServer();
  ~StubDnsServer();

  StubDnsServer(const StubDnsServer&) = delete;
  StubDnsServer& operator=(const StubDnsServer&) = delete;

  uint16_t port() const { return port_; }
  void set(const std::string& domain, Script script);

 private:
  void udp_loop();
  void tcp_loop();
  std::vector<uint8_t> answer_for(const uint8_t* query, size_t len, bool tcp);

  int udp_fd_ = -1;
  int tcp_fd_ = -1;
  uint16_t port_ = 0;
  std::thread udp_thread_;
  std::thread tcp_thread_;
  std::mutex mu_;
  std::map<std::string, Script> scripts_;
  bool stopping_ = false;
};

}  // namespace urlbench::testsupport
