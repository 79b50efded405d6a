#include "urlbench/resolver.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstring>
#include <fstream>
#include <random>
#include <thread>

#include "urlbench/csv.hpp"
#include "urlbench/errors.hpp"

namespace urlbench::dns {

namespace {

struct Fd {
  int fd = -1;
  ~Fd() {
    if (fd >= 0) ::close(fd);
  }
};

uint16_t next_query_id() {
  static std::atomic<uint16_t> counter{
      static_cast<uint16_t>(std::random_device{}())};
  return counter.fetch_add(1);
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v & 0xff));
}

uint16_t get_u16(const uint8_t* p) { return static_cast<uint16_t>((p[0] << 8) | p[1]); }

uint32_t get_u32(const uint8_t* p) {
  return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
         (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

// Skips a possibly compressed name. Returns false on malformed input.
bool skip_name(const uint8_t* data, size_t len, size_t& pos) {
  while (pos < len) {
    uint8_t b = data[pos];
    if (b == 0) {
      ++pos;
      return true;
    }
    if ((b & 0xc0) == 0xc0) {
      pos += 2;
      return pos <= len;
    }
    pos += 1 + b;
  }
  return false;
}

sockaddr_in server_addr(const ResolverConfig& config) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(config.port);
  auto ip = parse_ipv4(config.server);
  if (!ip) throw ConfigError("bad resolver address '" + config.server + "'");
  addr.sin_addr.s_addr = htonl(*ip);
  return addr;
}

void set_timeout(int fd, int timeout_ms) {
  timeval tv{};
  tv.tv_sec = timeout_ms / 1000;
  tv.tv_usec = (timeout_ms % 1000) * 1000;
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

std::optional<WireAnswer> query_tcp(const std::vector<uint8_t>& query, uint16_t id,
                                    const ResolverConfig& config) {
  Fd sock;
  sock.fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (sock.fd < 0) throw IoError("cannot create TCP socket");
  set_timeout(sock.fd, config.timeout_ms);
  sockaddr_in addr = server_addr(config);
  if (::connect(sock.fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
    return std::nullopt;

  std::vector<uint8_t> framed;
  put_u16(framed, static_cast<uint16_t>(query.size()));
  framed.insert(framed.end(), query.begin(), query.end());
  size_t sent = 0;
  while (sent < framed.size()) {
    ssize_t n = ::send(sock.fd, framed.data() + sent, framed.size() - sent, 0);
    if (n <= 0) return std::nullopt;
    sent += static_cast<size_t>(n);
  }

  auto read_exact = [&](uint8_t* buf, size_t want) -> bool {
    size_t got = 0;
    while (got < want) {
      ssize_t n = ::recv(sock.fd, buf + got, want - got, 0);
      if (n <= 0) return false;
      got += static_cast<size_t>(n);
    }
    return true;
  };
  uint8_t len_buf[2];
  if (!read_exact(len_buf, 2)) return std::nullopt;
  uint16_t resp_len = get_u16(len_buf);
  std::vector<uint8_t> resp(resp_len);
  if (resp_len == 0 || !read_exact(resp.data(), resp_len)) return std::nullopt;
  return decode_response(resp.data(), resp.size(), id);
}

}  // namespace

std::vector<uint8_t> encode_query(uint16_t id, const std::string& domain) {
  std::vector<uint8_t> out;
  put_u16(out, id);
  put_u16(out, 0x0100);  // RD
  put_u16(out, 1);       // QDCOUNT
  put_u16(out, 0);
  put_u16(out, 0);
  put_u16(out, 0);
  size_t start = 0;
  while (start <= domain.size()) {
    size_t dot = domain.find('.', start);
    size_t end = dot == std::string::npos ? domain.size() : dot;
    size_t n = end - start;
    if (n == 0 || n > 63) throw ConfigError("bad label in domain '" + domain + "'");
    out.push_back(static_cast<uint8_t>(n));
    for (size_t i = start; i < end; ++i) out.push_back(static_cast<uint8_t>(domain[i]));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  out.push_back(0);
  put_u16(out, 1);  // QTYPE A
  put_u16(out, 1);  // QCLASS IN
  return out;
}

std::optional<WireAnswer> decode_response(const uint8_t* data, size_t len, uint16_t expect_id) {
  if (len < 12) return std::nullopt;
  if (get_u16(data) != expect_id) return std::nullopt;
  uint16_t flags = get_u16(data + 2);
  if ((flags & 0x8000) == 0) return std::nullopt;  // not a response
  WireAnswer ans;
  ans.truncated = (flags & 0x0200) != 0;
  ans.rcode = flags & 0x000f;
  uint16_t qdcount = get_u16(data + 4);
  uint16_t ancount = get_u16(data + 6);

  size_t pos = 12;
  for (uint16_t q = 0; q < qdcount; ++q) {
    if (!skip_name(data, len, pos)) return std::nullopt;
    pos += 4;
    if (pos > len) return std::nullopt;
  }
  for (uint16_t a = 0; a < ancount; ++a) {
    if (!skip_name(data, len, pos)) return std::nullopt;
    if (pos + 10 > len) return std::nullopt;
    uint16_t type = get_u16(data + pos);
    uint16_t klass = get_u16(data + pos + 2);
    uint32_t ttl = get_u32(data + pos + 4);
    uint16_t rdlen = get_u16(data + pos + 8);
    pos += 10;
    if (pos + rdlen > len) return std::nullopt;
    if (type == 1 && klass == 1 && rdlen == 4) {
      ans.a_records.emplace_back(get_u32(data + pos), ttl);
    }
    pos += rdlen;
  }
  return ans;
}

DnsResponse resolve(const std::string& domain, const ResolverConfig& config) {
  DnsResponse empty;
  empty.resolved_at = static_cast<Timestamp>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());

  uint16_t id = next_query_id();
  std::vector<uint8_t> query = encode_query(id, domain);
  sockaddr_in addr = server_addr(config);

  std::optional<WireAnswer> answer;
  int attempts = 1 + std::max(0, config.retries);
  for (int attempt = 0; attempt < attempts && !answer; ++attempt) {
    Fd sock;
    sock.fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (sock.fd < 0) throw IoError("cannot create UDP socket");
    set_timeout(sock.fd, config.timeout_ms);
    ssize_t sent = ::sendto(sock.fd, query.data(), query.size(), 0,
                            reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
    if (sent < 0) continue;

    auto deadline =
        std::chrono::steady_clock::now() + std::chrono::milliseconds(config.timeout_ms);
    uint8_t buf[1500];
    while (std::chrono::steady_clock::now() < deadline) {
      ssize_t n = ::recvfrom(sock.fd, buf, sizeof(buf), 0, nullptr, nullptr);
      if (n <= 0) break;  // timeout or transient error; next attempt
      auto decoded = decode_response(buf, static_cast<size_t>(n), id);
      if (decoded) {
        answer = decoded;
        break;
      }
      // mismatched ID: stale datagram, keep listening
    }
  }
  if (!answer) return empty;

  if (answer->truncated) {
    auto tcp = query_tcp(query, id, config);
    if (!tcp) return empty;
    answer = tcp;
  }
  if (answer->rcode != 0) return empty;

  DnsResponse resp;
  resp.resolved_at = empty.resolved_at;
  bool first = true;
  for (const auto& [ip, ttl] : answer->a_records) {
    if (std::find(resp.ips.begin(), resp.ips.end(), ip) == resp.ips.end())
      resp.ips.push_back(ip);
    switch (config.ttl_mode) {
      case TtlMode::kMin: resp.ttl = first ? ttl : std::min(resp.ttl, ttl); break;
      case TtlMode::kMax: resp.ttl = first ? ttl : std::max(resp.ttl, ttl); break;
      case TtlMode::kFirst:
        if (first) resp.ttl = ttl;
        break;
    }
    first = false;
  }
  return resp;
}

std::vector<DnsResponse> resolve_many(const std::vector<std::string>& domains,
                                      const ResolverConfig& config) {
  std::vector<DnsResponse> results(domains.size());
  if (domains.empty()) return results;
  size_t workers = std::min<size_t>(std::max(1, config.max_inflight), domains.size());
  std::atomic<size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= domains.size()) return;
        results[i] = resolve(domains[i], config);
      }
    });
  }
  for (auto& t : threads) t.join();
  return results;
}

DnsCache DnsCache::load(const std::string& path) {
  auto rows = csv::read_file(path);
  DnsCache cache;
  if (rows.empty()) return cache;
  if (csv::join_row(rows[0].fields) != "domain,ips,ttl,resolved_at")
    throw MalformedRowError(rows[0].line, "expected header 'domain,ips,ttl,resolved_at'");
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 4)
      throw MalformedRowError(row.line, "expected 4 columns");
    DnsResponse resp;
    const std::string& ips = row.fields[1];
    size_t i = 0;
    while (!ips.empty() && i <= ips.size()) {
      size_t semi = ips.find(';', i);
      std::string_view part =
          std::string_view(ips).substr(i, (semi == std::string::npos ? ips.size() : semi) - i);
      auto ip = parse_ipv4(part);
      if (!ip) throw MalformedRowError(row.line, "bad ip '" + std::string(part) + "'");
      resp.ips.push_back(*ip);
      if (semi == std::string::npos) break;
      i = semi + 1;
    }
    try {
      resp.ttl = static_cast<uint32_t>(std::stoul(row.fields[2]));
    } catch (...) {
      throw MalformedRowError(row.line, "bad ttl '" + row.fields[2] + "'");
    }
    auto ts = parse_iso8601(row.fields[3]);
    if (!ts) throw MalformedRowError(row.line, "bad resolved_at '" + row.fields[3] + "'");
    resp.resolved_at = *ts;
    cache.map_[row.fields[0]] = std::move(resp);
  }
  return cache;
}

void DnsCache::save(const std::string& path) const {
  std::vector<std::string> domains;
  domains.reserve(map_.size());
  for (const auto& [d, r] : map_) domains.push_back(d);
  std::sort(domains.begin(), domains.end());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "domain,ips,ttl,resolved_at\n";
  for (const auto& d : domains) {
    const DnsResponse& r = map_.at(d);
    std::string ips;
    for (size_t i = 0; i < r.ips.size(); ++i) {
      if (i) ips.push_back(';');
      ips += format_ipv4(r.ips[i]);
    }
    out << csv::join_row({d, ips, std::to_string(r.ttl), format_iso8601(r.resolved_at)}) << "\n";
  }
  if (!out) throw IoError("failed writing " + path);
}

std::optional<DnsResponse> DnsCache::lookup(const std::string& domain) const {
  auto it = map_.find(domain);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void DnsCache::insert(const std::string& domain, DnsResponse resp) {
  map_[domain] = std::move(resp);
}

}  // namespace urlbench::dns
