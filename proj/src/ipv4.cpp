#include "freetopo/ipv4.hpp"

#include <algorithm>
#include <cstdio>

namespace freetopo {

std::optional<std::uint32_t> parse_ipv4(std::string_view s) {
  s = trim(s);
  auto parts = split(s, '.');
  if (parts.size() != 4) return std::nullopt;
  std::uint32_t ip = 0;
  for (const auto& part : parts) {
    auto octet = parse_u32(part);
    if (!octet || *octet > 255 || part.empty() || part.size() > 3) return std::nullopt;
    ip = (ip << 8) | *octet;
  }
  return ip;
}

std::string ipv4_to_string(std::uint32_t ip) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (ip >> 24) & 0xff, (ip >> 16) & 0xff,
                (ip >> 8) & 0xff, ip & 0xff);
  return buf;
}

namespace {
struct ReservedRange {
  std::uint32_t addr;
  int len;
};
// RFC 6890 special-purpose blocks relevant to IPv4 traceroute hops.
constexpr ReservedRange kReserved[] = {
    {0x00000000, 8},   // 0.0.0.0/8
    {0x0A000000, 8},   // 10.0.0.0/8
    {0x64400000, 10},  // 100.64.0.0/10 CGN
    {0x7F000000, 8},   // 127.0.0.0/8
    {0xA9FE0000, 16},  // 169.254.0.0/16
    {0xAC100000, 12},  // 172.16.0.0/12
    {0xC0000000, 24},  // 192.0.0.0/24
    {0xC0000200, 24},  // 192.0.2.0/24
    {0xC0586300, 24},  // 192.88.99.0/24
    {0xC0A80000, 16},  // 192.168.0.0/16
    {0xC6120000, 15},  // 198.18.0.0/15
    {0xC6336400, 24},  // 198.51.100.0/24
    {0xCB007100, 24},  // 203.0.113.0/24
    {0xE0000000, 4},   // 224.0.0.0/4 multicast
    {0xF0000000, 4},   // 240.0.0.0/4 class E + broadcast
};
}  // namespace

bool is_private_or_reserved(std::uint32_t ip) {
  for (const auto& r : kReserved) {
    std::uint32_t mask = r.len == 0 ? 0 : ~std::uint32_t{0} << (32 - r.len);
    if ((ip & mask) == r.addr) return true;
  }
  return false;
}

std::optional<Ipv4Prefix> Ipv4Prefix::parse(std::string_view s) {
  s = trim(s);
  auto slash = s.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto addr = parse_ipv4(s.substr(0, slash));
  auto len = parse_u32(s.substr(slash + 1));
  if (!addr || !len || *len > 32) return std::nullopt;
  return from_parts(*addr, static_cast<int>(*len));
}

std::optional<Ipv4Prefix> Ipv4Prefix::from_parts(std::uint32_t addr, int len) {
  if (len < 0 || len > 32) return std::nullopt;
  std::uint32_t mask = len == 0 ? 0 : ~std::uint32_t{0} << (32 - len);
  return Ipv4Prefix{addr & mask, len};
}

bool Ipv4Prefix::contains(std::uint32_t ip) const {
  std::uint32_t mask = len == 0 ? 0 : ~std::uint32_t{0} << (32 - len);
  return (ip & mask) == addr;
}

std::string Ipv4Prefix::to_string() const {
  return ipv4_to_string(addr) + "/" + std::to_string(len);
}

void PrefixTable::insert(const Ipv4Prefix& prefix, const std::vector<AsNum>& origins) {
  int node = 0;
  for (int bit = 0; bit < prefix.len; ++bit) {
    int b = (prefix.addr >> (31 - bit)) & 1;
    if (nodes_[node].child[b] < 0) {
      nodes_[node].child[b] = static_cast<int>(nodes_.size());
      nodes_.push_back(Node{});
    }
    node = nodes_[node].child[b];
  }
  if (nodes_[node].entry >= 0) {
    // exact duplicate prefix: merge origin sets
    auto& existing = entries_[nodes_[node].entry].origins;
    existing.insert(existing.end(), origins.begin(), origins.end());
    std::sort(existing.begin(), existing.end());
    existing.erase(std::unique(existing.begin(), existing.end()), existing.end());
    return;
  }
  PrefixOrigin entry{prefix, origins};
  std::sort(entry.origins.begin(), entry.origins.end());
  entry.origins.erase(std::unique(entry.origins.begin(), entry.origins.end()),
                      entry.origins.end());
  nodes_[node].entry = static_cast<int>(entries_.size());
  entries_.push_back(std::move(entry));
}

const PrefixOrigin* PrefixTable::lookup(std::uint32_t ip) const {
  int node = 0;
  const PrefixOrigin* best = nodes_[0].entry >= 0 ? &entries_[nodes_[0].entry] : nullptr;
  for (int bit = 0; bit < 32; ++bit) {
    int b = (ip >> (31 - bit)) & 1;
    node = nodes_[node].child[b];
    if (node < 0) break;
    if (nodes_[node].entry >= 0) best = &entries_[nodes_[node].entry];
  }
  return best;
}

PrefixTable PrefixTable::build(const std::vector<PrefixOrigin>& records) {
  PrefixTable table;
  for (const auto& r : records) table.insert(r.prefix, r.origins);
  return table;
}

void IxpPrefixes::insert(const Ipv4Prefix& prefix) {
  table_.insert(prefix, {});
  prefixes_.push_back(prefix);
}

}  // namespace freetopo
